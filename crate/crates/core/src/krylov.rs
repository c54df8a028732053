//! Restarted GMRES for matrix-free linear operators.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

/// Outcome of one linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    /// Final relative residual `|b - A x| / |b|`, recomputed from `x`.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovSettings {
    pub restart: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for KrylovSettings {
    fn default() -> Self {
        Self { restart: 30, max_iterations: 500, tolerance: 1e-12 }
    }
}

/// Right-hand sides with a norm below this are treated as exactly zero.
pub const ZERO_RHS: f64 = 1e-300;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

fn residual(apply: &mut impl FnMut(&[f64], &mut [f64]), b: &[f64], x: &[f64], r: &mut [f64]) {
    apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solves `A x = b` starting from `x` (overwritten with the solution).
///
/// `apply(v, out)` must write `A v` into `out`. Convergence is declared when
/// the true residual, recomputed at the end of every restart cycle, drops to
/// `tolerance * |b|`. The inner products run in index order so iteration
/// counts are reproducible.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    settings: &KrylovSettings,
) -> KrylovReport {
    let n = b.len();
    assert_eq!(x.len(), n, "solution and right-hand side differ in length");
    let b_norm = norm(b);
    if b_norm < ZERO_RHS {
        x.iter_mut().for_each(|v| *v = 0.0);
        return KrylovReport { iterations: 0, residual: 0.0, converged: true };
    }
    let target = settings.tolerance * b_norm;
    let m = settings.restart.max(1);

    let mut r = vec![0.0; n];
    residual(&mut apply, b, x, &mut r);
    let mut r_norm = norm(&r);
    let mut iterations = 0;

    let mut basis: Vec<Vec<f64>> = (0..=m).map(|_| vec![0.0; n]).collect();
    let mut hess = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut w = vec![0.0; n];

    while r_norm > target && iterations < settings.max_iterations {
        for (v, ri) in basis[0].iter_mut().zip(&r) {
            *v = ri / r_norm;
        }
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = r_norm;
        let mut k = 0;
        while k < m && iterations < settings.max_iterations {
            apply(&basis[k], &mut w);
            // Modified Gram-Schmidt.
            for i in 0..=k {
                let h = dot(&w, &basis[i]);
                hess[i][k] = h;
                for (wj, vj) in w.iter_mut().zip(&basis[i]) {
                    *wj -= h * vj;
                }
            }
            let h_next = norm(&w);
            hess[k + 1][k] = h_next;
            if h_next > 0.0 {
                for (v, wj) in basis[k + 1].iter_mut().zip(&w) {
                    *v = wj / h_next;
                }
            }
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let (a, bb) = (hess[k][k], hess[k + 1][k]);
            let denom = sqrt(a * a + bb * bb);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = a / denom;
                sn[k] = bb / denom;
            }
            hess[k][k] = cs[k] * a + sn[k] * bb;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k += 1;
            if g[k].abs() <= target || h_next == 0.0 {
                break;
            }
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= hess[i][j] * y[j];
            }
            y[i] = if hess[i][i] != 0.0 { s / hess[i][i] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        residual(&mut apply, b, x, &mut r);
        let new_norm = norm(&r);
        let stalled = k == 0 || !(new_norm < r_norm);
        r_norm = new_norm;
        if stalled && r_norm > target {
            break;
        }
    }
    let rel = r_norm / b_norm;
    KrylovReport { iterations, residual: rel, converged: r_norm <= target }
}
