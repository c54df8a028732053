//! The implicit pressure sub-step.
//!
//! The unknown is the pressure deviation `x = p - p_eq` on interior cells.
//! Per active axis the system reads
//!
//! ```text
//! x/(g-1) - tau/(2d) a (x[+1] - x[-1])
//!         - tau^2/d^2 [(3/4 h[-1] + 1/4 h[+1]) x[-1] - (h[-1] + h[+1]) x
//!                      + (1/4 h[-1] + 3/4 h[+1]) x[+1]] = b
//! ```
//!
//! with `a = (rho v)_E / (2 rho_new)` and `h` the enthalpy of the
//! linearisation state. Momentum and energy follow from centred differences
//! of the solved pressure.

use alloc::vec;
use alloc::vec::Vec;

use crate::boundary::Boundary;
use crate::error::Result;
use crate::explicit::Discretization;
use crate::grid::{Field, FieldSet, Grid, ScalarField};
use crate::krylov::{gmres, KrylovReport, KrylovSettings};
use crate::physics::enthalpy;
use crate::state::{mom, ENERGY};

#[inline]
fn shifted(mut c: [isize; 3], axis: usize, by: isize) -> [isize; 3] {
    c[axis] += by;
    c
}

/// Variable-coefficient Laplacian `sum_a d_a(h d_a p)` with the compact
/// three-point stencil, interior cells only. Ghosts of `p` and `h` must be
/// filled. The coefficient of the centre cell does not enter.
pub fn enthalpy_laplacian_apply(p: &ScalarField, h: &ScalarField, grid: &Grid) -> ScalarField {
    let mut out = ScalarField::filled(grid, 0.0);
    for c in grid.interior() {
        out.set(c, laplacian_at(p, h, grid, c));
    }
    out
}

#[inline]
fn laplacian_at(p: &ScalarField, h: &ScalarField, grid: &Grid, c: [isize; 3]) -> f64 {
    let mut s = 0.0;
    for a in 0..grid.dim() {
        let (m, pl) = (shifted(c, a, -1), shifted(c, a, 1));
        let (hm, hp) = (h.get(m), h.get(pl));
        let d = grid.spacing(a);
        s += ((0.75 * hm + 0.25 * hp) * p.get(m) - (hm + hp) * p.get(c) + (0.25 * hm + 0.75 * hp) * p.get(pl))
            / (d * d);
    }
    s
}

/// Wide-stencil counterpart of [`enthalpy_laplacian_apply`],
/// `sum_a [h[+1] (p[+2] - p) - h[-1] (p - p[-2])] / (4 d^2)`: the operator
/// that the conservative energy update applies implicitly. Needs two ghost
/// layers.
pub fn wide_enthalpy_laplacian_apply(p: &ScalarField, h: &ScalarField, grid: &Grid) -> ScalarField {
    let mut out = ScalarField::filled(grid, 0.0);
    for c in grid.interior() {
        let mut s = 0.0;
        for a in 0..grid.dim() {
            let d = grid.spacing(a);
            let (hm, hp) = (h.get(shifted(c, a, -1)), h.get(shifted(c, a, 1)));
            let (pm, p0, pp) = (p.get(shifted(c, a, -2)), p.get(c), p.get(shifted(c, a, 2)));
            s += (hp * (pp - p0) - hm * (p0 - pm)) / (4.0 * d * d);
        }
        out.set(c, s);
    }
    out
}

/// The linear pressure system of one implicit stage.
#[derive(Debug, Clone)]
pub struct PressureSystem {
    grid: Grid,
    boundary: Boundary,
    gamma: f64,
    tau: f64,
    /// Enthalpy of the linearisation state at every stored cell.
    h: ScalarField,
    /// `(rho v)_E / (2 rho_new)` per component on interior cells.
    adv: Field<[f64; 3]>,
    /// Pressure deviation on exact-boundary ghosts.
    dirichlet: ScalarField,
    /// Right-hand side in deviation form, without `p_eq/(gamma-1)`.
    rhs: ScalarField,
    /// Equilibrium pressure at every stored cell (zero when trivial).
    p_eq: ScalarField,
}

impl PressureSystem {
    /// Builds the system from the explicit prediction `dq_star` and the
    /// linearisation state `dq_e`, both with filled ghosts. `tau` is the
    /// implicit weight times the time step.
    pub fn new(disc: &Discretization, boundary: &Boundary, dq_star: &FieldSet, dq_e: &FieldSet, tau: f64) -> Result<Self> {
        let grid = &disc.grid;
        let eos = &disc.eos;
        let eq = &disc.equilibrium;
        let mut h = ScalarField::filled(grid, 0.0);
        for c in grid.all_cells() {
            h.set(c, enthalpy(&eq.recompose_at(dq_e, c), eos).map_err(|e| at_cell(e, c))?);
        }
        let mut adv = Field::filled(grid, [0.0; 3]);
        for c in grid.interior() {
            let rho_new = eq.recompose_at(dq_star, c).rho();
            let m = eq.recompose_at(dq_e, c).momentum();
            adv.set(c, core::array::from_fn(|a| m[a] / (2.0 * rho_new)));
        }
        let dirichlet = ScalarField::from_fn(grid, |c| {
            if grid.is_interior(c) {
                0.0
            } else {
                eq.pressure_deviation(dq_star, c, eos)
            }
        });
        let p_eq = ScalarField::from_fn(grid, |c| if eq.is_trivial() { 0.0 } else { eq.center(c).pressure(eos) });
        let mut sys = Self {
            grid: grid.clone(),
            boundary: boundary.clone(),
            gamma: eos.gamma,
            tau,
            h,
            adv,
            dirichlet,
            rhs: ScalarField::filled(grid, 0.0),
            p_eq,
        };
        sys.rhs = sys.assemble_rhs(disc, dq_star);
        Ok(sys)
    }

    /// Deviation right-hand side
    /// `dE* - dm - sum_a a (d rho v_a)* - sum_a tau/(2d) (h (rho v_a)*)[+1] - (h (rho v_a)*)[-1]`.
    fn assemble_rhs(&self, disc: &Discretization, dq_star: &FieldSet) -> ScalarField {
        let grid = &self.grid;
        let eos = &disc.eos;
        let eq = &disc.equilibrium;
        let mut rhs = ScalarField::filled(grid, 0.0);
        for c in grid.interior() {
            let d = dq_star.get(c);
            let b_eq = eq.center(c).b();
            let b_full = eq.recompose_at(dq_star, c).b();
            let dm = eos.magnetic_energy(b_full) - eos.magnetic_energy(b_eq);
            let mut r = d[ENERGY] - dm;
            let adv = self.adv.get(c);
            // The kinetic split runs over all three momenta; inactive axes
            // only contribute known values.
            for a in 0..3 {
                r -= adv[a] * d[mom(a)];
            }
            for a in 0..grid.dim() {
                let (m, p) = (shifted(c, a, -1), shifted(c, a, 1));
                let flux_p = self.h.get(p) * dq_star.get(p)[mom(a)];
                let flux_m = self.h.get(m) * dq_star.get(m)[mom(a)];
                r -= self.tau / (2.0 * grid.spacing(a)) * (flux_p - flux_m);
            }
            rhs.set(c, r);
        }
        rhs
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn enthalpy(&self) -> &ScalarField {
        &self.h
    }

    /// Deviation right-hand side on interior cells.
    pub fn rhs(&self) -> &ScalarField {
        &self.rhs
    }

    /// Right-hand side of the full-pressure form, `p_eq/(gamma-1) + rhs`.
    pub fn rhs_full(&self) -> ScalarField {
        let mut out = self.rhs.clone();
        for c in self.grid.interior() {
            out.set(c, self.rhs.get(c) + self.p_eq.get(c) / (self.gamma - 1.0));
        }
        out
    }

    /// Scatters interior values into a field and fills its ghosts. With
    /// `homogeneous` the exact sides get zero instead of the boundary data.
    pub fn extend(&self, interior: &[f64], homogeneous: bool) -> ScalarField {
        let mut x = ScalarField::filled(&self.grid, 0.0);
        for (c, v) in self.grid.interior().zip(interior) {
            x.set(c, *v);
        }
        self.boundary.fill_scalar(&mut x, |c| if homogeneous { 0.0 } else { self.dirichlet.get(c) });
        x
    }

    /// Applies the stencil to a pressure deviation with filled ghosts.
    pub fn apply_field(&self, x: &ScalarField) -> ScalarField {
        let grid = &self.grid;
        let mut out = ScalarField::filled(grid, 0.0);
        let inv = 1.0 / (self.gamma - 1.0);
        for c in grid.interior() {
            let adv = self.adv.get(c);
            let mut v = x.get(c) * inv;
            for a in 0..grid.dim() {
                let diff = x.get(shifted(c, a, 1)) - x.get(shifted(c, a, -1));
                v -= self.tau / (2.0 * grid.spacing(a)) * adv[a] * diff;
            }
            v -= self.tau * self.tau * laplacian_at(x, &self.h, grid, c);
            out.set(c, v);
        }
        out
    }

    /// Linear operator on interior vectors with homogeneous boundary data.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let ext = self.extend(x, true);
        let y = self.apply_field(&ext);
        for (o, c) in out.iter_mut().zip(self.grid.interior()) {
            *o = y.get(c);
        }
    }

    /// Left-hand side in full-pressure form: `p/(gamma-1)` minus the
    /// advective and enthalpy terms acting on `p - p_eq`. Ghosts of `p` are
    /// ignored and rebuilt from the boundary conditions.
    pub fn apply_pressure(&self, p: &ScalarField) -> ScalarField {
        let dev: Vec<f64> = self.grid.interior().map(|c| p.get(c) - self.p_eq.get(c)).collect();
        let x = self.extend(&dev, false);
        let mut out = self.apply_field(&x);
        for c in self.grid.interior() {
            out.set(c, out.get(c) + self.p_eq.get(c) / (self.gamma - 1.0));
        }
        out
    }

    /// Right-hand side of the homogeneous problem: boundary contributions
    /// moved to the right.
    fn reduced_rhs(&self) -> Vec<f64> {
        let zero = vec![0.0; self.grid.interior_len()];
        let lift = self.apply_field(&self.extend(&zero, false));
        self.grid.interior().map(|c| self.rhs.get(c) - lift.get(c)).collect()
    }

    /// Solves for the pressure deviation. Returns it with filled ghosts.
    pub fn solve(&self, guess: &ScalarField, settings: &KrylovSettings) -> (ScalarField, KrylovReport) {
        let b = self.reduced_rhs();
        let mut x: Vec<f64> = self.grid.interior().map(|c| guess.get(c)).collect();
        let report = gmres(|v, out| self.apply(v, out), &b, &mut x, settings);
        (self.extend(&x, false), report)
    }
}

fn at_cell(e: crate::error::Error, cell: [isize; 3]) -> crate::error::Error {
    match e {
        crate::error::Error::InvalidState { what, .. } => crate::error::Error::Inadmissible { cell, what },
        other => other,
    }
}

/// `(d rho v_a) -= tau/(2 d_a) (x[+1] - x[-1])` on interior cells.
pub fn momentum_update(dq: &mut FieldSet, x: &ScalarField, tau: f64) {
    let grid = dq.grid().clone();
    for c in grid.interior() {
        for a in 0..grid.dim() {
            let diff = x.get(shifted(c, a, 1)) - x.get(shifted(c, a, -1));
            dq.at_mut(c)[mom(a)] -= tau / (2.0 * grid.spacing(a)) * diff;
        }
    }
}

/// `(d rho E) -= tau/(2 d_a) [(h rho v_a)[+1] - (h rho v_a)[-1]]` on
/// interior cells, using the updated momenta (ghosts filled).
pub fn energy_update(dq: &mut FieldSet, h: &ScalarField, tau: f64) {
    let grid = dq.grid().clone();
    let mut delta = vec![0.0; grid.interior_len()];
    for (k, c) in grid.interior().enumerate() {
        for a in 0..grid.dim() {
            let (m, p) = (shifted(c, a, -1), shifted(c, a, 1));
            let fp = h.get(p) * dq.get(p)[mom(a)];
            let fm = h.get(m) * dq.get(m)[mom(a)];
            delta[k] -= tau / (2.0 * grid.spacing(a)) * (fp - fm);
        }
    }
    for (c, d) in grid.interior().zip(delta) {
        dq.at_mut(c)[ENERGY] += d;
    }
}

/// Pressure deviation of every stored cell of a deviation field.
pub fn pressure_deviation(disc: &Discretization, dq: &FieldSet) -> ScalarField {
    ScalarField::from_fn(&disc.grid, |c| disc.equilibrium.pressure_deviation(dq, c, &disc.eos))
}

/// Result of one implicit stage.
#[derive(Debug, Clone)]
pub struct ImplicitOutcome {
    pub dq: FieldSet,
    pub pressure: ScalarField,
    pub report: KrylovReport,
}

/// Full implicit sub-step: solve, then momentum and energy updates.
///
/// `dq_star` and `dq_e` must have filled ghosts. The pressure of `dq_e`
/// seeds the Krylov iteration. The returned field has filled ghosts.
pub fn implicit_stage(
    disc: &Discretization,
    boundary: &Boundary,
    dq_star: &FieldSet,
    dq_e: &FieldSet,
    tau: f64,
    settings: &KrylovSettings,
) -> Result<ImplicitOutcome> {
    let sys = PressureSystem::new(disc, boundary, dq_star, dq_e, tau)?;
    let guess = pressure_deviation(disc, dq_e);
    let (x, report) = sys.solve(&guess, settings);
    let mut dq = dq_star.clone();
    momentum_update(&mut dq, &x, tau);
    boundary.fill(&mut dq);
    energy_update(&mut dq, &sys.h, tau);
    boundary.fill(&mut dq);
    Ok(ImplicitOutcome { dq, pressure: x, report })
}
