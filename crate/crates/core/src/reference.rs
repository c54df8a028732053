//! Plain explicit solver used to produce reference solutions: minmod
//! reconstruction of the conserved state, Rusanov flux bounded by the full
//! fast magnetosonic speed, pointwise gravity source and the two-stage
//! strong-stability-preserving Runge-Kutta method. Magnetic fields are
//! cell-centred with no divergence control.

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::explicit::minmod;
use crate::grid::{FieldSet, Grid};
use crate::physics::{flux_full, source, wave_speeds, Gravity};
use crate::problems::ProblemSpec;
use crate::state::{ConservedState, Eos, NVAR};

fn max_speed(q: &ConservedState, axis: usize, eos: &Eos) -> Result<f64> {
    let u = q.momentum()[axis] / q.rho();
    Ok(u.abs() + wave_speeds(q, axis, eos)?.c_f)
}

fn slope(q: &FieldSet, c: [isize; 3], axis: usize) -> ConservedState {
    let mut cm = c;
    cm[axis] -= 1;
    let mut cp = c;
    cp[axis] += 1;
    let (l, m, r) = (q.get(cm), q.get(c), q.get(cp));
    let mut s = ConservedState::ZERO;
    for v in 0..NVAR {
        s[v] = minmod(m[v] - l[v], r[v] - m[v]);
    }
    s
}

fn rusanov(ql: &ConservedState, qr: &ConservedState, axis: usize, eos: &Eos) -> Result<ConservedState> {
    let s = max_speed(ql, axis, eos)?.max(max_speed(qr, axis, eos)?);
    Ok(0.5 * (flux_full(ql, axis, eos) + flux_full(qr, axis, eos)) - (0.5 * s) * (*qr - *ql))
}

/// Reference solver for a problem; ignores the problem's equilibrium.
pub struct ReferenceSolver {
    grid: Grid,
    eos: Eos,
    gravity: Gravity,
    boundary: Boundary,
    cfl: f64,
}

impl ReferenceSolver {
    pub fn new(spec: &ProblemSpec, cells: usize, cfl: f64) -> Result<Self> {
        let grid = spec.clone().with_cells(cells).grid(2)?;
        let init = spec.initial_field(&grid);
        let boundary = Boundary::new(spec.boundaries, &grid, Some(init))?;
        Ok(Self { grid, eos: spec.eos, gravity: spec.gravity.clone(), boundary, cfl })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn rhs(&self, q: &FieldSet) -> Result<FieldSet> {
        let g = &self.grid;
        let mut out = FieldSet::filled(g, ConservedState::ZERO);
        for c in g.interior() {
            let x = g.cell_center(c);
            out.set(c, source(&q.get(c), self.gravity.at(x)));
        }
        for axis in 0..g.dim() {
            let inv = 1.0 / g.spacing(axis);
            for c in g.interior() {
                let mut faces = [ConservedState::ZERO; 2];
                for (k, f) in faces.iter_mut().enumerate() {
                    let mut left = c;
                    left[axis] += k as isize - 1;
                    let mut right = left;
                    right[axis] += 1;
                    let ql = q.get(left) + 0.5 * slope(q, left, axis);
                    let qr = q.get(right) - 0.5 * slope(q, right, axis);
                    *f = rusanov(&ql, &qr, axis, &self.eos)
                        .map_err(|_| Error::Inadmissible { cell: c, what: "reference state" })?;
                }
                let cur = out.get(c);
                out.set(c, cur - inv * (faces[1] - faces[0]));
            }
        }
        Ok(out)
    }

    fn dt(&self, q: &FieldSet, dt_max: f64) -> Result<f64> {
        let mut lambda = 0.0f64;
        for c in self.grid.interior() {
            for a in 0..self.grid.dim() {
                lambda = lambda.max(max_speed(&q.get(c), a, &self.eos)?);
            }
        }
        Ok((self.cfl * self.grid.min_spacing() / lambda).min(dt_max))
    }

    fn combine(&self, a: f64, x: &FieldSet, b: f64, y: &FieldSet, c: f64, r: &FieldSet) -> FieldSet {
        let mut out = x.clone();
        for i in self.grid.interior() {
            out.set(i, a * x.get(i) + b * y.get(i) + c * r.get(i));
        }
        self.boundary.fill(&mut out);
        out
    }

    /// Advances `q` (ghosts filled) to `t_end`.
    pub fn run(&self, mut q: FieldSet, t_end: f64) -> Result<FieldSet> {
        self.boundary.fill(&mut q);
        let mut t = 0.0;
        while t < t_end {
            let dt = self.dt(&q, t_end - t)?;
            let q1 = self.combine(1.0, &q, 0.0, &q, dt, &self.rhs(&q)?);
            let r1 = self.rhs(&q1)?;
            q = self.combine(0.5, &q, 0.5, &q1, 0.5 * dt, &r1);
            t += dt;
        }
        Ok(q)
    }

    /// Solves the problem from its initial condition.
    pub fn solve(&self, spec: &ProblemSpec, t_end: f64) -> Result<FieldSet> {
        self.run(spec.initial_field(&self.grid), t_end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::sod_gravity;
    use crate::state::RHO;

    #[test]
    fn sod_conserves_mass_and_stays_positive() {
        let spec = sod_gravity();
        let r = ReferenceSolver::new(&spec, 200, 0.4).unwrap();
        let q0 = spec.initial_field(r.grid());
        let q = r.solve(&spec, 0.2).unwrap();
        let mass = |q: &FieldSet| r.grid().interior().map(|c| q.get(c)[RHO]).sum::<f64>();
        assert!((mass(&q) - mass(&q0)).abs() < 1e-12 * mass(&q0));
        for c in r.grid().interior() {
            assert!(q.get(c)[RHO] > 0.0 && q.get(c).pressure(&spec.eos) > 0.0);
        }
        // Gravity pulls mass towards x = 0 compared with the free tube.
        let mut free = spec.clone();
        free.gravity = crate::physics::Gravity::none();
        let qf = ReferenceSolver::new(&free, 200, 0.4).unwrap().solve(&free, 0.2).unwrap();
        let left = |q: &FieldSet| r.grid().interior().filter(|c| c[0] < 100).map(|c| q.get(c)[RHO]).sum::<f64>();
        assert!(left(&q) > left(&qf));
    }
}
