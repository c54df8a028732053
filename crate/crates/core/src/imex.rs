//! Time integration: the first-order semi-implicit step and the two-stage
//! IMEX Runge-Kutta step, plus the driver loop with per-step diagnostics.

use alloc::vec::Vec;

use crate::boundary::Boundary;
use crate::ct::{self, StaggeredB};
use crate::error::{Error, Result};
use crate::explicit::{Discretization, Order};
use crate::grid::{FieldSet, Grid};
use crate::implicit::implicit_stage;
use crate::krylov::{KrylovReport, KrylovSettings};
use crate::math::sqrt;
use crate::problems::ProblemSpec;
use crate::state::{ConservedState, NVAR};

/// Paired explicit/implicit Butcher tableaux with two stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButcherPair {
    pub a_hat: [[f64; 2]; 2],
    pub b_hat: [f64; 2],
    pub c_hat: [f64; 2],
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
}

impl ButcherPair {
    /// The L-stable, stiffly accurate LSDIRK2(2,2,2) pair.
    pub fn lsdirk2() -> Self {
        let g = 1.0 - 1.0 / sqrt(2.0);
        let beta = 1.0 / (2.0 * g);
        Self {
            a_hat: [[0.0, 0.0], [beta, 0.0]],
            b_hat: [1.0 - g, g],
            c_hat: [0.0, beta],
            a: [[g, 0.0], [1.0 - g, g]],
            b: [1.0 - g, g],
            c: [g, 1.0],
        }
    }
}

/// Deviation state: cell averages with filled ghosts and, in more than one
/// dimension, face-normal field deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub dq: FieldSet,
    pub faces: StaggeredB,
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub cfl: f64,
    pub order: Order,
    pub krylov: KrylovSettings,
    /// Time-step cap; `None` takes the problem's value.
    pub dt_max: Option<f64>,
    pub n_ghost: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { cfl: 0.9, order: Order::Second, krylov: KrylovSettings::default(), dt_max: None, n_ghost: 2 }
    }
}

/// Summary of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Largest `|div B|` of the full staggered field after the step.
    pub max_div_b: f64,
    /// Krylov iterations summed over the stages of the step.
    pub krylov_iterations: usize,
    /// Largest relative Krylov residual over the stages.
    pub krylov_residual: f64,
    pub totals: Totals,
}

/// Volume-integrated conserved quantities of the interior.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub b: [f64; 3],
    pub kinetic_energy: f64,
}

/// Stage bookkeeping: the new state and the Krylov report of its solve.
struct StageResult {
    dq: FieldSet,
    faces: StaggeredB,
    report: KrylovReport,
}

/// A problem bound to a grid and a scheme configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    disc: Discretization,
    boundary: Boundary,
    eq_faces: StaggeredB,
    initial: FieldSet,
    initial_faces: StaggeredB,
    config: SolverConfig,
    dt_max: f64,
}

impl Solver {
    pub fn new(spec: &ProblemSpec, config: SolverConfig) -> Result<Self> {
        if !(config.cfl > 0.0 && config.cfl <= 1.0) {
            return Err(Error::InvalidParameter { name: "cfl", value: config.cfl });
        }
        let grid = spec.grid(config.n_ghost)?;
        let disc = Discretization::new(grid.clone(), spec.eos, config.order, &spec.equilibrium, &spec.gravity)?;
        let initial = FieldSet::from_fn(&grid, |c| {
            spec.initial_conserved(grid.cell_center(c)) - disc.equilibrium.center(c)
        });
        let boundary = Boundary::new(spec.boundaries, &grid, Some(initial.clone()))?;
        let eq_faces = StaggeredB::from_fn(&grid, |a, f| {
            spec.equilibrium.point(grid.face_center(a, f)).map_or(0.0, |p| p.b[a])
        });
        let initial_faces = StaggeredB::from_fn(&grid, |a, f| {
            spec.initial_primitive(grid.face_center(a, f)).b[a]
        })
        .add_scaled(-1.0, &eq_faces);
        let dt_max = config.dt_max.unwrap_or(spec.dt_max);
        Ok(Self { disc, boundary, eq_faces, initial, initial_faces, config, dt_max })
    }

    pub fn grid(&self) -> &Grid {
        &self.disc.grid
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    /// Initial deviation, with cell field components synchronised to the
    /// face averages on staggered axes and ghosts filled.
    pub fn initial_state(&self) -> SolverState {
        let mut dq = self.initial.clone();
        ct::sync_cell_field(&mut dq, &self.initial_faces);
        self.boundary.fill(&mut dq);
        SolverState { t: 0.0, dq, faces: self.initial_faces.clone() }
    }

    /// Recomposed physical state `dq + q_eq` at every stored cell.
    pub fn physical(&self, state: &SolverState) -> FieldSet {
        let grid = &self.disc.grid;
        FieldSet::from_fn(grid, |c| self.disc.equilibrium.recompose_at(&state.dq, c))
    }

    /// Full face field `dB + B_eq`.
    pub fn full_faces(&self, state: &SolverState) -> StaggeredB {
        state.faces.add_scaled(1.0, &self.eq_faces)
    }

    pub fn max_div_b(&self, state: &SolverState) -> f64 {
        ct::max_div_b(&self.full_faces(state), &self.disc.grid)
    }

    pub fn totals(&self, state: &SolverState) -> Totals {
        let grid = &self.disc.grid;
        let vol = grid.cell_volume();
        let mut t = Totals::default();
        for c in grid.interior() {
            let q = self.disc.equilibrium.recompose_at(&state.dq, c);
            t.mass += q.rho() * vol;
            for a in 0..3 {
                t.momentum[a] += q.momentum()[a] * vol;
                t.b[a] += q.b()[a] * vol;
            }
            t.energy += q.energy() * vol;
            t.kinetic_energy += q.kinetic_energy() * vol;
        }
        t
    }

    /// Convective time step of the current state, capped at `dt_max`.
    pub fn cfl_dt(&self, state: &SolverState) -> Result<f64> {
        self.disc.cfl_dt(&state.dq, self.config.cfl, self.dt_max)
    }

    /// One implicit stage from the explicit evaluation state `e` and the
    /// implicit base `base`, with implicit weight `tau`.
    fn stage(&self, e: (&FieldSet, &StaggeredB), base: (&FieldSet, &StaggeredB), tau: f64) -> Result<StageResult> {
        let tend = self.disc.tendency(e.0)?;
        let grid = &self.disc.grid;
        let mut star = base.0.clone();
        for c in grid.interior() {
            star.set(c, base.0.get(c) + tau * tend.cell.get(c));
        }
        let faces = base.1.add_scaled(tau, &tend.faces);
        ct::sync_cell_field(&mut star, &faces);
        self.boundary.fill(&mut star);
        let out = implicit_stage(&self.disc, &self.boundary, &star, e.0, tau, &self.config.krylov)?;
        Ok(StageResult { dq: out.dq, faces, report: out.report })
    }

    /// First-order step: explicit update, transport of the face field,
    /// pressure solve, momentum and energy updates.
    pub fn step_first_order(&self, state: &SolverState, dt: f64) -> Result<(SolverState, Vec<KrylovReport>)> {
        let s = self.stage((&state.dq, &state.faces), (&state.dq, &state.faces), dt)?;
        Ok((SolverState { t: state.t + dt, dq: s.dq, faces: s.faces }, alloc::vec![s.report]))
    }

    /// Two-stage IMEX step. Stage tendencies are recovered as
    /// `(Q_i - q_I^i) / (dt a_ii)` and combined with the weights `b`.
    pub fn step_imex2(&self, state: &SolverState, dt: f64) -> Result<(SolverState, Vec<KrylovReport>)> {
        let bt = ButcherPair::lsdirk2();
        let grid = &self.disc.grid;
        let (qn, fn_) = (&state.dq, &state.faces);

        let tau1 = dt * bt.a[0][0];
        let s1 = self.stage((qn, fn_), (qn, fn_), tau1)?;
        let k1 = cell_rate(&s1.dq, qn, tau1, grid);
        let k1f = s1.faces.rate_from(fn_, tau1);

        let (qe, fe) = self.advance(qn, fn_, &[(dt * bt.a_hat[1][0], &k1, &k1f)]);
        let (qi, fi) = self.advance(qn, fn_, &[(dt * bt.a[1][0], &k1, &k1f)]);
        let tau2 = dt * bt.a[1][1];
        let s2 = self.stage((&qe, &fe), (&qi, &fi), tau2)?;
        let k2 = cell_rate(&s2.dq, &qi, tau2, grid);
        let k2f = s2.faces.rate_from(&fi, tau2);

        let (dq, faces) = self.advance(qn, fn_, &[(dt * bt.b[0], &k1, &k1f), (dt * bt.b[1], &k2, &k2f)]);
        Ok((SolverState { t: state.t + dt, dq, faces }, alloc::vec![s1.report, s2.report]))
    }

    /// `q + sum w_i k_i` on interior cells and faces, ghosts refilled.
    fn advance(&self, q: &FieldSet, f: &StaggeredB, terms: &[(f64, &FieldSet, &StaggeredB)]) -> (FieldSet, StaggeredB) {
        let grid = &self.disc.grid;
        let mut out = q.clone();
        for c in grid.interior() {
            let mut v = q.get(c);
            for (w, k, _) in terms {
                v += *w * k.get(c);
            }
            out.set(c, v);
        }
        let mut faces = f.clone();
        for (w, _, kf) in terms {
            faces = faces.add_scaled(*w, kf);
        }
        ct::sync_cell_field(&mut out, &faces);
        self.boundary.fill(&mut out);
        (out, faces)
    }

    /// One step of the configured order.
    pub fn step(&self, state: &SolverState, dt: f64) -> Result<(SolverState, Vec<KrylovReport>)> {
        match self.config.order {
            Order::First => self.step_first_order(state, dt),
            Order::Second => self.step_imex2(state, dt),
        }
    }

    /// Advances to `t_end`, calling `observe` after every step. Steps are
    /// clamped so the final time is hit exactly.
    pub fn run(
        &self,
        mut state: SolverState,
        t_end: f64,
        mut observe: impl FnMut(&StepRecord, &SolverState),
    ) -> Result<SolverState> {
        let mut step = 0;
        while state.t < t_end {
            let dt = self.cfl_dt(&state).map_err(|e| with_step(e, step + 1))?.min(t_end - state.t);
            step += 1;
            let (mut next, reports) = self.step(&state, dt).map_err(|e| with_step(e, step))?;
            if let Some(bad) = reports.iter().find(|r| !r.converged) {
                return Err(Error::SolverFailed { step, report: bad.clone() });
            }
            if let Some(cell) = self.grid().interior().find(|&c| !next.dq.get(c).is_finite()) {
                return Err(Error::NonFinite { step, cell });
            }
            if t_end - next.t <= 4.0 * f64::EPSILON * t_end.abs() {
                next.t = t_end;
            }
            let record = StepRecord {
                step,
                t: next.t,
                dt,
                max_div_b: self.max_div_b(&next),
                krylov_iterations: reports.iter().map(|r| r.iterations).sum(),
                krylov_residual: reports.iter().map(|r| r.residual).fold(0.0, f64::max),
                totals: self.totals(&next),
            };
            observe(&record, &next);
            state = next;
        }
        Ok(state)
    }
}

fn cell_rate(q: &FieldSet, base: &FieldSet, tau: f64, grid: &Grid) -> FieldSet {
    let mut k = FieldSet::filled(grid, ConservedState::ZERO);
    for c in grid.interior() {
        let mut r = q.get(c) - base.get(c);
        for i in 0..NVAR {
            r[i] /= tau;
        }
        k.set(c, r);
    }
    k
}

fn with_step(e: Error, step: usize) -> Error {
    match e {
        Error::SolverFailed { report, .. } => Error::SolverFailed { step, report },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_sanity() {
        let bt = ButcherPair::lsdirk2();
        let g = 1.0 - 1.0 / 2f64.sqrt();
        assert!((bt.b[0] + bt.b[1] - 1.0).abs() < 1e-15);
        assert!((bt.a[1][0] + bt.a[1][1] - 1.0).abs() < 1e-15);
        assert_eq!(bt.b, bt.b_hat);
        assert_eq!(bt.a[1], bt.b);
        assert_eq!((bt.a[0][0], bt.a[1][1]), (g, g));
        assert_eq!(bt.a_hat[0], [0.0, 0.0]);
        assert_eq!(bt.a_hat[1][1], 0.0);
        assert!((bt.a_hat[1][0] * 2.0 * g - 1.0).abs() < 1e-15);
        assert!((bt.c[1] - 1.0).abs() < 1e-15);
    }

    /// The pair applied to `y' = lE y + lI y` with the same stage recipe as
    /// the solver.
    fn ode_step(y: f64, dt: f64, le: f64, li: f64) -> f64 {
        let bt = ButcherPair::lsdirk2();
        let stage = |ye: f64, yi: f64, tau: f64| (yi + tau * le * ye) / (1.0 - tau * li);
        let tau = dt * bt.a[0][0];
        let q1 = stage(y, y, tau);
        let k1 = (q1 - y) / tau;
        let ye = y + dt * bt.a_hat[1][0] * k1;
        let yi = y + dt * bt.a[1][0] * k1;
        let q2 = stage(ye, yi, tau);
        let k2 = (q2 - yi) / tau;
        y + dt * (bt.b[0] * k1 + bt.b[1] * k2)
    }

    #[test]
    fn ode_embedding_is_second_order() {
        let (le, li) = (-0.7f64, -3.0);
        let exact = (le + li).exp();
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut y = 1.0;
            for _ in 0..n {
                y = ode_step(y, dt, le, li);
            }
            (y - exact).abs()
        };
        let errs: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| err(n)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9 && order < 2.2, "order {order}");
        }
    }

    #[test]
    fn ode_embedding_is_stiffly_accurate() {
        // With a stiff implicit part the step damps to zero.
        let y = ode_step(1.0, 1.0, 0.0, -1e12);
        assert!(y.abs() < 1e-10);
    }
}
