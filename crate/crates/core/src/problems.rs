//! Built-in test problems: initial data, equilibria, gravity, boundaries
//! and end times.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

pub use crate::boundary::{fill_ghosts_with, BcKind, Boundaries, Boundary};
use crate::error::{Error, Result};
use crate::grid::{FieldSet, Grid};
use crate::math::{cos, exp, ln, sin, sqrt};
use crate::physics::Gravity;
use crate::state::{prim_to_cons, ConservedState, Eos, PrimitiveState};
use crate::wellbalance::{mhse_residual, EquilibriumPoint, EquilibriumProfile};

type InitialFn = Arc<dyn Fn([f64; 3]) -> PrimitiveState + Send + Sync>;

/// A complete problem definition.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    pub cells: [usize; 3],
    pub bounds: [(f64, f64); 3],
    pub eos: Eos,
    pub gravity: Gravity,
    initial: InitialFn,
    pub equilibrium: EquilibriumProfile,
    pub boundaries: Boundaries,
    pub t_end: f64,
    /// Time-step cap for states without convective motion.
    pub dt_max: f64,
    /// Amplitude of the pressure perturbation, where the problem has one.
    pub eta: f64,
    /// Peak Mach number, for the vortex.
    pub mach_max: Option<f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("cells", &self.cells)
            .field("equilibrium", &self.equilibrium)
            .field("boundaries", &self.boundaries)
            .field("t_end", &self.t_end)
            .finish_non_exhaustive()
    }
}

/// Problem names accepted by [`by_name`].
pub const NAMES: [&str; 5] = ["sod_gravity", "gss1d", "isothermal2d", "mhd2d", "low_mach_vortex"];

impl ProblemSpec {
    /// Builds a problem from its parts. The initial condition is a
    /// primitive state at a point.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        cells: [usize; 3],
        bounds: [(f64, f64); 3],
        eos: Eos,
        gravity: Gravity,
        initial: impl Fn([f64; 3]) -> PrimitiveState + Send + Sync + 'static,
        equilibrium: EquilibriumProfile,
        boundaries: Boundaries,
        t_end: f64,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            cells,
            bounds,
            eos,
            gravity,
            initial: Arc::new(initial),
            equilibrium,
            boundaries,
            t_end,
            dt_max: 0.1 * (bounds[0].1 - bounds[0].0),
            eta: 0.0,
            mach_max: None,
        }
    }

    pub fn grid(&self, n_ghost: usize) -> Result<Grid> {
        Grid::new(self.dim, &self.cells, &self.bounds, n_ghost)
    }

    /// Same problem with `n` cells on every active axis.
    pub fn with_cells(mut self, n: usize) -> Self {
        for a in 0..self.dim {
            self.cells[a] = n;
        }
        self
    }

    /// Same problem without well-balancing (trivial equilibrium).
    pub fn without_well_balancing(mut self) -> Self {
        self.equilibrium = EquilibriumProfile::trivial();
        self
    }

    pub fn initial_primitive(&self, x: [f64; 3]) -> PrimitiveState {
        (self.initial)(x)
    }

    pub fn initial_conserved(&self, x: [f64; 3]) -> ConservedState {
        prim_to_cons(&(self.initial)(x), &self.eos)
    }

    /// Initial condition sampled at every stored cell centre.
    pub fn initial_field(&self, grid: &Grid) -> FieldSet {
        FieldSet::from_fn(grid, |c| self.initial_conserved(grid.cell_center(c)))
    }

    /// Checks that a non-trivial equilibrium satisfies the force balance:
    /// the residual must either be at roundoff level or drop by at least a
    /// factor three when the grid is refined.
    pub fn check_equilibrium(&self) -> Result<()> {
        if self.equilibrium.is_trivial() {
            return Ok(());
        }
        let coarse_grid = self.grid(2)?;
        let fine_grid = self.clone().with_cells(2 * self.cells[0]).grid(2)?;
        let coarse = mhse_residual(&self.equilibrium, &coarse_grid, &self.eos, &self.gravity);
        let fine = mhse_residual(&self.equilibrium, &fine_grid, &self.eos, &self.gravity);
        let scale = equilibrium_scale(self, &coarse_grid);
        if fine <= 1e-10 * scale || fine * 3.0 <= coarse {
            Ok(())
        } else {
            Err(Error::NotInEquilibrium { coarse, fine })
        }
    }
}

fn equilibrium_scale(spec: &ProblemSpec, grid: &Grid) -> f64 {
    grid.interior()
        .filter_map(|c| spec.equilibrium.point(grid.cell_center(c)))
        .map(|p| p.p.abs().max(p.rho.abs()))
        .fold(1.0, f64::max)
        / grid.min_spacing()
}

fn at_rest(rho: f64, p: f64) -> PrimitiveState {
    PrimitiveState { rho, vel: [0.0; 3], p, b: [0.0; 3] }
}

/// Sod shock tube under constant gravity `g_x = -1`, reflecting walls.
pub fn sod_gravity() -> ProblemSpec {
    let mut spec = ProblemSpec::new(
        "sod_gravity",
        1,
        [100, 1, 1],
        [(0.0, 1.0); 3],
        Eos::default(),
        Gravity::constant([-1.0, 0.0, 0.0]),
        |x| if x[0] < 0.5 { at_rest(1.0, 1.0) } else { at_rest(0.125, 0.1) },
        EquilibriumProfile::trivial(),
        Boundaries::uniform(BcKind::Wall),
        0.2,
    );
    spec.dt_max = SOD_DT_MAX;
    spec
}

/// Cap on the Sod time step: the flow starts at rest, so the first steps
/// are limited by this value alone.
pub const SOD_DT_MAX: f64 = 1e-3;

fn gss_point(x: [f64; 3]) -> EquilibriumPoint {
    let t = 2.0 * PI * x[0];
    EquilibriumPoint { rho: 3.0 + 2.0 * sin(t), p: 3.0 + 3.0 * sin(t) - 0.5 * cos(2.0 * t), b: [0.0; 3] }
}

/// Cap on the time step of the 1D steady state. The convective speed is
/// zero or tiny throughout, so this value sets every step.
pub const GSS_DT_MAX: f64 = 1e-3;

/// Smooth periodic hydrostatic state in 1D. Well-balanced against itself;
/// call [`ProblemSpec::without_well_balancing`] for the plain scheme.
pub fn general_steady_state_1d() -> ProblemSpec {
    let mut spec = ProblemSpec::new(
        "gss1d",
        1,
        [40, 1, 1],
        [(0.0, 1.0); 3],
        Eos::default(),
        Gravity::new(|x| [2.0 * PI * cos(2.0 * PI * x[0]), 0.0, 0.0]),
        |x| gss_point(x).primitive(),
        EquilibriumProfile::new("gss1d", gss_point),
        Boundaries::uniform(BcKind::Periodic),
        1.0,
    );
    spec.dt_max = GSS_DT_MAX;
    spec
}

fn isothermal_point(x: [f64; 3]) -> EquilibriumPoint {
    let e = exp(-1.21 * (x[0] + x[1]));
    EquilibriumPoint { rho: 1.21 * e, p: e, b: [0.0; 3] }
}

fn bump(eta: f64, width: f64, x: [f64; 3]) -> f64 {
    eta * exp(-width * ((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5)))
}

/// Isothermal atmosphere in 2D with gravity `(-1, -1)` and a Gaussian
/// pressure perturbation of amplitude `eta` (zero for the pure
/// equilibrium).
pub fn isothermal_atmosphere_2d(eta: f64) -> ProblemSpec {
    let mut spec = ProblemSpec::new(
        "isothermal2d",
        2,
        [64, 64, 1],
        [(0.0, 1.0); 3],
        Eos::default(),
        Gravity::constant([-1.0, -1.0, 0.0]),
        move |x| {
            let mut w = isothermal_point(x).primitive();
            w.p += bump(eta, 121.0, x);
            w
        },
        EquilibriumProfile::new("isothermal2d", isothermal_point),
        Boundaries::uniform(BcKind::ExactInitial),
        1.0,
    );
    spec.eta = eta;
    spec
}

fn mhd_point(x: [f64; 3]) -> EquilibriumPoint {
    let s = x[0] + x[1];
    let h = exp(-0.5 * s);
    EquilibriumPoint { rho: 2.21 * exp(-s), p: 1.21 * exp(-s), b: [h, -h, 0.0] }
}

/// Magnetohydrostatic state in 2D, balanced only with unit permeability,
/// with an optional pressure perturbation of amplitude `eta`.
pub fn mhd_steady_state_2d(eta: f64) -> ProblemSpec {
    let mut spec = ProblemSpec::new(
        "mhd2d",
        2,
        [64, 64, 1],
        [(0.0, 1.0); 3],
        Eos::new(1.4, 1.0).unwrap(),
        Gravity::constant([-1.0, -1.0, 0.0]),
        move |x| {
            let mut w = mhd_point(x).primitive();
            w.p += bump(eta, 100.0, x);
            w
        },
        EquilibriumProfile::new("mhd2d", mhd_point),
        Boundaries::uniform(BcKind::ExactInitial),
        1.0,
    );
    spec.eta = eta;
    spec
}

/// Vortex centre.
pub const VORTEX_CENTER: [f64; 2] = [0.5, 0.5];
/// Radius of peak speed; the vortex vanishes beyond twice this radius.
pub const VORTEX_RADIUS: f64 = 0.2;

fn vortex_f(s: f64) -> f64 {
    4.0 * ln(s) - 20.0 * s + 12.5 * s * s
}

/// Swirl speed of the piecewise-linear vortex (peak 1 at r = 0.2).
pub fn vortex_speed(r: f64) -> f64 {
    if r < 0.2 {
        5.0 * r
    } else if r < 0.4 {
        2.0 - 5.0 * r
    } else {
        0.0
    }
}

/// Pressure excess balancing the centrifugal force, zero for `r >= 0.4`.
pub fn vortex_pressure(r: f64) -> f64 {
    if r < 0.2 {
        12.5 * r * r - 0.5 + vortex_f(0.2) - vortex_f(0.4)
    } else if r < 0.4 {
        vortex_f(r) - vortex_f(0.4)
    } else {
        0.0
    }
}

/// Rotating vortex at unit density on top of a background held by a
/// central gravity field `g = -(x - x_c)`. The background pressure sets the
/// sound speed so that the local Mach number at peak speed is `mach_max`.
pub fn low_mach_vortex(mach_max: f64) -> Result<ProblemSpec> {
    if !(mach_max > 0.0 && mach_max.is_finite()) {
        return Err(Error::InvalidParameter { name: "mach_max", value: mach_max });
    }
    let eos = Eos::default();
    let r0 = VORTEX_RADIUS;
    // gamma p(r0) / rho = 1 / M^2 with p = p0 - r^2/2 + dp(r).
    let p0 = 1.0 / (eos.gamma * mach_max * mach_max) + 0.5 * r0 * r0 - vortex_pressure(r0);
    let [xc, yc] = VORTEX_CENTER;
    let background = move |x: [f64; 3]| {
        let r2 = (x[0] - xc) * (x[0] - xc) + (x[1] - yc) * (x[1] - yc);
        EquilibriumPoint { rho: 1.0, p: p0 - 0.5 * r2, b: [0.0; 3] }
    };
    let mut spec = ProblemSpec::new(
        "low_mach_vortex",
        2,
        [40, 40, 1],
        [(0.0, 1.0); 3],
        eos,
        Gravity::new(move |x| [-(x[0] - xc), -(x[1] - yc), 0.0]),
        move |x| {
            let (dx, dy) = (x[0] - xc, x[1] - yc);
            let r = sqrt(dx * dx + dy * dy);
            let mut w = background(x).primitive();
            w.p += vortex_pressure(r);
            if r > 0.0 {
                let s = vortex_speed(r) / r;
                w.vel = [-s * dy, s * dx, 0.0];
            }
            w
        },
        EquilibriumProfile::new("vortex_background", background),
        Boundaries::uniform(BcKind::ExactInitial),
        1.26,
    );
    spec.mach_max = Some(mach_max);
    Ok(spec)
}

/// Looks a problem up by name. `eta` feeds the perturbed equilibria,
/// `mach_max` the vortex.
pub fn by_name(name: &str, eta: Option<f64>, mach_max: Option<f64>) -> Result<ProblemSpec> {
    match name {
        "sod_gravity" => Ok(sod_gravity()),
        "gss1d" => Ok(general_steady_state_1d()),
        "isothermal2d" => Ok(isothermal_atmosphere_2d(eta.unwrap_or(0.0))),
        "mhd2d" => Ok(mhd_steady_state_2d(eta.unwrap_or(0.0))),
        "low_mach_vortex" => low_mach_vortex(mach_max.unwrap_or(1e-2)),
        _ => Err(Error::Unknown(format!("problem '{name}'; known: {}", NAMES.join(", ")).to_string())),
    }
}

/// Fills the ghost layers of a deviation field for `spec` on its grid.
pub fn fill_ghosts(dq: &mut FieldSet, spec: &ProblemSpec) -> Result<()> {
    let grid = dq.grid().clone();
    let eq = &spec.equilibrium;
    let init = FieldSet::from_fn(&grid, |c| {
        let x = grid.cell_center(c);
        spec.initial_conserved(x) - eq.conserved(x, &spec.eos)
    });
    Boundary::new(spec.boundaries, &grid, Some(init))?.fill(dq);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{mom, RHO};

    #[test]
    fn sod_data() {
        let s = sod_gravity();
        assert_eq!(s.initial_primitive([0.25, 0.0, 0.0]).rho, 1.0);
        assert_eq!(s.initial_primitive([0.75, 0.0, 0.0]).rho, 0.125);
        assert_eq!(s.initial_primitive([0.75, 0.0, 0.0]).p, 0.1);
        assert!(s.equilibrium.is_trivial());
        assert_eq!((s.cells[0], s.t_end), (100, 0.2));
        s.check_equilibrium().unwrap();
    }

    #[test]
    fn gss_data() {
        let s = general_steady_state_1d();
        assert!((s.initial_primitive([0.25, 0.0, 0.0]).rho - 5.0).abs() < 1e-15);
        // dp/dx = rho g_x analytically.
        for x in [0.1, 0.37, 0.8] {
            let dpdx = 6.0 * PI * cos(2.0 * PI * x) + 2.0 * PI * sin(4.0 * PI * x);
            let rg = s.initial_primitive([x, 0.0, 0.0]).rho * s.gravity.at([x, 0.0, 0.0])[0];
            assert!((dpdx - rg).abs() < 1e-13);
        }
        s.check_equilibrium().unwrap();
        assert!(s.clone().without_well_balancing().equilibrium.is_trivial());
    }

    #[test]
    fn isothermal_data() {
        let s = isothermal_atmosphere_2d(1e-3);
        let c = s.initial_primitive([0.5, 0.5, 0.0]);
        let eq = s.equilibrium.point([0.5, 0.5, 0.0]).unwrap();
        assert!((c.p - eq.p - 1e-3).abs() < 1e-16);
        isothermal_atmosphere_2d(0.0).check_equilibrium().unwrap();
    }

    #[test]
    fn mhd_data() {
        let s = mhd_steady_state_2d(0.0);
        s.check_equilibrium().unwrap();
        let mut gauss = s.clone();
        gauss.eos = Eos::new(1.4, 4.0 * PI).unwrap();
        assert!(matches!(gauss.check_equilibrium(), Err(Error::NotInEquilibrium { .. })));
        // Face-sampled field: discrete divergence at roundoff.
        let grid = s.grid(2).unwrap();
        let faces = crate::ct::StaggeredB::from_fn(&grid, |a, f| s.initial_primitive(grid.face_center(a, f)).b[a]);
        assert!(crate::ct::max_div_b(&faces, &grid) < 1e-12);
    }

    #[test]
    fn vortex_data() {
        let m = 1e-2;
        let s = low_mach_vortex(m).unwrap();
        s.check_equilibrium().unwrap();
        let grid = s.grid(2).unwrap();
        let mut peak = 0.0f64;
        for c in grid.interior() {
            let x = grid.cell_center(c);
            let w = s.initial_primitive(x);
            let speed = (w.vel[0] * w.vel[0] + w.vel[1] * w.vel[1]).sqrt();
            let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
            if r >= 0.4 {
                assert_eq!(speed, 0.0);
            }
            peak = peak.max(speed / (s.eos.gamma * w.p / w.rho).sqrt());
        }
        assert!(peak <= m * (1.0 + 1e-3) && peak > 0.9 * m, "peak Mach {peak}");
        // Exactly at the peak radius the Mach number is the target.
        let w = s.initial_primitive([0.7, 0.5, 0.0]);
        assert!((1.0 / (s.eos.gamma * w.p).sqrt() - m).abs() < 1e-12);
        // Continuity of the pressure excess at the kink and at the edge.
        assert!((vortex_pressure(0.2 - 1e-12) - vortex_pressure(0.2 + 1e-12)).abs() < 1e-9);
        assert!(vortex_pressure(0.4 - 1e-12).abs() < 1e-9);
        assert!(low_mach_vortex(0.0).is_err());
    }

    #[test]
    fn vortex_balances_centrifugal_force() {
        for r in [0.05, 0.15, 0.25, 0.35] {
            let h = 1e-6;
            let dp = (vortex_pressure(r + h) - vortex_pressure(r - h)) / (2.0 * h);
            let v = vortex_speed(r);
            assert!((dp - v * v / r).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn registry() {
        for n in NAMES {
            assert_eq!(by_name(n, None, None).unwrap().name, n);
        }
        assert!(by_name("nope", None, None).is_err());
    }

    #[test]
    fn ghost_examples() {
        // Exact ghosts of the isothermal profile hold the analytic values.
        let s = isothermal_atmosphere_2d(0.0).without_well_balancing();
        let grid = s.clone().with_cells(8).grid(2).unwrap();
        let mut q = FieldSet::filled(&grid, ConservedState::ZERO);
        fill_ghosts(&mut q, &s).unwrap();
        let x = grid.cell_center([-1, 3, 0]);
        assert!((q.get([-1, 3, 0])[RHO] - 1.21 * exp(-1.21 * (x[0] + x[1]))).abs() < 1e-15);

        let sod = sod_gravity();
        let grid = sod.clone().with_cells(4).grid(2).unwrap();
        let mut q = FieldSet::filled(&grid, ConservedState::new(1.0, [0.3, 0.0, 0.0], 2.5, [0.0; 3]));
        fill_ghosts(&mut q, &sod).unwrap();
        assert!(q.get([-1, 0, 0])[mom(0)] < 0.0);
    }
}
