//! Analytic magnetohydrostatic equilibria and deviation bookkeeping.
//!
//! The solver evolves `dq = q - q_eq` where `q_eq` is a static equilibrium
//! given in closed form. Profiles are evaluated both at cell centres and at
//! face centres; reconstructing the equilibrium instead would break the exact
//! cancellation of the face fluxes.

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use crate::grid::{BoxField, FieldSet, Grid};
use crate::physics::{flux_convective, FluxVector, Gravity};
use crate::state::{prim_to_cons, ConservedState, Eos, PrimitiveState};

/// Density, pressure and field of a static equilibrium at one point.
///
/// There is no velocity: only equilibria at rest are supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub rho: f64,
    pub p: f64,
    pub b: [f64; 3],
}

impl EquilibriumPoint {
    pub fn primitive(&self) -> PrimitiveState {
        PrimitiveState { rho: self.rho, vel: [0.0; 3], p: self.p, b: self.b }
    }
}

type Evaluator = Arc<dyn Fn([f64; 3]) -> EquilibriumPoint + Send + Sync>;

/// A time-independent equilibrium `q_eq(x)`, or the trivial profile
/// `q_eq = 0` which turns well-balancing off.
#[derive(Clone)]
pub struct EquilibriumProfile {
    name: String,
    eval: Option<Evaluator>,
}

impl EquilibriumProfile {
    pub fn trivial() -> Self {
        Self { name: String::from("none"), eval: None }
    }

    pub fn new(
        name: impl Into<String>,
        f: impl Fn([f64; 3]) -> EquilibriumPoint + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Some(Arc::new(f)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_trivial(&self) -> bool {
        self.eval.is_none()
    }

    /// Primitive equilibrium values, `None` for the trivial profile.
    pub fn point(&self, x: [f64; 3]) -> Option<EquilibriumPoint> {
        self.eval.as_ref().map(|f| f(x))
    }

    /// Conserved equilibrium state at `x` (zero for the trivial profile).
    pub fn conserved(&self, x: [f64; 3], eos: &Eos) -> ConservedState {
        match &self.eval {
            Some(f) => prim_to_cons(&f(x).primitive(), eos),
            None => ConservedState::ZERO,
        }
    }
}

impl fmt::Debug for EquilibriumProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquilibriumProfile").field("name", &self.name).finish()
    }
}

/// Cell-wise deviation `q - q_eq`.
pub type DeviationField = FieldSet;

/// Equilibrium sampled at every stored cell centre of `grid`.
pub fn equilibrium_at_centers(eq: &EquilibriumProfile, grid: &Grid, eos: &Eos) -> FieldSet {
    FieldSet::from_fn(grid, |c| eq.conserved(grid.cell_center(c), eos))
}

/// Subtracts the equilibrium at cell centres, ghosts included.
pub fn deviation(q: &FieldSet, eq: &EquilibriumProfile, eos: &Eos) -> DeviationField {
    let grid = q.grid();
    FieldSet::from_fn(grid, |c| q.get(c) - eq.conserved(grid.cell_center(c), eos))
}

/// Inverse of [`deviation`].
pub fn recompose(dq: &DeviationField, eq: &EquilibriumProfile, eos: &Eos) -> FieldSet {
    let grid = dq.grid();
    FieldSet::from_fn(grid, |c| dq.get(c) + eq.conserved(grid.cell_center(c), eos))
}

/// Equilibrium evaluated directly at the centres of the faces normal to
/// `axis`, over the box returned by [`Grid::face_ranges`] with one
/// transverse ghost layer.
pub fn equilibrium_at_faces(
    eq: &EquilibriumProfile,
    grid: &Grid,
    axis: usize,
    eos: &Eos,
) -> BoxField<ConservedState> {
    BoxField::from_fn(grid.face_ranges(axis, 1), |f| eq.conserved(grid.face_center(axis, f), eos))
}

/// Equilibrium data precomputed once per grid: cell-centre states, face
/// states and the convective fluxes of the face states.
///
/// Everything is `None` for the trivial profile, so callers skip the
/// subtraction entirely rather than subtracting zeros.
#[derive(Debug, Clone)]
pub struct EquilibriumCache {
    center: Option<FieldSet>,
    faces: [Option<BoxField<ConservedState>>; 3],
    face_flux: [Option<BoxField<FluxVector>>; 3],
}

impl EquilibriumCache {
    pub fn new(eq: &EquilibriumProfile, grid: &Grid, eos: &Eos) -> Self {
        if eq.is_trivial() {
            return Self { center: None, faces: [None, None, None], face_flux: [None, None, None] };
        }
        let center = Some(equilibrium_at_centers(eq, grid, eos));
        let faces: [Option<BoxField<ConservedState>>; 3] = core::array::from_fn(|a| {
            grid.is_active(a).then(|| equilibrium_at_faces(eq, grid, a, eos))
        });
        let face_flux = core::array::from_fn(|a| {
            faces[a].as_ref().map(|f| {
                BoxField::from_fn(f.ranges(), |c| flux_convective(&f.get(c), a, eos))
            })
        });
        Self { center, faces, face_flux }
    }

    pub fn is_trivial(&self) -> bool {
        self.center.is_none()
    }

    /// `q_eq` at the centre of cell `c` (zero for the trivial profile).
    #[inline]
    pub fn center(&self, c: [isize; 3]) -> ConservedState {
        self.center.as_ref().map_or(ConservedState::ZERO, |f| f.get(c))
    }

    /// `q_eq` at face `f` normal to `axis`.
    #[inline]
    pub fn face(&self, axis: usize, f: [isize; 3]) -> ConservedState {
        self.faces[axis].as_ref().map_or(ConservedState::ZERO, |b| b.get(f))
    }

    /// Convective flux of the face equilibrium, `None` when trivial.
    #[inline]
    pub fn face_flux(&self, axis: usize, f: [isize; 3]) -> Option<FluxVector> {
        self.face_flux[axis].as_ref().map(|b| b.get(f))
    }

    /// `dq + q_eq` at cell `c`.
    #[inline]
    pub fn recompose_at(&self, dq: &FieldSet, c: [isize; 3]) -> ConservedState {
        match &self.center {
            Some(f) => dq.get(c) + f.get(c),
            None => dq.get(c),
        }
    }

    /// Gas-pressure deviation `p(dq + q_eq) - p(q_eq)` of one cell.
    ///
    /// Both pressures go through the same formula, so a zero deviation gives
    /// exactly zero.
    #[inline]
    pub fn pressure_deviation(&self, dq: &FieldSet, c: [isize; 3], eos: &Eos) -> f64 {
        let eq = self.center(c);
        let full = match &self.center {
            Some(_) => dq.get(c) + eq,
            None => return dq.get(c).pressure(eos),
        };
        full.pressure(eos) - eq.pressure(eos)
    }
}

/// Max-norm over interior cells of the centred-difference residual of
/// `div(p + |B|^2/(2 mu) - B (x) B / mu) - rho g`.
///
/// The profile is sampled at neighbouring cell centres (ghost positions
/// included), so the result measures how well the analytic data satisfies
/// the balance, not the solver. Zero for the trivial profile.
pub fn mhse_residual(eq: &EquilibriumProfile, grid: &Grid, eos: &Eos, gravity: &Gravity) -> f64 {
    if eq.is_trivial() {
        return 0.0;
    }
    let stress = |x: [f64; 3]| -> [[f64; 3]; 3] {
        let e = eq.point(x).unwrap();
        let m = eos.magnetic_energy(e.b);
        core::array::from_fn(|a| {
            core::array::from_fn(|b| {
                let iso = if a == b { e.p + m } else { 0.0 };
                iso - e.b[a] * e.b[b] / eos.mu
            })
        })
    };
    let mut worst = 0.0f64;
    for c in grid.interior() {
        let x = grid.cell_center(c);
        let e = eq.point(x).unwrap();
        let g = gravity.at(x);
        let mut div = [0.0; 3];
        for b in 0..grid.dim() {
            let mut cp = c;
            let mut cm = c;
            cp[b] += 1;
            cm[b] -= 1;
            let tp = stress(grid.cell_center(cp));
            let tm = stress(grid.cell_center(cm));
            let h = 2.0 * grid.spacing(b);
            for a in 0..3 {
                div[a] += (tp[a][b] - tm[a][b]) / h;
            }
        }
        for a in 0..3 {
            worst = worst.max((div[a] - e.rho * g[a]).abs());
        }
    }
    worst
}
