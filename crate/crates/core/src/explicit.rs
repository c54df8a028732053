//! The explicit convective operator: limited reconstruction of the
//! deviation, Rusanov fluxes on recomposed interface states, subtraction of
//! the equilibrium fluxes, and the convective time-step restriction.

use crate::ct::{self, StaggeredB};
use crate::error::{Error, Result};
use crate::grid::{BoxField, Field, FieldSet, Grid};
use crate::physics::{flux_convective, max_eig_convective, source, FluxVector, Gravity};
use crate::state::{ConservedState, Eos, NVAR};
use crate::wellbalance::{EquilibriumCache, EquilibriumProfile};

/// Spatial (and temporal) order of the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidParameter { name: "order", value: v as f64 }),
        }
    }
}

/// Two sided `minmod`: the smaller magnitude when the signs agree, else zero.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Per-component undivided slope of one cell.
pub type Slope = ConservedState;

/// Limited slope of cell `c` along `axis`, one limiter per component.
pub fn limited_slope(dq: &FieldSet, c: [isize; 3], axis: usize) -> Slope {
    let mut lo = c;
    let mut hi = c;
    lo[axis] -= 1;
    hi[axis] += 1;
    let (a, b, m) = (dq.get(lo), dq.get(c), dq.get(hi));
    let mut s = Slope::ZERO;
    for k in 0..NVAR {
        s[k] = minmod(b[k] - a[k], m[k] - b[k]);
    }
    s
}

/// States on the two sides of a face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePair {
    pub ql: ConservedState,
    pub qr: ConservedState,
}

/// Deviation values on both sides of the face with index `f` along `axis`.
pub fn interface_deviation(dq: &FieldSet, f: [isize; 3], axis: usize, order: Order) -> InterfacePair {
    let mut left = f;
    left[axis] -= 1;
    let (mut ql, mut qr) = (dq.get(left), dq.get(f));
    if order == Order::Second {
        ql += 0.5 * limited_slope(dq, left, axis);
        qr = qr - 0.5 * limited_slope(dq, f, axis);
    }
    InterfacePair { ql, qr }
}

/// Reconstructed deviations on every face normal to `axis`, over
/// [`Grid::face_ranges`] with `pad` transverse ghost layers.
///
/// Ghost cells must be filled two layers deep for second order.
pub fn reconstruct(dq: &FieldSet, axis: usize, order: Order, pad: usize) -> BoxField<InterfacePair> {
    BoxField::from_fn(dq.grid().face_ranges(axis, pad), |f| interface_deviation(dq, f, axis, order))
}

/// Rusanov flux of the convective sub-system.
///
/// The dissipation speed is the larger convective eigenvalue of the two
/// sides, so it does not involve the sound speed.
pub fn rusanov_flux(pair: &InterfacePair, axis: usize, eos: &Eos) -> Result<FluxVector> {
    for q in [&pair.ql, &pair.qr] {
        if !q.is_finite() {
            return Err(Error::InvalidState { what: "non-finite interface state", value: f64::NAN });
        }
        let p = q.pressure(eos);
        if !(p > 0.0) {
            return Err(Error::InvalidState { what: "pressure", value: p });
        }
    }
    let s = max_eig_convective(&pair.ql, axis, eos)?.max(max_eig_convective(&pair.qr, axis, eos)?);
    let fl = flux_convective(&pair.ql, axis, eos);
    let fr = flux_convective(&pair.qr, axis, eos);
    Ok(0.5 * (fl + fr) - (0.5 * s) * (pair.qr - pair.ql))
}

/// Time step `cfl / max_cells sum_a |lambda_c,a| / dx_a` of a physical
/// (recomposed) state, capped at `dt_max`. In 1D this is
/// `cfl * dx / max|lambda_c|`. Only interior cells are inspected.
pub fn cfl_dt(q: &FieldSet, cfl: f64, eos: &Eos, dt_max: f64) -> Result<f64> {
    let grid = q.grid();
    let mut rate = 0.0f64;
    for c in grid.interior() {
        let mut r = 0.0;
        for a in 0..grid.dim() {
            r += max_eig_convective(&q.get(c), a, eos)? / grid.spacing(a);
        }
        rate = rate.max(r);
    }
    Ok(dt_from_rate(cfl, rate, dt_max))
}

fn dt_from_rate(cfl: f64, rate: f64, dt_max: f64) -> f64 {
    if rate > 0.0 {
        (cfl / rate).min(dt_max)
    } else {
        dt_max
    }
}

/// Deviation face fluxes per axis, `None` on inactive axes.
pub type FaceFluxes = [Option<BoxField<FluxVector>>; 3];

/// Explicit tendencies of one stage: cell averages and, in more than one
/// dimension, the face-normal field components.
#[derive(Debug, Clone)]
pub struct Tendency {
    pub cell: FieldSet,
    pub faces: StaggeredB,
}

/// Grid, closure, equilibrium and gravity shared by every sub-step.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: Grid,
    pub eos: Eos,
    pub order: Order,
    pub equilibrium: EquilibriumCache,
    pub gravity: Field<[f64; 3]>,
}

impl Discretization {
    pub fn new(grid: Grid, eos: Eos, order: Order, eq: &EquilibriumProfile, gravity: &Gravity) -> Result<Self> {
        if order == Order::Second && grid.n_ghost() < 2 {
            return Err(Error::InvalidGrid("second order needs two ghost layers"));
        }
        let equilibrium = EquilibriumCache::new(eq, &grid, &eos);
        let g = Field::from_fn(&grid, |c| gravity.at(grid.cell_center(c)));
        Ok(Self { grid, eos, order, equilibrium, gravity: g })
    }

    /// Deviation flux `F_hat(q_bar) - F_c(q_eq)` on every face, with one
    /// transverse ghost layer so that edge EMFs can be assembled.
    pub fn face_fluxes(&self, dq: &FieldSet) -> Result<FaceFluxes> {
        let mut out: FaceFluxes = [None, None, None];
        for a in 0..self.grid.dim() {
            let ranges = self.grid.face_ranges(a, 1);
            let mut fluxes = BoxField::filled(ranges.clone(), FluxVector::ZERO);
            for f in crate::grid::CellIter::new(ranges) {
                let d = interface_deviation(dq, f, a, self.order);
                let eq = self.equilibrium.face(a, f);
                let pair = InterfacePair { ql: d.ql + eq, qr: d.qr + eq };
                let flux = rusanov_flux(&pair, a, &self.eos).map_err(|e| inadmissible(e, f))?;
                let flux = match self.equilibrium.face_flux(a, f) {
                    Some(fe) => flux - fe,
                    None => flux,
                };
                fluxes.set(f, flux);
            }
            out[a] = Some(fluxes);
        }
        Ok(out)
    }

    /// Finite-volume tendency of the interior cells; ghosts are left at zero.
    ///
    /// The source is linear in the state, so `S(q_bar) - S(q_eq)` is
    /// evaluated as `S(dq)`.
    pub fn cell_tendency(&self, dq: &FieldSet, fluxes: &FaceFluxes) -> FieldSet {
        let grid = &self.grid;
        let mut out = FieldSet::filled(grid, ConservedState::ZERO);
        for c in grid.interior() {
            let mut r = source(&dq.get(c), self.gravity.get(c));
            for (a, fa) in fluxes.iter().enumerate() {
                if let Some(fa) = fa {
                    let mut hi = c;
                    hi[a] += 1;
                    let inv = 1.0 / grid.spacing(a);
                    r = r - inv * (fa.get(hi) - fa.get(c));
                }
            }
            out.set(c, r);
        }
        out
    }

    /// Cell and face tendencies of a deviation with filled ghosts.
    pub fn tendency(&self, dq: &FieldSet) -> Result<Tendency> {
        let fluxes = self.face_fluxes(dq)?;
        let cell = self.cell_tendency(dq, &fluxes);
        let faces = if self.grid.dim() > 1 {
            let emf = ct::corner_emf(&fluxes, &self.grid)?;
            ct::curl_rate(&emf, &self.grid)
        } else {
            StaggeredB::empty()
        };
        Ok(Tendency { cell, faces })
    }

    /// One forward-Euler step of the convective sub-system on cell
    /// averages: `dq + dt * tendency`. Ghost values are copied unchanged.
    pub fn explicit_update(&self, dq: &FieldSet, dt: f64) -> Result<FieldSet> {
        let fluxes = self.face_fluxes(dq)?;
        let rate = self.cell_tendency(dq, &fluxes);
        let mut out = dq.clone();
        for c in self.grid.interior() {
            out.set(c, dq.get(c) + dt * rate.get(c));
        }
        Ok(out)
    }

    /// Convective time step of the recomposed state `dq + q_eq`.
    pub fn cfl_dt(&self, dq: &FieldSet, cfl: f64, dt_max: f64) -> Result<f64> {
        let mut rate = 0.0f64;
        for c in self.grid.interior() {
            let q = self.equilibrium.recompose_at(dq, c);
            let mut r = 0.0;
            for a in 0..self.grid.dim() {
                let l = max_eig_convective(&q, a, &self.eos).map_err(|e| inadmissible(e, c))?;
                r += l / self.grid.spacing(a);
            }
            rate = rate.max(r);
        }
        Ok(dt_from_rate(cfl, rate, dt_max))
    }
}

fn inadmissible(e: Error, cell: [isize; 3]) -> Error {
    match e {
        Error::InvalidState { what, .. } => Error::Inadmissible { cell, what },
        other => other,
    }
}
