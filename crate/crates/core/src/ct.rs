//! Constrained transport of the face-normal magnetic field.
//!
//! Edge EMFs are averaged from the induction components of the face
//! fluxes; the face fields then change by the discrete curl of the edge
//! EMFs, which leaves the discrete divergence untouched.

use crate::error::{Error, Result};
use crate::explicit::FaceFluxes;
use crate::grid::{BoxField, FieldSet, Grid, ScalarField};
use crate::state::mag;

/// Face-normal field components: `B_a` on the faces normal to axis `a`.
///
/// Present only for active axes of multi-dimensional grids. Holds the
/// deviation from the equilibrium face field when well-balancing is active.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredB(pub [Option<BoxField<f64>>; 3]);

impl StaggeredB {
    /// No staggered components (one-dimensional runs).
    pub fn empty() -> Self {
        Self([None, None, None])
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(usize, [isize; 3]) -> f64) -> Self {
        if grid.dim() < 2 {
            return Self::empty();
        }
        Self(core::array::from_fn(|a| {
            grid.is_active(a).then(|| BoxField::from_fn(grid.face_ranges(a, 0), |c| f(a, c)))
        }))
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_fn(grid, |_, _| 0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(Option::is_none)
    }

    pub fn component(&self, axis: usize) -> Option<&BoxField<f64>> {
        self.0[axis].as_ref()
    }

    /// `self + s * other`, componentwise.
    pub fn add_scaled(&self, s: f64, other: &StaggeredB) -> StaggeredB {
        Self(core::array::from_fn(|a| match (&self.0[a], &other.0[a]) {
            (Some(x), Some(y)) => {
                let mut out = x.clone();
                for (o, v) in out.as_mut_slice().iter_mut().zip(y.as_slice()) {
                    *o += s * v;
                }
                Some(out)
            }
            (x, _) => x.clone(),
        }))
    }

    /// `(self - base) / s`, componentwise.
    pub fn rate_from(&self, base: &StaggeredB, s: f64) -> StaggeredB {
        Self(core::array::from_fn(|a| match (&self.0[a], &base.0[a]) {
            (Some(x), Some(y)) => {
                let mut out = x.clone();
                for (o, v) in out.as_mut_slice().iter_mut().zip(y.as_slice()) {
                    *o = (*o - v) / s;
                }
                Some(out)
            }
            (x, _) => x.clone(),
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flat_map(|b| b.as_slice().iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Edge EMFs: `E_c` lives on the edges parallel to axis `c`. A component is
/// present when both axes transverse to it are active.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerEMF(pub [Option<BoxField<f64>>; 3]);

#[inline]
fn shifted(mut c: [isize; 3], axis: usize, by: isize) -> [isize; 3] {
    c[axis] += by;
    c
}

/// Averages the four face estimates adjacent to every edge.
///
/// For cyclic `(a, b, c)`, the flux of `B_b` through `a`-faces equals
/// `-E_c` and the flux of `B_a` through `b`-faces equals `+E_c`. The face
/// fluxes need one transverse ghost layer.
pub fn corner_emf(fluxes: &FaceFluxes, grid: &Grid) -> Result<CornerEMF> {
    if grid.dim() < 2 {
        return Err(Error::NotMultiDimensional);
    }
    Ok(CornerEMF(core::array::from_fn(|c| {
        let a = (c + 1) % 3;
        let b = (c + 2) % 3;
        let (fa, fb) = match (&fluxes[a], &fluxes[b]) {
            (Some(fa), Some(fb)) => (fa, fb),
            _ => return None,
        };
        Some(BoxField::from_fn(grid.edge_ranges(c), |e| {
            0.25 * (-fa.get(e)[mag(b)] - fa.get(shifted(e, b, -1))[mag(b)]
                + fb.get(e)[mag(a)]
                + fb.get(shifted(e, a, -1))[mag(a)])
        }))
    })))
}

/// `dB/dt = -curl E` on every staggered face.
pub fn curl_rate(emf: &CornerEMF, grid: &Grid) -> StaggeredB {
    StaggeredB::from_fn(grid, |a, f| {
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        let mut r = 0.0;
        if let Some(ec) = &emf.0[c] {
            r -= (ec.get(shifted(f, b, 1)) - ec.get(f)) / grid.spacing(b);
        }
        if let Some(eb) = &emf.0[b] {
            r += (eb.get(shifted(f, c, 1)) - eb.get(f)) / grid.spacing(c);
        }
        r
    })
}

/// Advances the face fields by `dt` with the given edge EMFs.
pub fn ct_update(staggered: &StaggeredB, emf: &CornerEMF, dt: f64, grid: &Grid) -> StaggeredB {
    staggered.add_scaled(dt, &curl_rate(emf, grid))
}

/// Cell-centred averages of the staggered components, interior cells only.
pub fn faces_to_centers(staggered: &StaggeredB, grid: &Grid) -> [Option<ScalarField>; 3] {
    core::array::from_fn(|a| {
        staggered.0[a].as_ref().map(|b| {
            let mut out = ScalarField::filled(grid, 0.0);
            for c in grid.interior() {
                out.set(c, 0.5 * (b.get(c) + b.get(shifted(c, a, 1))));
            }
            out
        })
    })
}

/// Overwrites the interior cell field components that have a staggered
/// counterpart with the face averages.
pub fn sync_cell_field(dq: &mut FieldSet, staggered: &StaggeredB) {
    let grid = dq.grid().clone();
    for (a, comp) in staggered.0.iter().enumerate() {
        if let Some(b) = comp {
            for c in grid.interior() {
                let v = 0.5 * (b.get(c) + b.get(shifted(c, a, 1)));
                dq.at_mut(c)[mag(a)] = v;
            }
        }
    }
}

/// Discrete divergence of the staggered field on interior cells.
pub fn div_b(staggered: &StaggeredB, grid: &Grid) -> ScalarField {
    let mut out = ScalarField::filled(grid, 0.0);
    for c in grid.interior() {
        let mut d = 0.0;
        for (a, comp) in staggered.0.iter().enumerate() {
            if let Some(b) = comp {
                d += (b.get(shifted(c, a, 1)) - b.get(c)) / grid.spacing(a);
            }
        }
        out.set(c, d);
    }
    out
}

/// Largest `|div B|` over interior cells.
pub fn max_div_b(staggered: &StaggeredB, grid: &Grid) -> f64 {
    div_b(staggered, grid).as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
}
