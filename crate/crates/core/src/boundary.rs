//! Ghost-cell filling for the deviation field and for scalar fields.

use crate::error::{Error, Result};
use crate::grid::{Field, FieldSet, Grid, ScalarField};
use crate::state::{mag, mom, ConservedState};

/// Boundary treatment of one side of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Wrap-around copy. Both sides of an axis must be periodic.
    Periodic,
    /// Mirror scalars, negate the normal momentum and the normal field.
    Wall,
    /// Ghosts hold the equilibrium, i.e. a zero deviation.
    ExactEquilibrium,
    /// Ghosts hold the initial condition evaluated at the ghost centres.
    ExactInitial,
}

impl BcKind {
    pub fn is_exact(self) -> bool {
        matches!(self, BcKind::ExactEquilibrium | BcKind::ExactInitial)
    }
}

/// Boundary kinds indexed by `[axis][side]`, side 0 being the low end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundaries(pub [[BcKind; 2]; 3]);

impl Boundaries {
    pub fn uniform(kind: BcKind) -> Self {
        Self([[kind; 2]; 3])
    }

    #[inline]
    pub fn side(&self, axis: usize, high: bool) -> BcKind {
        self.0[axis][high as usize]
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for a in 0..grid.dim() {
            let [lo, hi] = self.0[a];
            if (lo == BcKind::Periodic) != (hi == BcKind::Periodic) {
                return Err(Error::InvalidGrid("periodic boundaries must be paired"));
            }
        }
        Ok(())
    }
}

/// Fills the ghost layers of `field` axis by axis.
///
/// While filling axis `a`, axes before `a` are swept over their ghost range
/// as well, so corner ghosts end up set. `wall(v, axis)` maps an interior
/// value to its mirror image; `exact(kind, cell)` supplies fixed values.
pub fn fill_ghosts_with<T: Copy>(
    field: &mut Field<T>,
    bc: &Boundaries,
    wall: impl Fn(T, usize) -> T,
    exact: impl Fn(BcKind, [isize; 3]) -> T,
) {
    let grid = field.grid().clone();
    let g = grid.n_ghost() as isize;
    for a in 0..grid.dim() {
        let n = grid.n(a) as isize;
        let ranges: [core::ops::Range<isize>; 3] = core::array::from_fn(|b| {
            if b < a {
                grid.range(b, grid.n_ghost())
            } else if b == a {
                0..1
            } else {
                grid.range(b, 0)
            }
        });
        for base in crate::grid::CellIter::new(ranges) {
            for m in 0..g {
                for high in [false, true] {
                    let mut dst = base;
                    dst[a] = if high { n + m } else { -1 - m };
                    let kind = bc.side(a, high);
                    let v = match kind {
                        BcKind::Periodic => {
                            let mut src = base;
                            src[a] = if high { m } else { n - 1 - m };
                            field.get(src)
                        }
                        BcKind::Wall => {
                            let mut src = base;
                            src[a] = if high { n - 1 - m } else { m };
                            wall(field.get(src), a)
                        }
                        _ => exact(kind, dst),
                    };
                    field.set(dst, v);
                }
            }
        }
    }
}

/// Reflection of a deviation state across a wall normal to `axis`.
pub fn reflect(mut q: ConservedState, axis: usize) -> ConservedState {
    q[mom(axis)] = -q[mom(axis)];
    q[mag(axis)] = -q[mag(axis)];
    q
}

/// Boundary conditions bound to a grid, with the exact ghost deviations
/// precomputed.
#[derive(Debug, Clone)]
pub struct Boundary {
    kinds: Boundaries,
    initial: Option<FieldSet>,
}

impl Boundary {
    /// `initial` holds `q_init - q_eq` at every stored cell; it is only read
    /// on [`BcKind::ExactInitial`] sides, where a missing field means zero.
    pub fn new(kinds: Boundaries, grid: &Grid, initial: Option<FieldSet>) -> Result<Self> {
        kinds.validate(grid)?;
        if let Some(f) = &initial {
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self { kinds, initial })
    }

    pub fn kinds(&self) -> &Boundaries {
        &self.kinds
    }

    /// Fills the ghosts of a deviation field.
    pub fn fill(&self, dq: &mut FieldSet) {
        let init = self.initial.as_ref();
        fill_ghosts_with(dq, &self.kinds, reflect, |kind, c| match (kind, init) {
            (BcKind::ExactInitial, Some(f)) => f.get(c),
            _ => ConservedState::ZERO,
        });
    }

    /// Fills the ghosts of a scalar with even reflection at walls and the
    /// values of `exact` on exact sides.
    pub fn fill_scalar(&self, x: &mut ScalarField, exact: impl Fn([isize; 3]) -> f64) {
        fill_ghosts_with(x, &self.kinds, |v, _| v, |_, c| exact(c));
    }
}
