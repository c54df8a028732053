//! Uniform Cartesian grids and cell-centred storage with ghost layers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::state::ConservedState;

/// Uniform Cartesian grid in one, two or three dimensions.
///
/// Axes `>= dim` are inactive: they carry one cell of unit width and no ghost
/// layers. Interior cell indices run over `0..n[axis]`, ghost cells over
/// `-n_ghost..0` and `n..n + n_ghost`. Face `f` along an axis sits at
/// `lo + f * d`, so cell `i` is bounded by faces `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    lo: [f64; 3],
    hi: [f64; 3],
    d: [f64; 3],
    n_ghost: usize,
}

impl Grid {
    /// Builds a grid from per-axis cell counts and `(lo, hi)` bounds.
    ///
    /// `counts` and `bounds` need one entry per active axis; extra entries are
    /// ignored.
    pub fn new(dim: usize, counts: &[usize], bounds: &[(f64, f64)], n_ghost: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid("dimension must be 1, 2 or 3"));
        }
        if counts.len() < dim || bounds.len() < dim {
            return Err(Error::InvalidGrid("need counts and bounds for every active axis"));
        }
        if n_ghost < 1 {
            return Err(Error::InvalidGrid("need at least one ghost layer"));
        }
        let mut n = [1; 3];
        let mut lo = [0.0; 3];
        let mut hi = [1.0; 3];
        let mut d = [1.0; 3];
        for a in 0..dim {
            if counts[a] == 0 {
                return Err(Error::InvalidGrid("cell counts must be positive"));
            }
            let (l, h) = bounds[a];
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidGrid("bounds must satisfy lo < hi"));
            }
            n[a] = counts[a];
            lo[a] = l;
            hi[a] = h;
            d[a] = (h - l) / counts[a] as f64;
        }
        Ok(Self { dim, n, lo, hi, d, n_ghost })
    }

    /// Unit square/cube/interval with `cells` cells per active axis.
    pub fn unit(dim: usize, cells: usize, n_ghost: usize) -> Result<Self> {
        Self::new(dim, &[cells; 3], &[(0.0, 1.0); 3], n_ghost)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    #[inline]
    pub fn counts(&self) -> [usize; 3] {
        self.n
    }

    #[inline]
    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    #[inline]
    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    #[inline]
    pub fn spacing(&self, axis: usize) -> f64 {
        self.d[axis]
    }

    #[inline]
    pub fn n_ghost(&self) -> usize {
        self.n_ghost
    }

    #[inline]
    pub fn is_active(&self, axis: usize) -> bool {
        axis < self.dim
    }

    /// Ghost width along `axis` (zero on inactive axes).
    #[inline]
    pub fn ghosts(&self, axis: usize) -> usize {
        if self.is_active(axis) {
            self.n_ghost
        } else {
            0
        }
    }

    /// Stored cells along `axis`, ghosts included.
    #[inline]
    pub fn extent(&self, axis: usize) -> usize {
        self.n[axis] + 2 * self.ghosts(axis)
    }

    pub fn storage_len(&self) -> usize {
        self.extent(0) * self.extent(1) * self.extent(2)
    }

    pub fn interior_len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim).map(|a| self.d[a]).fold(f64::INFINITY, f64::min)
    }

    /// Product of the spacings; inactive axes contribute a factor of one.
    pub fn cell_volume(&self) -> f64 {
        self.d[0] * self.d[1] * self.d[2]
    }

    /// Linear storage index of cell `(i, j, k)`; x varies fastest.
    #[inline]
    pub fn index(&self, i: isize, j: isize, k: isize) -> usize {
        let gi = (i + self.ghosts(0) as isize) as usize;
        let gj = (j + self.ghosts(1) as isize) as usize;
        let gk = (k + self.ghosts(2) as isize) as usize;
        debug_assert!(gi < self.extent(0) && gj < self.extent(1) && gk < self.extent(2));
        (gk * self.extent(1) + gj) * self.extent(0) + gi
    }

    #[inline]
    pub fn index_of(&self, c: [isize; 3]) -> usize {
        self.index(c[0], c[1], c[2])
    }

    /// Coordinate of cell centre `i` along `axis`.
    #[inline]
    pub fn center(&self, axis: usize, i: isize) -> f64 {
        self.lo[axis] + (i as f64 + 0.5) * self.d[axis]
    }

    /// Coordinate of face `f` along `axis` (the left face of cell `f`).
    #[inline]
    pub fn face(&self, axis: usize, f: isize) -> f64 {
        self.lo[axis] + f as f64 * self.d[axis]
    }

    pub fn cell_center(&self, c: [isize; 3]) -> [f64; 3] {
        [self.center(0, c[0]), self.center(1, c[1]), self.center(2, c[2])]
    }

    /// Centre of the face of cell `c` on its low side along `axis`.
    pub fn face_center(&self, axis: usize, c: [isize; 3]) -> [f64; 3] {
        let mut x = self.cell_center(c);
        x[axis] = self.face(axis, c[axis]);
        x
    }

    /// Index range along `axis` widened by `pad` ghost layers (clamped).
    #[inline]
    pub fn range(&self, axis: usize, pad: usize) -> core::ops::Range<isize> {
        let p = pad.min(self.ghosts(axis)) as isize;
        -p..self.n[axis] as isize + p
    }

    /// Interior cells in storage order.
    pub fn interior(&self) -> CellIter {
        CellIter::new([self.range(0, 0), self.range(1, 0), self.range(2, 0)])
    }

    /// Every stored cell, ghosts included, in storage order.
    pub fn all_cells(&self) -> CellIter {
        CellIter::new([
            self.range(0, self.n_ghost),
            self.range(1, self.n_ghost),
            self.range(2, self.n_ghost),
        ])
    }

    /// Whether `c` lies in the interior.
    pub fn is_interior(&self, c: [isize; 3]) -> bool {
        (0..3).all(|a| c[a] >= 0 && c[a] < self.n[a] as isize)
    }
}

/// Iterator over a box of cell indices, x fastest.
#[derive(Debug, Clone)]
pub struct CellIter {
    ranges: [core::ops::Range<isize>; 3],
    next: Option<[isize; 3]>,
}

impl CellIter {
    pub fn new(ranges: [core::ops::Range<isize>; 3]) -> Self {
        let empty = ranges.iter().any(|r| r.is_empty());
        let next = if empty {
            None
        } else {
            Some([ranges[0].start, ranges[1].start, ranges[2].start])
        };
        Self { ranges, next }
    }
}

impl Iterator for CellIter {
    type Item = [isize; 3];

    fn next(&mut self) -> Option<[isize; 3]> {
        let cur = self.next?;
        let mut n = cur;
        let mut axis = 0;
        loop {
            n[axis] += 1;
            if n[axis] < self.ranges[axis].end {
                self.next = Some(n);
                break;
            }
            n[axis] = self.ranges[axis].start;
            axis += 1;
            if axis == 3 {
                self.next = None;
                break;
            }
        }
        Some(cur)
    }
}

/// Cell-centred data over a grid, ghost cells included.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    data: Vec<T>,
}

/// One [`ConservedState`] per cell.
pub type FieldSet = Field<ConservedState>;
/// One scalar per cell.
pub type ScalarField = Field<f64>;

impl<T: Clone> Field<T> {
    pub fn filled(grid: &Grid, value: T) -> Self {
        Self { grid: grid.clone(), data: vec![value; grid.storage_len()] }
    }
}

impl<T> Field<T> {
    /// Evaluates `f` at every stored cell.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut([isize; 3]) -> T) -> Self {
        let data = grid.all_cells().map(&mut f).collect();
        Self { grid: grid.clone(), data }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn at(&self, c: [isize; 3]) -> &T {
        &self.data[self.grid.index_of(c)]
    }

    #[inline]
    pub fn at_mut(&mut self, c: [isize; 3]) -> &mut T {
        let idx = self.grid.index_of(c);
        &mut self.data[idx]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Field<U> {
        Field { grid: self.grid.clone(), data: self.data.iter().map(f).collect() }
    }
}

impl<T: Copy> Field<T> {
    #[inline]
    pub fn get(&self, c: [isize; 3]) -> T {
        self.data[self.grid.index_of(c)]
    }

    #[inline]
    pub fn set(&mut self, c: [isize; 3], v: T) {
        let idx = self.grid.index_of(c);
        self.data[idx] = v;
    }
}

impl FieldSet {
    /// Extracts component `c` as a scalar field.
    pub fn component(&self, c: usize) -> ScalarField {
        self.map(|q| q[c])
    }
}

/// Values on an arbitrary box of (possibly staggered) indices.
///
/// Used for face-centred quantities, where the index along the face normal
/// counts faces, and for edge-centred EMFs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxField<T> {
    lo: [isize; 3],
    ext: [usize; 3],
    data: Vec<T>,
}

impl<T: Clone> BoxField<T> {
    pub fn filled(ranges: [core::ops::Range<isize>; 3], value: T) -> Self {
        let lo = [ranges[0].start, ranges[1].start, ranges[2].start];
        let ext = [ranges[0].len(), ranges[1].len(), ranges[2].len()];
        Self { lo, ext, data: vec![value; ext[0] * ext[1] * ext[2]] }
    }
}

impl<T> BoxField<T> {
    pub fn from_fn(ranges: [core::ops::Range<isize>; 3], f: impl FnMut([isize; 3]) -> T) -> Self {
        let lo = [ranges[0].start, ranges[1].start, ranges[2].start];
        let ext = [ranges[0].len(), ranges[1].len(), ranges[2].len()];
        let data = CellIter::new(ranges).map(f).collect();
        Self { lo, ext, data }
    }

    pub fn ranges(&self) -> [core::ops::Range<isize>; 3] {
        core::array::from_fn(|a| self.lo[a]..self.lo[a] + self.ext[a] as isize)
    }

    pub fn indices(&self) -> CellIter {
        CellIter::new(self.ranges())
    }

    pub fn contains(&self, c: [isize; 3]) -> bool {
        (0..3).all(|a| c[a] >= self.lo[a] && c[a] < self.lo[a] + self.ext[a] as isize)
    }

    #[inline]
    fn offset(&self, c: [isize; 3]) -> usize {
        debug_assert!(self.contains(c), "{c:?} outside {:?}", self.ranges());
        let i = (c[0] - self.lo[0]) as usize;
        let j = (c[1] - self.lo[1]) as usize;
        let k = (c[2] - self.lo[2]) as usize;
        (k * self.ext[1] + j) * self.ext[0] + i
    }

    #[inline]
    pub fn at(&self, c: [isize; 3]) -> &T {
        &self.data[self.offset(c)]
    }

    #[inline]
    pub fn at_mut(&mut self, c: [isize; 3]) -> &mut T {
        let o = self.offset(c);
        &mut self.data[o]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T: Copy> BoxField<T> {
    #[inline]
    pub fn get(&self, c: [isize; 3]) -> T {
        self.data[self.offset(c)]
    }

    #[inline]
    pub fn set(&mut self, c: [isize; 3], v: T) {
        let o = self.offset(c);
        self.data[o] = v;
    }
}

impl Grid {
    /// Index box of the faces normal to `axis`, with the transverse cell
    /// ranges widened by `pad` ghost layers on active axes.
    pub fn face_ranges(&self, axis: usize, pad: usize) -> [core::ops::Range<isize>; 3] {
        core::array::from_fn(|a| {
            if a == axis {
                0..self.n[a] as isize + 1
            } else {
                self.range(a, pad)
            }
        })
    }

    /// Index box of the edges parallel to `axis`: staggered on the two other
    /// axes when they are active.
    pub fn edge_ranges(&self, axis: usize) -> [core::ops::Range<isize>; 3] {
        core::array::from_fn(|a| {
            if a != axis && self.is_active(a) {
                0..self.n[a] as isize + 1
            } else {
                0..self.n[a] as isize
            }
        })
    }
}

/// Volume-weighted L1 distance over interior cells.
///
/// Sums in storage order so the result is reproducible.
pub fn l1_norm(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let grid = &a.grid;
    let sum: f64 = grid.interior().map(|c| (a.get(c) - b.get(c)).abs()).sum();
    Ok(sum * grid.cell_volume())
}
