//! Pointwise state vectors and the ideal-gas closure.

use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

pub const NVAR: usize = 8;

pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const MZ: usize = 3;
pub const ENERGY: usize = 4;
pub const BX: usize = 5;
pub const BY: usize = 6;
pub const BZ: usize = 7;

/// Momentum component along `axis`.
#[inline]
pub const fn mom(axis: usize) -> usize {
    MX + axis
}

/// Magnetic field component along `axis`.
#[inline]
pub const fn mag(axis: usize) -> usize {
    BX + axis
}

/// Ratio of specific heats and the magnetic permeability-like constant.
///
/// Magnetic pressure is `|B|^2 / (2 mu)`, magnetic tension `B (x) B / mu`.
/// `mu = 1` is the rationalised form, `mu = 4 pi` the Gaussian one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eos {
    pub gamma: f64,
    pub mu: f64,
}

impl Eos {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter { name: "gamma", value: gamma });
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter { name: "mu", value: mu });
        }
        Ok(Self { gamma, mu })
    }

    /// Magnetic energy density `|B|^2 / (2 mu)`.
    #[inline]
    pub fn magnetic_energy(&self, b: [f64; 3]) -> f64 {
        (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]) / (2.0 * self.mu)
    }
}

impl Default for Eos {
    fn default() -> Self {
        Self { gamma: 1.4, mu: 1.0 }
    }
}

/// Conserved variables `(rho, rho u, rho v, rho w, rho E, Bx, By, Bz)` of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState(pub [f64; NVAR]);

impl ConservedState {
    pub const ZERO: Self = Self([0.0; NVAR]);

    pub fn new(rho: f64, mom: [f64; 3], energy: f64, b: [f64; 3]) -> Self {
        Self([rho, mom[0], mom[1], mom[2], energy, b[0], b[1], b[2]])
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.0[RHO]
    }

    #[inline]
    pub fn momentum(&self) -> [f64; 3] {
        [self.0[MX], self.0[MY], self.0[MZ]]
    }

    #[inline]
    pub fn energy(&self) -> f64 {
        self.0[ENERGY]
    }

    #[inline]
    pub fn b(&self) -> [f64; 3] {
        [self.0[BX], self.0[BY], self.0[BZ]]
    }

    /// Kinetic energy density `|rho v|^2 / (2 rho)`.
    #[inline]
    pub fn kinetic_energy(&self) -> f64 {
        let m = self.momentum();
        (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) / (2.0 * self.rho())
    }

    /// Gas pressure from the ideal-gas law. Does not check admissibility.
    #[inline]
    pub fn pressure(&self, eos: &Eos) -> f64 {
        (eos.gamma - 1.0)
            * (self.energy() - self.kinetic_energy() - eos.magnetic_energy(self.b()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for ConservedState {
    type Output = f64;
    #[inline]
    fn index(&self, c: usize) -> &f64 {
        &self.0[c]
    }
}

impl IndexMut<usize> for ConservedState {
    #[inline]
    fn index_mut(&mut self, c: usize) -> &mut f64 {
        &mut self.0[c]
    }
}

impl Add for ConservedState {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        for c in 0..NVAR {
            self.0[c] += rhs.0[c];
        }
        self
    }
}

impl AddAssign for ConservedState {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for c in 0..NVAR {
            self.0[c] += rhs.0[c];
        }
    }
}

impl Sub for ConservedState {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        for c in 0..NVAR {
            self.0[c] -= rhs.0[c];
        }
        self
    }
}

impl Mul<ConservedState> for f64 {
    type Output = ConservedState;
    #[inline]
    fn mul(self, mut rhs: ConservedState) -> ConservedState {
        for c in 0..NVAR {
            rhs.0[c] *= self;
        }
        rhs
    }
}

/// Primitive variables: density, velocity, gas pressure, magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrimitiveState {
    pub rho: f64,
    pub vel: [f64; 3],
    pub p: f64,
    pub b: [f64; 3],
}

impl PrimitiveState {
    pub fn is_admissible(&self) -> bool {
        self.rho > 0.0 && self.p > 0.0
    }
}

/// Converts to primitive variables.
///
/// A non-positive density is an error. A non-positive pressure is returned
/// as is; callers check [`PrimitiveState::is_admissible`] when they care.
pub fn cons_to_prim(q: &ConservedState, eos: &Eos) -> Result<PrimitiveState> {
    let rho = q.rho();
    if !(rho > 0.0) {
        return Err(Error::InvalidState { what: "density", value: rho });
    }
    let m = q.momentum();
    Ok(PrimitiveState {
        rho,
        vel: [m[0] / rho, m[1] / rho, m[2] / rho],
        p: q.pressure(eos),
        b: q.b(),
    })
}

/// `rho E = p/(gamma-1) + rho |v|^2 / 2 + |B|^2 / (2 mu)`.
pub fn prim_to_cons(w: &PrimitiveState, eos: &Eos) -> ConservedState {
    let v = w.vel;
    let kinetic = 0.5 * w.rho * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    let energy = w.p / (eos.gamma - 1.0) + kinetic + eos.magnetic_energy(w.b);
    ConservedState::new(w.rho, [w.rho * v[0], w.rho * v[1], w.rho * v[2]], energy, w.b)
}
