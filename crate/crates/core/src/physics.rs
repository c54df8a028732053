//! Pointwise MHD physics: fluxes, the convective/pressure split, gravity
//! source, and characteristic speeds.
//!
//! Fluxes along `axis` follow from the x-direction flux by cyclic rotation of
//! `(u, v, w)` and `(Bx, By, Bz)`.

use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::state::{mag, mom, ConservedState, Eos, ENERGY, RHO};

/// Eight flux components in the order of [`ConservedState`].
pub type FluxVector = ConservedState;

#[inline]
fn velocity(q: &ConservedState) -> [f64; 3] {
    let r = q.rho();
    let m = q.momentum();
    [m[0] / r, m[1] / r, m[2] / r]
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Convective part of the flux: everything except gas pressure and enthalpy
/// transport.
pub fn flux_convective(q: &ConservedState, axis: usize, eos: &Eos) -> FluxVector {
    let v = velocity(q);
    let b = q.b();
    let vn = v[axis];
    let bn = b[axis];
    let m_mag = eos.magnetic_energy(b);
    let mut f = FluxVector::ZERO;
    f[RHO] = q.rho() * vn;
    for t in 0..3 {
        f[mom(t)] = q[mom(t)] * vn - bn * b[t] / eos.mu;
        f[mag(t)] = vn * b[t] - v[t] * bn;
    }
    f[mom(axis)] += m_mag;
    f[mag(axis)] = 0.0;
    f[ENERGY] = vn * (q.kinetic_energy() + m_mag) - bn * dot(v, b) / eos.mu;
    f
}

/// Pressure part of the flux: `p` in the normal momentum and `h rho v_n` in
/// the energy, where `h` is [`enthalpy`].
pub fn flux_pressure(q: &ConservedState, axis: usize, eos: &Eos) -> FluxVector {
    let p = q.pressure(eos);
    let mut f = FluxVector::ZERO;
    f[mom(axis)] = p;
    f[ENERGY] = enthalpy_unchecked(q, eos) * q[mom(axis)];
    f
}

/// Full ideal-MHD flux along `axis`.
pub fn flux_full(q: &ConservedState, axis: usize, eos: &Eos) -> FluxVector {
    let v = velocity(q);
    let b = q.b();
    let vn = v[axis];
    let bn = b[axis];
    let p = q.pressure(eos);
    let p_tot = p + eos.magnetic_energy(b);
    let mut f = FluxVector::ZERO;
    f[RHO] = q.rho() * vn;
    for t in 0..3 {
        f[mom(t)] = q[mom(t)] * vn - bn * b[t] / eos.mu;
        f[mag(t)] = vn * b[t] - v[t] * bn;
    }
    f[mom(axis)] += p_tot;
    f[mag(axis)] = 0.0;
    f[ENERGY] = vn * (q.energy() + p_tot) - bn * dot(v, b) / eos.mu;
    f
}

#[inline]
fn enthalpy_unchecked(q: &ConservedState, eos: &Eos) -> f64 {
    (q.energy() - q.kinetic_energy() + q.pressure(eos)) / q.rho()
}

/// Specific enthalpy carried by the implicit energy flux,
/// `h = (rho e + p + |B|^2/(2 mu)) / rho`.
///
/// The magnetic term makes `flux_convective + flux_pressure` reproduce the
/// full energy flux; without a field this is `gamma p / ((gamma - 1) rho)`.
pub fn enthalpy(q: &ConservedState, eos: &Eos) -> Result<f64> {
    if !(q.rho() > 0.0) {
        return Err(Error::InvalidState { what: "density", value: q.rho() });
    }
    Ok(enthalpy_unchecked(q, eos))
}

/// Gravity source `(0, rho g, rho v . g, 0, 0, 0)`.
pub fn source(q: &ConservedState, g: [f64; 3]) -> ConservedState {
    let m = q.momentum();
    let mut s = ConservedState::ZERO;
    s[RHO] = 0.0;
    for a in 0..3 {
        s[mom(a)] = q.rho() * g[a];
    }
    s[ENERGY] = dot(m, g);
    s
}

/// Characteristic speeds of the full system along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    /// Adiabatic sound speed.
    pub c: f64,
    /// Alfven speed of the normal field component (non-negative).
    pub c_a: f64,
    pub c_s: f64,
    pub c_f: f64,
    /// `|B|^2 / (mu rho)`.
    pub b2: f64,
}

pub fn wave_speeds(q: &ConservedState, axis: usize, eos: &Eos) -> Result<WaveSpeeds> {
    let rho = q.rho();
    if !(rho > 0.0) {
        return Err(Error::InvalidState { what: "density", value: rho });
    }
    let p = q.pressure(eos);
    if !(p > 0.0) {
        return Err(Error::InvalidState { what: "pressure", value: p });
    }
    let b = q.b();
    let c2 = eos.gamma * p / rho;
    let ca2 = b[axis] * b[axis] / (eos.mu * rho);
    let b2 = dot(b, b) / (eos.mu * rho);
    let sum = b2 + c2;
    let disc = (sum * sum - 4.0 * ca2 * c2).max(0.0);
    let cf2 = 0.5 * (sum + sqrt(disc));
    // c_s^2 c_f^2 = c_a^2 c^2 avoids the cancellation in the minus branch.
    let cs2 = if cf2 > 0.0 { ca2 * c2 / cf2 } else { 0.0 };
    Ok(WaveSpeeds { c: sqrt(c2), c_a: sqrt(ca2), c_s: sqrt(cs2), c_f: sqrt(cf2), b2 })
}

/// Largest convective eigenvalue magnitude, `|v_n| + sqrt(|B|^2 / (mu rho))`.
pub fn max_eig_convective(q: &ConservedState, axis: usize, eos: &Eos) -> Result<f64> {
    let rho = q.rho();
    if !(rho > 0.0) {
        return Err(Error::InvalidState { what: "density", value: rho });
    }
    let u = q[mom(axis)] / rho;
    let b = q.b();
    let s = sqrt(dot(b, b) / (eos.mu * rho));
    Ok((u + s).abs().max((u - s).abs()))
}

/// Extreme eigenvalues `(u - sqrt(u^2 + 4c^2)) / 2` and `(u + sqrt(u^2 + 4c^2)) / 2`
/// of the pressure subsystem.
pub fn eig_pressure(q: &ConservedState, axis: usize, eos: &Eos) -> (f64, f64) {
    let rho = q.rho();
    let u = q[mom(axis)] / rho;
    let c2 = eos.gamma * q.pressure(eos) / rho;
    let root = sqrt(u * u + 4.0 * c2);
    (0.5 * (u - root), 0.5 * (u + root))
}

/// Time-independent gravitational acceleration as a function of position.
#[derive(Clone)]
pub struct Gravity(Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>);

impl Gravity {
    pub fn new(f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn none() -> Self {
        Self::constant([0.0; 3])
    }

    pub fn constant(g: [f64; 3]) -> Self {
        Self::new(move |_| g)
    }

    #[inline]
    pub fn at(&self, x: [f64; 3]) -> [f64; 3] {
        (self.0)(x)
    }
}

impl fmt::Debug for Gravity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Gravity(..)")
    }
}
