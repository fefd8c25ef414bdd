//! Physical constants and unit conversions.
//!
//! Internal conventions: wavenumbers in μm⁻¹, velocities in mm/s, times in μs,
//! lengths in μm. Angular frequencies are rad/μs unless a name says otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass constant, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of ⁴He in atomic mass units.
pub const HELIUM4_MASS_U: f64 = 4.002_602;
/// Standard local gravitational acceleration used by default, m/s².
pub const DEFAULT_G: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    /// J·s
    pub hbar: f64,
    /// kg
    pub mass: f64,
    /// m/s²
    pub g_accel: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: HBAR, mass: HELIUM4_MASS_U * ATOMIC_MASS_UNIT, g_accel: DEFAULT_G }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("g_accel", self.g_accel)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// ħ/m in μm²/μs (numerically equal to mm/s per μm⁻¹).
    #[inline]
    pub fn hbar_over_m(&self) -> f64 {
        self.hbar / self.mass * 1e6
    }

    /// v = ħk/m, k in μm⁻¹, result in mm/s.
    #[inline]
    pub fn wavenumber_to_velocity(&self, k: f64) -> f64 {
        // μm²/μs · μm⁻¹ = μm/μs = m/s; ×1e3 for mm/s
        self.hbar_over_m() * k * 1e3
    }

    /// Inverse of [`Self::wavenumber_to_velocity`].
    #[inline]
    pub fn velocity_to_wavenumber(&self, v: f64) -> f64 {
        v * 1e-3 / self.hbar_over_m()
    }

    /// Recoil energy ħk0²/2m divided by ħ, in units of 10³ s⁻¹ ("kHz" as quoted for Bragg pulses).
    pub fn recoil_frequency_khz(&self, k0: f64) -> f64 {
        self.recoil_rate_per_us(k0) * 1e3
    }

    /// ħk0²/2m divided by ħ, in rad/μs.
    #[inline]
    pub fn recoil_rate_per_us(&self, k0: f64) -> f64 {
        0.5 * self.hbar_over_m() * k0 * k0
    }

    /// Distance travelled in `t_us` at the velocity of wavenumber `k`, in μm.
    pub fn displacement_um(&self, k: f64, t_us: f64) -> f64 {
        self.hbar_over_m() * k * t_us
    }
}

pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = phi.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}
