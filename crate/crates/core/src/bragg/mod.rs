//! Finite-duration Bragg pulses. The diffraction amplitudes C_n(k, t) of a
//! Gaussian lattice pulse obey the truncated Raman-Nath equations
//!
//! i dC_n/dt = ω_r(2n + k/k0)² C_n + (Ω(t)/2)[e^{−i(θ+δt)} C_{n−1} + e^{i(θ+δt)} C_{n+1}],
//!
//! with Ω(t) = α·exp(−(t − t_c)²/2σ²) and ω_r = ħk0²/2m. Times are in μs and
//! rates (α, ω_r, δ) in rad/μs.

pub mod ode;
mod search;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
pub use ode::Tolerances;
pub use search::{find_pulse, SearchBounds};

/// Default diffraction-order truncation.
pub const DEFAULT_ORDER: usize = 9;
/// Half-width of the integration window in units of σ.
pub const WINDOW_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BraggPulse {
    /// Peak coupling Ω, rad/μs.
    pub alpha: f64,
    /// rms duration of the envelope, μs.
    pub sigma_us: f64,
    pub t_center_us: f64,
    /// Lattice phase, rad.
    pub theta: f64,
    /// Two-beam detuning, rad/μs.
    pub delta: f64,
}

impl BraggPulse {
    /// Pulse centred so that its integration window starts at t = 0.
    pub fn new(alpha: f64, sigma_us: f64) -> Self {
        Self { alpha, sigma_us, t_center_us: WINDOW_SIGMAS * sigma_us, theta: 0.0, delta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_us > 0.0) || !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Domain(format!(
                "pulse requires sigma > 0 and alpha >= 0, got ({}, {})",
                self.sigma_us, self.alpha
            )));
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.t_center_us) / self.sigma_us;
        self.alpha * (-0.5 * x * x).exp()
    }

    /// ∫Ω dt = α√(2π)σ.
    pub fn area(&self) -> f64 {
        self.alpha * (2.0 * std::f64::consts::PI).sqrt() * self.sigma_us
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_center_us - WINDOW_SIGMAS * self.sigma_us, self.t_center_us + WINDOW_SIGMAS * self.sigma_us)
    }
}

/// Amplitudes C_n for n = −M..M at the end of a pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionState {
    pub coefficients: Vec<Complex64>,
    /// Quasimomentum in units of k0.
    pub kappa: f64,
    pub order: usize,
    /// (Ω_peak/2)/((2M)²ω_r); the truncation is trustworthy when this is small.
    pub validity_ratio: f64,
}

impl DiffractionState {
    pub fn population(&self, n: i32) -> f64 {
        let idx = n + self.order as i32;
        if idx < 0 || idx as usize >= self.coefficients.len() {
            return 0.0;
        }
        self.coefficients[idx as usize].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_valid(&self) -> bool {
        self.validity_ratio < 0.1
    }
}

/// Solver for a fixed recoil frequency and truncation.
#[derive(Debug, Clone, Copy)]
pub struct RamanNath {
    /// ω_r = ħk0²/2m, rad/μs.
    pub omega_r: f64,
    pub order: usize,
    pub tol: Tolerances,
}

impl RamanNath {
    pub fn new(omega_r: f64, order: usize) -> Result<Self> {
        if !(omega_r > 0.0) || order == 0 {
            return Err(Error::Domain("recoil frequency must be positive and order >= 1".into()));
        }
        Ok(Self { omega_r, order, tol: Tolerances::default() })
    }

    pub fn from_config(cfg: &ExperimentConfig, order: usize) -> Result<Self> {
        Self::new(cfg.constants.recoil_rate_per_us(cfg.k0), order)
    }

    /// Integrates over the pulse window from C_n = δ_{n,0} at quasimomentum k = κ·k0.
    /// The diagonal is taken relative to the n = 0 energy, which leaves populations unchanged.
    pub fn integrate(&self, pulse: &BraggPulse, kappa: f64) -> Result<DiffractionState> {
        pulse.validate()?;
        let m = self.order as i32;
        let len = 2 * self.order + 1;
        let diag: Vec<f64> =
            (-m..=m).map(|n| self.omega_r * ((2.0 * n as f64 + kappa).powi(2) - kappa * kappa)).collect();
        let mut y = vec![Complex64::default(); len];
        y[self.order] = Complex64::new(1.0, 0.0);
        let (t0, t1) = pulse.window();
        let p = *pulse;
        let rhs = |t: f64, c: &[Complex64], dc: &mut [Complex64]| {
            let half = 0.5 * p.envelope(t);
            let down = Complex64::from_polar(half, -(p.theta + p.delta * t));
            let up = down.conj();
            for i in 0..len {
                let mut acc = c[i] * diag[i];
                if i > 0 {
                    acc += down * c[i - 1];
                }
                if i + 1 < len {
                    acc += up * c[i + 1];
                }
                // multiply by −i
                dc[i] = Complex64::new(acc.im, -acc.re);
            }
        };
        if pulse.alpha > 0.0 {
            ode::integrate(rhs, t0, t1, &mut y, self.tol)?;
        }
        let validity_ratio = 0.5 * pulse.alpha / ((2 * self.order) as f64).powi(2) / self.omega_r;
        Ok(DiffractionState { coefficients: y, kappa, order: self.order, validity_ratio })
    }

    /// |C_{+1}|² starting at k = −k0 and |C_{−1}|² starting at k = +k0.
    pub fn equator_transfer(&self, pulse: &BraggPulse) -> Result<(f64, f64)> {
        let up = self.integrate(pulse, -1.0)?.population(1);
        let down = self.integrate(pulse, 1.0)?.population(-1);
        Ok((up, down))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    /// Quasimomentum, units of k0.
    pub kappa: f64,
    pub minus_one: f64,
    pub zero: f64,
    pub plus_one: f64,
    pub norm: f64,
}

/// Diffraction-order populations for each quasimomentum, evaluated in parallel.
pub fn transfer_spectrum(solver: &RamanNath, pulse: &BraggPulse, kappas: &[f64]) -> Result<Vec<SpectrumRow>> {
    kappas
        .par_iter()
        .map(|&kappa| {
            let s = solver.integrate(pulse, kappa)?;
            Ok(SpectrumRow {
                kappa,
                minus_one: s.population(-1),
                zero: s.population(0),
                plus_one: s.population(1),
                norm: s.norm(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub sigma_us: f64,
    pub alpha: f64,
    pub transfer_up: f64,
    pub transfer_down: f64,
}

/// Equator transfer over the grid σ × α (row-major in σ).
pub fn scan_pulse_parameters(solver: &RamanNath, sigmas: &[f64], alphas: &[f64]) -> Result<Vec<ScanPoint>> {
    let grid: Vec<(f64, f64)> = sigmas.iter().flat_map(|&s| alphas.iter().map(move |&a| (s, a))).collect();
    grid.par_iter()
        .map(|&(sigma_us, alpha)| {
            let (transfer_up, transfer_down) = solver.equator_transfer(&BraggPulse::new(alpha, sigma_us))?;
            Ok(ScanPoint { sigma_us, alpha, transfer_up, transfer_down })
        })
        .collect()
}

/// n evenly spaced values from a to b inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver() -> RamanNath {
        RamanNath::from_config(&ExperimentConfig::default(), DEFAULT_ORDER).unwrap()
    }

    #[test]
    fn null_pulse_is_free_evolution() {
        let s = solver().integrate(&BraggPulse::new(0.0, 3.0), -1.0).unwrap();
        assert_eq!(s.population(0), 1.0);
        assert_eq!(s.norm(), 1.0);
    }

    #[test]
    fn weak_pulse_two_level_limit() {
        let rn = solver();
        // Ω/2 < 0.05·4ω_r
        let alpha = 0.3 * rn.omega_r;
        for area in [0.5, 1.5, std::f64::consts::PI] {
            let sigma = area / (alpha * (2.0 * std::f64::consts::PI).sqrt());
            let p = BraggPulse::new(alpha, sigma);
            let s = rn.integrate(&p, -1.0).unwrap();
            let want = (0.5 * p.area()).sin().powi(2);
            assert!(
                (s.population(1) - want).abs() < 0.02 * want.max(0.05),
                "area {area}: {} vs {want}",
                s.population(1)
            );
            for n in [-3, -2, 2, 3] {
                assert!(s.population(n) < 1e-4);
            }
        }
    }

    #[test]
    fn spectrum_symmetry_and_norm() {
        let rn = solver();
        let p = BraggPulse::new(0.405, 3.162);
        let ks = linspace(-3.0, 3.0, 13);
        let rows = transfer_spectrum(&rn, &p, &ks).unwrap();
        for (row, mirror) in rows.iter().zip(rows.iter().rev()) {
            assert!((row.norm - 1.0).abs() < 1e-8);
            assert!((row.plus_one - mirror.minus_one).abs() < 1e-8);
        }
        let far = rn.integrate(&p, 6.3).unwrap();
        assert!(far.population(0) > 0.999);
    }

    #[test]
    fn detuning_is_a_frame_shift() {
        let rn = solver();
        for (i, &(delta, kappa)) in
            [(0.05, -1.0), (-0.1, 0.8), (0.2, -0.6), (0.3, 1.1), (-0.25, 0.0)].iter().enumerate()
        {
            let mut p = BraggPulse::new(0.4 + 0.1 * i as f64, 3.0);
            p.delta = delta;
            p.theta = 0.3;
            let a = rn.integrate(&p, kappa).unwrap();
            p.delta = 0.0;
            let b = rn.integrate(&p, kappa - delta / (4.0 * rn.omega_r)).unwrap();
            for n in -3..=3 {
                assert!((a.population(n) - b.population(n)).abs() < 1e-7, "case {i}, n = {n}");
            }
        }
    }

    #[test]
    fn validity_ratio_reported() {
        let rn = RamanNath::new(0.1334, 2).unwrap();
        let s = rn.integrate(&BraggPulse::new(3.0, 1.0), -1.0).unwrap();
        assert!(!s.is_valid());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }
}
