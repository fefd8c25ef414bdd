//! Continuous-momentum correlation model: Gaussian pair correlations of the
//! halos, the interferometer output correlations, bin-integrated correlations,
//! the correlator E, CHSH S and the gravitational phase.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::special::{dawson, erf, scaled_erf};
use crate::units::wrap_phase;

/// Angles (φ_L, φ_L′, φ_R, φ_R′) that maximise S for E ∝ cos(φ_L + φ_R).
pub const OPTIMAL_CHSH_ANGLES: [f64; 4] = [0.0, PI / 2.0, -PI / 4.0, -3.0 * PI / 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianHaloParams {
    /// Peak single-particle density; only enters absolute rates.
    pub n0: f64,
    pub h: f64,
    /// Correlation widths, μm⁻¹.
    pub sigma: [f64; 3],
    pub k0: f64,
}

impl GaussianHaloParams {
    pub fn from_config(cfg: &ExperimentConfig, h: f64) -> Self {
        Self { n0: 1.0, h, sigma: cfg.sigma_k(), k0: cfg.k0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || self.sigma.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Domain("h and all correlation widths must be positive".into()));
        }
        Ok(())
    }

    fn gaussian(&self, d: Vector3<f64>) -> f64 {
        let e: f64 = (0..3).map(|i| (d[i] / self.sigma[i]).powi(2)).sum();
        (-0.5 * e).exp()
    }
}

/// Where two momenta are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairRegion {
    Upper,
    Lower,
    /// One momentum from each halo; the halos are independent.
    CrossHalo,
}

/// Output port pairs of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PortPair {
    PPPrime,
    QQPrime,
    PQPrime,
    PPrimeQ,
}

/// Same-halo ports (p,p′), (q,q′) versus between-halo ports (p,q′), (p′,q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PortClass {
    Same,
    Between,
}

impl PortPair {
    pub const ALL: [PortPair; 4] = [PortPair::PPPrime, PortPair::QQPrime, PortPair::PQPrime, PortPair::PPrimeQ];

    pub fn class(self) -> PortClass {
        match self {
            PortPair::PPPrime | PortPair::QQPrime => PortClass::Same,
            PortPair::PQPrime | PortPair::PPrimeQ => PortClass::Between,
        }
    }

    /// k_z + k′_z at exact resonance, in units of k0.
    fn resonance(self) -> f64 {
        match self {
            PortPair::PPPrime => 2.0,
            PortPair::QQPrime => -2.0,
            _ => 0.0,
        }
    }
}

/// Which dephasing time enters A_d. `MirrorTime` uses t3/2 − t2 and vanishes for a
/// balanced sequence; `SeparationTime` uses t3/2 − t1 with t1 the separation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DephasingTime {
    #[default]
    MirrorTime,
    SeparationTime,
}

/// Normalised bin half-widths λ_d and dephasing parameters A_d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lambda: [f64; 3],
    pub a: [f64; 3],
}

impl BinSpec {
    pub fn new(lambda: [f64; 3], a: [f64; 3]) -> Result<Self> {
        if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Domain(format!("bin sizes must be positive, got {lambda:?}")));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("dephasing parameters must be finite".into()));
        }
        Ok(Self { lambda, a })
    }

    pub fn cubic(lambda: f64) -> Result<Self> {
        Self::new([lambda; 3], [0.0; 3])
    }

    /// Bins of the configured size with A_d = k0·(ħσ_d/m)·(t3/2 − t_ref).
    pub fn from_config(cfg: &ExperimentConfig, variant: DephasingTime) -> Result<Self> {
        let t_ref = match variant {
            DephasingTime::MirrorTime => cfg.t2_us,
            DephasingTime::SeparationTime => cfg.separation_time_us()?,
        };
        let dt = 0.5 * cfg.t3_us - t_ref;
        let hm = cfg.constants.hbar_over_m();
        let sigma = cfg.sigma_k();
        Self::new(cfg.bin_lambda, sigma.map(|s| cfg.k0 * s * hm * dt))
    }

    /// α_x·α_y·β_z / Π λ_d².
    pub fn overlap_factor(&self) -> Result<f64> {
        let [lx, ly, lz] = self.lambda;
        let num = alpha(lx) * alpha(ly) * beta(lz, self.a[2])?;
        Ok(num / (lx * lx * ly * ly * lz * lz))
    }
}

/// Input pair correlation 1 + h·Π exp(−(k_d + k′_d ∓ 2k0δ_dz)²/2σ_d²).
pub fn input_g2(k: &Vector3<f64>, k_prime: &Vector3<f64>, region: PairRegion, params: &GaussianHaloParams) -> f64 {
    let shift = match region {
        PairRegion::Upper => 2.0 * params.k0,
        PairRegion::Lower => -2.0 * params.k0,
        PairRegion::CrossHalo => return 1.0,
    };
    let d = k + k_prime - Vector3::new(0.0, 0.0, shift);
    1.0 + params.h * params.gaussian(d)
}

/// Phase φ(k, k′) picked up by a pair whose axial momenta miss the resonance.
pub fn phase_offset(k_z: f64, k_prime_z: f64, port: PortPair, cfg: &ExperimentConfig) -> f64 {
    let detune = k_z + k_prime_z - port.resonance() * cfg.k0;
    -2.0 * cfg.constants.hbar_over_m() * cfg.k0 * detune * (0.5 * cfg.t3_us - cfg.t2_us)
}

/// Output pair correlation 1 + (h/2)[1 ∓ cos(Φ + φ)]·Gaussian.
pub fn output_g2(
    k: &Vector3<f64>,
    k_prime: &Vector3<f64>,
    port: PortPair,
    phi: f64,
    params: &GaussianHaloParams,
    cfg: &ExperimentConfig,
) -> f64 {
    let centre = Vector3::new(0.0, 0.0, port.resonance() * params.k0);
    let g = params.gaussian(k + k_prime - centre);
    let total = phi + phase_offset(k.z, k_prime.z, port, cfg);
    let fringe = match port.class() {
        PortClass::Same => 1.0 - total.cos(),
        PortClass::Between => 1.0 + total.cos(),
    };
    1.0 + 0.5 * params.h * fringe * g
}

/// α(λ) = (e^{−2λ²} − 1) + √(2π)·λ·erf(√2λ).
pub fn alpha(lambda: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    (-2.0 * lambda * lambda).exp_m1() + (2.0 * PI).sqrt() * lambda * erf(s2 * lambda)
}

/// β(λ, A): α with the axial bin integral weighted by the dephasing cos(2At).
/// Reduces to α at A = 0 and decays for large A.
pub fn beta(lambda: f64, a: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("λ must be non-negative, got {lambda}")));
    }
    let s2 = std::f64::consts::SQRT_2;
    let sin = (2.0 * a * lambda).sin();
    // e^{−2λ²}cos(4Aλ) − 1 without cancellation
    let head = (-2.0 * lambda * lambda).exp_m1() * (4.0 * a * lambda).cos() - 2.0 * sin * sin;
    let dawson_term = 2.0 * s2 * a * dawson(s2 * a);
    let minus = num_complex::Complex64::new(lambda, -a) * scaled_erf(s2 * lambda, -s2 * a);
    let plus = num_complex::Complex64::new(lambda, a) * scaled_erf(s2 * lambda, s2 * a);
    let bracket = (0.5 * PI).sqrt() * (minus + plus);
    if bracket.im.abs() > 1e-8 * (1.0 + bracket.re.abs()) {
        return Err(Error::Numerical(format!("β({lambda}, {a}) has imaginary residue {:.3e}", bracket.im)));
    }
    Ok(head + dawson_term + bracket.re)
}

/// Bin-integrated correlation C_LR/N̄_V² = 1 + (h/16)[1 ∓ cos Φ]·α_xα_yβ_z/Πλ_d².
pub fn integrated_correlation(class: PortClass, phi: f64, h: f64, bins: &BinSpec) -> Result<f64> {
    let fringe = match class {
        PortClass::Same => 1.0 - phi.cos(),
        PortClass::Between => 1.0 + phi.cos(),
    };
    Ok(1.0 + h / 16.0 * fringe * bins.overlap_factor()?)
}

/// E = (C_pq′ + C_p′q − C_pp′ − C_qq′)/(C_pq′ + C_p′q + C_pp′ + C_qq′).
pub fn correlator_from_correlations(same: [f64; 2], between: [f64; 2]) -> f64 {
    let b = between[0] + between[1];
    let s = same[0] + same[1];
    (b - s) / (b + s)
}

/// Closed form E(Φ) = hαβcosΦ/(16Πλ² + hαβ).
pub fn quantum_correlator(phi: f64, h: f64, bins: &BinSpec) -> Result<f64> {
    Ok(correlator_amplitude(h, bins)? * phi.cos())
}

/// Fringe amplitude E₀ of the correlator.
pub fn correlator_amplitude(h: f64, bins: &BinSpec) -> Result<f64> {
    let x = h * bins.overlap_factor()?;
    Ok(x / (16.0 + x))
}

/// Small-bin limit h/(h+2) of the correlator amplitude.
pub fn correlator_envelope(h: f64) -> f64 {
    h / (h + 2.0)
}

/// S = |E(φ_L,φ_R) − E(φ_L,φ_R′) + E(φ_L′,φ_R) + E(φ_L′,φ_R′)| for E = E₀cos(φ_L + φ_R).
/// `angles` = (φ_L, φ_L′, φ_R, φ_R′).
pub fn chsh_parameter(e_amplitude: f64, angles: [f64; 4]) -> Result<f64> {
    if !(e_amplitude.abs() <= 1.0) {
        return Err(Error::Domain(format!("|E₀| must not exceed 1, got {e_amplitude}")));
    }
    let e = |l: f64, r: f64| e_amplitude * (l + r).cos();
    let [l, lp, r, rp] = angles;
    Ok((e(l, r) - e(l, rp) + e(lp, r) + e(lp, rp)).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityPhase {
    /// Per-arm phase k0·g·t3², rad.
    pub per_arm: f64,
    /// Global phase 2k0·g·t3², rad.
    pub global: f64,
    /// Global phase wrapped to (−π, π].
    pub wrapped: f64,
}

/// Phase accumulated by both arms falling under gravity through the sequence.
pub fn gravitational_phase(cfg: &ExperimentConfig) -> Result<GravityPhase> {
    if !cfg.is_balanced() {
        return Err(Error::Domain("the gravitational phase is defined for t3 = 2·t2".into()));
    }
    // g in μm/μs²
    let g = cfg.constants.g_accel * 1e-6;
    let per_arm = cfg.k0 * g * cfg.t3_us * cfg.t3_us;
    let global = 2.0 * per_arm;
    Ok(GravityPhase { per_arm, global, wrapped: wrap_phase(global) })
}
