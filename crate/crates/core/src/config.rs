//! Experiment configuration: the protocol parameters, the detection model and
//! the synthetic-source settings used by the event generator.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::units::PhysicalConstants;

/// Global phases Φ (rad) at which the reference data set was recorded.
pub const REFERENCE_PHASES: [f64; 9] = [1.053, 1.838, 2.624, 3.409, 4.194, 4.980, 5.765, 6.551, 7.336];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub constants: PhysicalConstants,
    /// Bragg lattice half-vector |k0|, μm⁻¹.
    pub k0: f64,
    /// Mirror pulse time, μs after the splitting pulse.
    pub t2_us: f64,
    /// Beamsplitter pulse time, μs.
    pub t3_us: f64,
    /// rms spatial widths of the source condensate, μm.
    pub sigma_g_um: [f64; 3],
    /// Pair-correlation widths expressed as velocities, mm/s.
    pub sigma_corr_mm_s: [f64; 3],
    /// Mean occupancy of a single scattering mode.
    pub n_bar: f64,
    pub bec_number: f64,
    /// Trap frequencies / 2π in Hz. Metadata only.
    pub trap_frequencies_hz: [f64; 3],
    /// Maximum latitude from the halo equator accepted by the analysis mask, degrees.
    pub theta_tol_deg: f64,
    pub detection_efficiency: f64,
    /// Detector dark-count rate, counts per mm² per s.
    pub dark_rate_per_mm2_s: f64,
    /// Free-fall time from the source to the detector, s.
    pub fall_time_s: f64,
    /// Global phases Φ for a campaign, rad.
    pub phases: Vec<f64>,
    /// Normalised bin half-widths λ_d = Δk_d / 2σ_d.
    pub bin_lambda: [f64; 3],
    /// Add the gravitational global-phase drift to simulated pairs.
    pub include_gravity: bool,
    pub source: SourceSettings,
    pub analysis: AnalysisSettings,
}

/// Parameters of the synthetic pair source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSettings {
    /// Target correlation height h of the generated pairs.
    pub correlation_height: f64,
    /// Atoms per coherence volume (2π)^{3/2}·Πσ_d at each halo location.
    /// `None` means 1/h: every scattered atom belongs to a pair.
    pub mode_occupancy: Option<f64>,
    /// Radial half-width of the uniformly populated shell around each halo radius, mm/s.
    pub shell_halfwidth_mm_s: f64,
    /// Half-height (along the lattice axis) of the populated slab around each halo centre, mm/s.
    pub slab_halfheight_mm_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSettings {
    /// Bins are kept when their centre lies within this distance of the halo radius, mm/s.
    pub radial_window_mm_s: f64,
    pub bootstrap_resamples: usize,
}

impl Default for SourceSettings {
    fn default() -> Self {
        Self { correlation_height: 1.48, mode_occupancy: None, shell_halfwidth_mm_s: 80.0, slab_halfheight_mm_s: 64.0 }
    }
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self { radial_window_mm_s: 8.0, bootstrap_resamples: 200 }
    }
}

impl Default for ExperimentConfig {
    /// Parameters of the reference experiment.
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            k0: 4.102,
            t2_us: 240.0,
            t3_us: 480.0,
            sigma_g_um: [26.0, 4.2, 4.1],
            sigma_corr_mm_s: [3.0, 15.0, 8.0],
            n_bar: 0.15,
            bec_number: 1.4e5,
            trap_frequencies_hz: [49.607, 195.414, 201.21],
            theta_tol_deg: 20.0,
            detection_efficiency: 0.08,
            dark_rate_per_mm2_s: 0.009,
            fall_time_s: 0.416,
            phases: REFERENCE_PHASES.to_vec(),
            bin_lambda: [0.6, 0.6, 0.6],
            include_gravity: true,
            source: SourceSettings::default(),
            analysis: AnalysisSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        self.constants.validate()?;
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            return bad(format!("k0 must be positive, got {}", self.k0));
        }
        if !(self.t2_us >= 0.0 && self.t3_us >= 0.0) {
            return bad("pulse times must be non-negative".into());
        }
        if self.sigma_g_um.iter().any(|&s| !(s >= 0.0)) {
            return bad("sigma_g_um must be non-negative".into());
        }
        if self.sigma_corr_mm_s.iter().any(|&s| !(s > 0.0)) {
            return bad("sigma_corr_mm_s must be positive".into());
        }
        if !(self.n_bar > 0.0 && self.n_bar < 1.0) {
            return bad(format!("n_bar must lie in (0, 1), got {}", self.n_bar));
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            return bad(format!("detection_efficiency must lie in [0, 1], got {}", self.detection_efficiency));
        }
        if !(self.theta_tol_deg > 0.0 && self.theta_tol_deg < 90.0) {
            return bad(format!("theta_tol_deg must lie in (0, 90), got {}", self.theta_tol_deg));
        }
        if !(self.dark_rate_per_mm2_s >= 0.0) || !(self.fall_time_s > 0.0) {
            return bad("dark_rate_per_mm2_s must be >= 0 and fall_time_s > 0".into());
        }
        if self.bin_lambda.iter().any(|&l| !(l > 0.0)) {
            return bad("bin_lambda entries must be positive".into());
        }
        if self.phases.iter().any(|p| !p.is_finite()) {
            return bad("phases must be finite".into());
        }
        let s = &self.source;
        if !(s.correlation_height >= 0.0) {
            return bad("source.correlation_height must be >= 0".into());
        }
        if let Some(n) = s.mode_occupancy {
            if !(n > 0.0) {
                return bad("source.mode_occupancy must be positive".into());
            }
            if s.correlation_height * n > 1.0 + 1e-12 {
                return bad(format!(
                    "source: h·N̄ = {} exceeds 1; a pair source cannot reach h = {} at occupancy {}",
                    s.correlation_height * n,
                    s.correlation_height,
                    n
                ));
            }
        } else if !(s.correlation_height > 0.0) {
            return bad("source.mode_occupancy must be given when correlation_height is 0".into());
        }
        if !(s.shell_halfwidth_mm_s > 0.0 && s.slab_halfheight_mm_s > 0.0) {
            return bad("source geometry must be positive".into());
        }
        if !(self.analysis.radial_window_mm_s > 0.0) {
            return bad("analysis.radial_window_mm_s must be positive".into());
        }
        Ok(())
    }

    /// Reads and validates a JSON configuration. Unknown keys are rejected.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical serialisation: pretty JSON in field order with a trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialises");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_canonical_json())?;
        Ok(())
    }

    /// SHA-256 of the canonical serialisation, hex encoded.
    pub fn hash(&self) -> String {
        sha256_hex(self.to_canonical_json().as_bytes())
    }

    /// t3 = 2·t2: pairs from both halos overlap at the beamsplitter.
    pub fn is_balanced(&self) -> bool {
        (self.t3_us - 2.0 * self.t2_us).abs() <= 1e-9 * self.t3_us.abs().max(1.0)
    }

    /// Correlation widths as wavenumbers, μm⁻¹.
    pub fn sigma_k(&self) -> [f64; 3] {
        self.sigma_corr_mm_s.map(|v| self.constants.velocity_to_wavenumber(v))
    }

    /// t_sep = σ_{g,z}·m/(ħk0), μs.
    pub fn separation_time_us(&self) -> Result<f64> {
        separation_time_us(&self.constants, self.sigma_g_um[2], self.k0)
    }

    pub fn recoil_frequency_khz(&self) -> f64 {
        self.constants.recoil_frequency_khz(self.k0)
    }
}

/// Time for the colliding condensates to separate, σ_{g,z}·m/(ħk0), in μs.
pub fn separation_time_us(c: &PhysicalConstants, sigma_gz_um: f64, k0: f64) -> Result<f64> {
    if !(k0 > 0.0) {
        return Err(Error::InvalidConfig(format!("k0 must be positive, got {k0}")));
    }
    if sigma_gz_um < 0.0 {
        return Err(Error::InvalidConfig("sigma_g must be non-negative".into()));
    }
    Ok(sigma_gz_um / (c.hbar_over_m() * k0))
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_balanced() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert!(c.is_balanced());
    }

    #[test]
    fn separation_time() {
        let c = ExperimentConfig::default();
        let t = c.separation_time_us().unwrap();
        assert!((t - 63.0).abs() < 2.0, "{t}");
        let pc = PhysicalConstants::default();
        assert_eq!(separation_time_us(&pc, 0.0, 4.102).unwrap(), 0.0);
        let doubled = separation_time_us(&pc, 8.2, 4.102).unwrap();
        assert!((doubled - 2.0 * separation_time_us(&pc, 4.1, 4.102).unwrap()).abs() < 1e-12);
        assert!((doubled - 126.0).abs() < 4.0);
        assert!(matches!(separation_time_us(&pc, 4.1, 0.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn canonical_round_trip_is_bit_identical() {
        let mut c = ExperimentConfig::default();
        c.phases = vec![0.1, 1.0 / 3.0, std::f64::consts::PI];
        c.source.mode_occupancy = Some(0.3);
        let first = c.to_canonical_json();
        let parsed = ExperimentConfig::from_json(&first).unwrap();
        assert_eq!(parsed, c);
        assert_eq!(parsed.to_canonical_json(), first);
        assert_eq!(parsed.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&ExperimentConfig::default().to_canonical_json()).unwrap();
        v["colour"] = serde_json::json!("blue");
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn partial_config_takes_defaults() {
        let c = ExperimentConfig::from_json(r#"{"detection_efficiency": 0.2, "source": {"correlation_height": 1.5}}"#)
            .unwrap();
        let mut want = ExperimentConfig::default();
        want.detection_efficiency = 0.2;
        want.source.correlation_height = 1.5;
        assert_eq!(c, want);
        assert!(ExperimentConfig::from_json(r#"{"source": {"height": 1.5}}"#).is_err());
    }

    #[test]
    fn invariants_enforced() {
        let mut c = ExperimentConfig::default();
        c.n_bar = 1.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.detection_efficiency = 1.2;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.theta_tol_deg = 90.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.bin_lambda[1] = 0.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.source.mode_occupancy = Some(0.9);
        assert!(c.validate().is_err(), "h·N̄ > 1 is unreachable");
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.t3_us = 481.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
