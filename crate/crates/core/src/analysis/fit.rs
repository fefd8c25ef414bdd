use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::Estimate;
use crate::continuous::{quantum_correlator, BinSpec};
use crate::error::{Error, Result};
use crate::optimize::brent;
use crate::units::wrap_phase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinePoint {
    pub phase: f64,
    pub value: f64,
    /// One-sigma uncertainty; zero for every point means unweighted.
    pub error: f64,
}

/// value = baseline + amplitude·cos(Φ + phase_offset), amplitude ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub amplitude: Estimate,
    pub phase_offset: Estimate,
    pub baseline: Estimate,
    pub r_squared: f64,
    pub chi_squared: f64,
}

impl FitResult {
    pub fn evaluate(&self, phi: f64) -> f64 {
        self.baseline.value + self.amplitude.value * (phi + self.phase_offset.value).cos()
    }

    /// (max − min)/(max + min) of the fitted fringe.
    pub fn visibility(&self) -> Estimate {
        let (a, b) = (self.amplitude, self.baseline);
        let v = a.value / b.value;
        let err = v * ((a.error / a.value).powi(2) + (b.error / b.value).powi(2)).sqrt();
        Estimate::new(v, if err.is_finite() { err } else { 0.0 })
    }
}

fn weights(points: &[SinePoint]) -> Result<Vec<f64>> {
    let zero = points.iter().filter(|p| p.error == 0.0).count();
    if zero == points.len() {
        return Ok(vec![1.0; points.len()]);
    }
    if zero > 0 || points.iter().any(|p| !(p.error > 0.0)) {
        return Err(Error::FitFailed("uncertainties must be all positive or all zero".into()));
    }
    Ok(points.iter().map(|p| p.error.powi(-2)).collect())
}

fn weighted_r2(values: &[f64], fitted: &[f64], w: &[f64]) -> f64 {
    let wsum: f64 = w.iter().sum();
    let mean = values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / wsum;
    let ss_tot: f64 = values.iter().zip(w).map(|(v, w)| w * (v - mean).powi(2)).sum();
    let ss_res: f64 = values.iter().zip(fitted).zip(w).map(|((v, f), w)| w * (v - f).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Weighted linear least squares in (baseline, c·cosΦ, s·sinΦ) with unit frequency.
pub fn fit_sinusoid(points: &[SinePoint]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::FitFailed(format!("need at least 4 points, got {}", points.len())));
    }
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.phase), b.max(p.phase)));
    if hi - lo < PI {
        return Err(Error::FitFailed(format!("phases span {:.3} rad, need at least π", hi - lo)));
    }
    let w = weights(points)?;
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (p, &wi) in points.iter().zip(&w) {
        let x = Vector3::new(1.0, p.phase.cos(), p.phase.sin());
        normal += wi * x * x.transpose();
        rhs += wi * p.value * x;
    }
    let cov = normal.try_inverse().ok_or_else(|| Error::FitFailed("singular design matrix".into()))?;
    let c = cov * rhs;
    let (b, c1, c2) = (c[0], c[1], c[2]);
    let amp = c1.hypot(c2);
    // b + c1 cosΦ + c2 sinΦ = b + A cos(Φ + δ) with A cosδ = c1, A sinδ = −c2
    let offset = wrap_phase((-c2).atan2(c1));
    let amp_err = if amp > 0.0 {
        ((c1 * c1 * cov[(1, 1)] + c2 * c2 * cov[(2, 2)] + 2.0 * c1 * c2 * cov[(1, 2)]).max(0.0)).sqrt() / amp
    } else {
        cov[(1, 1)].max(cov[(2, 2)]).sqrt()
    };
    let off_err = if amp > 0.0 {
        ((c2 * c2 * cov[(1, 1)] + c1 * c1 * cov[(2, 2)] - 2.0 * c1 * c2 * cov[(1, 2)]).max(0.0)).sqrt() / (amp * amp)
    } else {
        PI
    };
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let fitted: Vec<f64> = points.iter().map(|p| b + c1 * p.phase.cos() + c2 * p.phase.sin()).collect();
    let chi_squared = values.iter().zip(&fitted).zip(&w).map(|((v, f), w)| w * (v - f).powi(2)).sum();
    Ok(FitResult {
        amplitude: Estimate::new(amp, amp_err),
        phase_offset: Estimate::new(offset, off_err),
        baseline: Estimate::new(b, cov[(0, 0)].sqrt()),
        r_squared: weighted_r2(&values, &fitted, &w),
        chi_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HFit {
    pub h: Estimate,
    pub r_squared: f64,
    pub chi_squared: f64,
}

/// One-parameter weighted fit of E(λ) = hαβcosΦ/(16Πλ² + hαβ) in h, with the
/// same λ on all axes and dephasing `a`. `points` hold (λ, E, σ_E) in
/// [`SinePoint`] order (phase field = λ).
pub fn fit_h_vs_lambda(points: &[SinePoint], phi: f64, a: [f64; 3]) -> Result<HFit> {
    if points.len() < 4 {
        return Err(Error::FitFailed(format!("need E at >= 4 bin sizes, got {}", points.len())));
    }
    let w = weights(points)?;
    let specs: Vec<BinSpec> = points.iter().map(|p| BinSpec::new([p.phase; 3], a)).collect::<Result<_>>()?;
    let chi2 = |h: f64| -> f64 {
        points
            .iter()
            .zip(&specs)
            .zip(&w)
            .map(|((p, b), w)| w * (p.value - quantum_correlator(phi, h, b).unwrap_or(f64::NAN)).powi(2))
            .sum()
    };
    // search in log h
    let m = brent(|x| chi2(x.exp()), (1e-3f64).ln(), (1e4f64).ln(), 1e-10)?;
    let h = m.x.exp();
    if !chi2(h).is_finite() {
        return Err(Error::FitFailed("model evaluation failed".into()));
    }
    let step = 1e-3 * h;
    let curv = (chi2(h + step) - 2.0 * chi2(h) + chi2(h - step)) / (step * step);
    let err = if curv > 0.0 { (2.0 / curv).sqrt() } else { f64::INFINITY };
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let fitted: Vec<f64> = specs.iter().map(|b| quantum_correlator(phi, h, b).unwrap_or(f64::NAN)).collect();
    Ok(HFit { h: Estimate::new(h, err), r_squared: weighted_r2(&values, &fitted, &w), chi_squared: chi2(h) })
}
