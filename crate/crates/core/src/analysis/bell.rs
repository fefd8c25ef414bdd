use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::fit::{fit_sinusoid, FitResult, SinePoint};
use super::{CorrelationSet, Estimate};
use crate::error::Result;
use crate::units::wrap_phase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellSummary {
    pub same_fit: FitResult,
    pub between_fit: FitResult,
    pub e_fit: FitResult,
    /// Fitted correlator amplitude E₀.
    pub e0: Estimate,
    /// Unweighted mean of the same- and between-halo fringe visibilities.
    pub visibility: Estimate,
    /// 2√2·E₀, assuming the arm phases follow the global phase.
    pub s_max: Estimate,
    /// S_max ≥ 2.
    pub reaches_classical_bound: bool,
    /// Offset(same) − offset(between) − π, wrapped; zero for perfect opposition.
    pub opposition: Estimate,
}

pub fn extract_e_and_s(sets: &[CorrelationSet]) -> Result<BellSummary> {
    let points = |f: &dyn Fn(&CorrelationSet) -> Estimate| -> Vec<SinePoint> {
        sets.iter()
            .map(|c| {
                let e = f(c);
                SinePoint { phase: c.phase, value: e.value, error: e.error }
            })
            .collect()
    };
    let same_fit = fit_sinusoid(&points(&|c| c.c_same))?;
    let between_fit = fit_sinusoid(&points(&|c| c.c_between))?;
    let e_fit = fit_sinusoid(&points(&|c| c.e))?;
    let (vs, vb) = (same_fit.visibility(), between_fit.visibility());
    let visibility = Estimate::new(0.5 * (vs.value + vb.value), 0.5 * vs.error.hypot(vb.error));
    let e0 = e_fit.amplitude;
    let s_max = Estimate::new(2.0 * SQRT_2 * e0.value, 2.0 * SQRT_2 * e0.error);
    let diff = wrap_phase(same_fit.phase_offset.value - between_fit.phase_offset.value - PI);
    Ok(BellSummary {
        same_fit,
        between_fit,
        e_fit,
        e0,
        visibility,
        s_max,
        reaches_classical_bound: s_max.value >= 2.0 - 1e-12,
        opposition: Estimate::new(diff, same_fit.phase_offset.error.hypot(between_fit.phase_offset.error)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::{correlator_amplitude, integrated_correlation, BinSpec, PortClass};

    fn analytic_sets(h: f64, lambda: f64) -> Vec<CorrelationSet> {
        let bins = BinSpec::cubic(lambda).unwrap();
        crate::config::REFERENCE_PHASES
            .iter()
            .map(|&phi| {
                let s = integrated_correlation(PortClass::Same, phi, h, &bins).unwrap();
                let b = integrated_correlation(PortClass::Between, phi, h, &bins).unwrap();
                CorrelationSet {
                    phase: phi,
                    c_same: Estimate::new(s, 0.0),
                    c_between: Estimate::new(b, 0.0),
                    e: Estimate::new((b - s) / (b + s), 0.0),
                    n_shots: 1,
                    excluded_bins: 0,
                    mean_singles_per_bin: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn analytic_input_identities() {
        let s = extract_e_and_s(&analytic_sets(1.48, 0.6)).unwrap();
        let e0 = correlator_amplitude(1.48, &BinSpec::cubic(0.6).unwrap()).unwrap();
        assert!((s.e0.value - e0).abs() < 1e-10);
        assert!((s.visibility.value - e0).abs() < 1e-10);
        assert!(s.opposition.value.abs() < 1e-10);
        assert!(!s.reaches_classical_bound);
    }

    #[test]
    fn bell_limit_flags_bound() {
        let s = extract_e_and_s(&analytic_sets(1e9, 1e-3)).unwrap();
        assert!(s.reaches_classical_bound);
        assert!((s.s_max.value - 2.0 * SQRT_2).abs() < 1e-3);
    }
}
