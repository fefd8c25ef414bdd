//! From detection events to correlation estimates, fringe fits, the correlator
//! E, visibility and CHSH S.

mod bell;
mod bootstrap;
mod estimator;
mod fit;

use serde::{Deserialize, Serialize};

pub use bell::{extract_e_and_s, BellSummary};
pub use bootstrap::{bootstrap, bootstrap_mean_error};
pub use estimator::{
    analyze_campaign, bin_phase, estimate_correlations, shuffle_shots, AnalysisOptions, AnalysisReport, BinGrid,
    BinnedPhase, CorrelationSet,
};
pub use fit::{fit_h_vs_lambda, fit_sinusoid, FitResult, HFit, SinePoint};

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    /// |value − target| in units of the error.
    pub fn pull(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.error
    }
}
