//! Browser bindings: correlation fringes, the CHSH bound and Bragg transfer
//! spectra. Each export returns a flat `Float64Array`; the plain functions
//! underneath are usable natively.

use std::f64::consts::{SQRT_2, TAU};

use twinhalo::bragg::{linspace, transfer_spectrum, BraggPulse, RamanNath, DEFAULT_ORDER};
use twinhalo::continuous::{
    correlator_amplitude, correlator_envelope, integrated_correlation, quantum_correlator, BinSpec, PortClass,
};
use twinhalo::ExperimentConfig;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2000;

fn bins(lambda: f64, a_z: f64) -> Result<BinSpec, String> {
    BinSpec::new([lambda; 3], [0.0, 0.0, a_z]).map_err(|e| e.to_string())
}

fn point_count(n: usize) -> Result<usize, String> {
    if (2..=MAX_POINTS).contains(&n) {
        Ok(n)
    } else {
        Err(format!("point count must be between 2 and {MAX_POINTS}"))
    }
}

/// Rows of (Φ, C_same, C_between, E) over one period.
pub fn fringes(h: f64, lambda: f64, a_z: f64, points: usize) -> Result<Vec<f64>, String> {
    let b = bins(lambda, a_z)?;
    let mut out = Vec::with_capacity(4 * points);
    for phi in linspace(0.0, TAU, point_count(points)?) {
        let same = integrated_correlation(PortClass::Same, phi, h, &b).map_err(|e| e.to_string())?;
        let between = integrated_correlation(PortClass::Between, phi, h, &b).map_err(|e| e.to_string())?;
        let e = quantum_correlator(phi, h, &b).map_err(|e| e.to_string())?;
        out.extend([phi, same, between, e]);
    }
    Ok(out)
}

/// (E₀, h/(h+2), 2√2·E₀).
pub fn bell_bound(h: f64, lambda: f64, a_z: f64) -> Result<Vec<f64>, String> {
    let e0 = correlator_amplitude(h, &bins(lambda, a_z)?).map_err(|e| e.to_string())?;
    Ok(vec![e0, correlator_envelope(h), 2.0 * SQRT_2 * e0])
}

/// Rows of (κ, |C₋₁|², |C₀|², |C₊₁|²) for κ in [k_min, k_max] (units of k0),
/// followed by the two equator transfers.
pub fn bragg_transfer(alpha: f64, sigma_us: f64, k_min: f64, k_max: f64, points: usize) -> Result<Vec<f64>, String> {
    let solver = RamanNath::from_config(&ExperimentConfig::default(), DEFAULT_ORDER).map_err(|e| e.to_string())?;
    let pulse = BraggPulse::new(alpha, sigma_us);
    let kappas = linspace(k_min, k_max, point_count(points)?);
    let rows = transfer_spectrum(&solver, &pulse, &kappas).map_err(|e| e.to_string())?;
    let (up, down) = solver.equator_transfer(&pulse).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = rows.iter().flat_map(|r| [r.kappa, r.minus_one, r.zero, r.plus_one]).collect();
    out.extend([up, down]);
    Ok(out)
}

#[wasm_bindgen(js_name = fringes)]
pub fn fringes_js(h: f64, lambda: f64, a_z: f64, points: usize) -> Result<Vec<f64>, JsError> {
    fringes(h, lambda, a_z, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = bellBound)]
pub fn bell_bound_js(h: f64, lambda: f64, a_z: f64) -> Result<Vec<f64>, JsError> {
    bell_bound(h, lambda, a_z).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = braggTransfer)]
pub fn bragg_transfer_js(
    alpha: f64,
    sigma_us: f64,
    k_min: f64,
    k_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    bragg_transfer(alpha, sigma_us, k_min, k_max, points).map_err(|e| JsError::new(&e))
}
