use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{linspace, BraggPulse, RamanNath};
use crate::error::{Error, Result};
use crate::optimize::nelder_mead;

/// Box of (σ, α) explored by [`find_pulse`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub sigma_us: (f64, f64),
    pub alpha: (f64, f64),
    /// Points per axis of the initial grid.
    pub grid: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self { sigma_us: (0.5, 6.0), alpha: (0.05, 3.0), grid: 24 }
    }
}

const TOLERANCE: f64 = 1e-3;

/// Finds a pulse whose transfer at both equators is `target`: a coarse grid
/// search followed by Nelder-Mead refinement from the best few grid points.
/// `guess` is tried as an extra starting point.
pub fn find_pulse(
    solver: &RamanNath,
    target: f64,
    guess: Option<(f64, f64)>,
    bounds: SearchBounds,
) -> Result<BraggPulse> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Domain(format!("target transfer must lie in [0, 1], got {target}")));
    }
    if let Some((sigma, alpha)) = guess {
        let p = BraggPulse::new(alpha, sigma);
        if residual(solver, &p, target) < TOLERANCE * TOLERANCE {
            return Ok(p);
        }
    }
    let (s0, s1) = bounds.sigma_us;
    let (a0, a1) = bounds.alpha;
    let inside = |s: f64, a: f64| s >= s0 && s <= s1 && a >= a0.min(0.0) && a <= a1;
    let cost = |x: &[f64]| {
        if !inside(x[0], x[1]) {
            return 1e3;
        }
        residual(solver, &BraggPulse::new(x[1], x[0]), target)
    };

    let grid: Vec<(f64, f64)> = linspace(s0, s1, bounds.grid)
        .into_iter()
        .flat_map(|s| linspace(a0, a1, bounds.grid).into_iter().map(move |a| (s, a)))
        .collect();
    let mut scored: Vec<(f64, (f64, f64))> = grid.par_iter().map(|&(s, a)| (cost(&[s, a]), (s, a))).collect();
    if let Some(g) = guess {
        scored.push((cost(&[g.0, g.1]), g));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let ds = (s1 - s0) / bounds.grid.max(2) as f64;
    let da = (a1 - a0) / bounds.grid.max(2) as f64;
    let mut best = (f64::INFINITY, (s0, a0));
    for &(_, (s, a)) in scored.iter().take(4) {
        let m = nelder_mead(cost, &[s, a], &[0.5 * ds, 0.5 * da], 1e-12, 400)?;
        if m.value < best.0 {
            best = (m.value, (m.x[0], m.x[1]));
        }
        if best.0.sqrt() < 0.1 * TOLERANCE {
            break;
        }
    }
    let pulse = BraggPulse::new(best.1 .1, best.1 .0);
    let (up, down) = solver.equator_transfer(&pulse)?;
    let worst = (up - target).abs().max((down - target).abs());
    if worst >= TOLERANCE {
        return Err(Error::SearchFailed { best_residual: worst });
    }
    Ok(pulse)
}

fn residual(solver: &RamanNath, p: &BraggPulse, target: f64) -> f64 {
    match solver.equator_transfer(p) {
        Ok((u, d)) => (u - target).powi(2) + (d - target).powi(2),
        Err(_) => 1e3,
    }
}
