use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bell::{extract_e_and_s, BellSummary};
use super::bootstrap::bootstrap;
use super::Estimate;
use crate::config::ExperimentConfig;
use crate::continuous::{correlator_amplitude, BinSpec, DephasingTime};
use crate::error::{Error, Result};
use crate::simulate::{Campaign, PhaseRun};

/// Equatorial integration bins of both halos on a Cartesian velocity grid
/// centred on each halo, so that every bin's mirror image is also a bin.
#[derive(Debug, Clone)]
pub struct BinGrid {
    /// Bin edge lengths 2σ_dλ_d, mm/s.
    pub cell: [f64; 3],
    pub lambda: [f64; 3],
    /// Halo radius and centre offset, mm/s.
    pub radius: f64,
    /// Grid indices of the kept bins (same for both halos).
    pub indices: Vec<[i32; 3]>,
    lookup: HashMap<[i32; 3], u32>,
    /// For bin b, the bin at the mirrored position.
    mirror: Vec<u32>,
}

impl BinGrid {
    /// Bins whose centre is within the radial window of the halo radius and
    /// within θ_tol of the equator.
    pub fn new(cfg: &ExperimentConfig, lambda: [f64; 3]) -> Result<Self> {
        if lambda.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidConfig(format!("bin sizes must be positive, got {lambda:?}")));
        }
        let cell = [0, 1, 2].map(|d| 2.0 * cfg.sigma_corr_mm_s[d] * lambda[d]);
        let radius = cfg.constants.wavenumber_to_velocity(cfg.k0);
        let window = cfg.analysis.radial_window_mm_s;
        let sin_tol = cfg.theta_tol_deg.to_radians().sin();
        let reach = [0, 1, 2].map(|d| ((radius + window) / cell[d]).ceil() as i32);
        let mut indices = Vec::new();
        for i in -reach[0]..=reach[0] {
            for j in -reach[1]..=reach[1] {
                for k in -reach[2]..=reach[2] {
                    let r = [i as f64 * cell[0], j as f64 * cell[1], k as f64 * cell[2]];
                    let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                    if (n - radius).abs() <= window && r[2].abs() <= sin_tol * n {
                        indices.push([i, j, k]);
                    }
                }
            }
        }
        if indices.is_empty() {
            return Err(Error::InsufficientData("no bins fall inside the equatorial mask".into()));
        }
        let lookup: HashMap<[i32; 3], u32> = indices.iter().enumerate().map(|(b, &ix)| (ix, b as u32)).collect();
        let mirror = indices.iter().map(|&[i, j, k]| lookup[&[-i, -j, -k]]).collect();
        Ok(Self { cell, lambda, radius, indices, lookup, mirror })
    }

    pub fn bins_per_halo(&self) -> usize {
        self.indices.len()
    }

    /// Slot of a velocity: upper-halo bins are 0..n, lower-halo bins n..2n.
    pub fn locate(&self, v: [f64; 3]) -> Option<u32> {
        let (dz, offset) = if v[2] >= 0.0 { (-self.radius, 0) } else { (self.radius, self.indices.len() as u32) };
        let r = [v[0], v[1], v[2] + dz];
        let ix = [0, 1, 2].map(|d| (r[d] / self.cell[d]).round() as i32);
        self.lookup.get(&ix).map(|b| b + offset)
    }

    /// Partner slot in the same halo (back-to-back within that halo).
    pub fn same_partner(&self, slot: u32) -> u32 {
        let n = self.indices.len() as u32;
        if slot < n {
            self.mirror[slot as usize]
        } else {
            self.mirror[(slot - n) as usize] + n
        }
    }

    /// Lower-halo partner of an upper-halo slot.
    pub fn between_partner(&self, upper_slot: u32) -> u32 {
        self.mirror[upper_slot as usize] + self.indices.len() as u32
    }
}

/// Per-shot bin occupations of one phase and the per-shot coincidence sums.
#[derive(Debug, Clone)]
pub struct BinnedPhase {
    pub phase: f64,
    pub slots: usize,
    /// Sorted (slot, count) per shot.
    pub shots: Vec<Vec<(u32, u32)>>,
    /// Σ over same-halo bin pairs of n_L·n_R, per shot.
    pub same: Vec<f64>,
    /// Σ over between-halo bin pairs of n_L·n_R, per shot.
    pub between: Vec<f64>,
}

pub fn bin_phase(grid: &BinGrid, run: &PhaseRun) -> BinnedPhase {
    let n = grid.bins_per_halo() as u32;
    let mut shots = Vec::with_capacity(run.shots.len());
    let mut same = Vec::with_capacity(run.shots.len());
    let mut between = Vec::with_capacity(run.shots.len());
    for events in &run.shots {
        let mut slots: Vec<u32> = events.iter().filter_map(|e| grid.locate(e.velocity)).collect();
        slots.sort_unstable();
        let mut counts: Vec<(u32, u32)> = Vec::new();
        for s in slots {
            match counts.last_mut() {
                Some((last, c)) if *last == s => *c += 1,
                _ => counts.push((s, 1)),
            }
        }
        let count_of = |slot: u32| counts.binary_search_by_key(&slot, |x| x.0).map_or(0, |i| counts[i].1);
        let (mut s_same, mut s_between) = (0.0, 0.0);
        for &(slot, c) in &counts {
            let partner = grid.same_partner(slot);
            if partner > slot {
                s_same += (c * count_of(partner)) as f64;
            }
            if slot < n {
                s_between += (c * count_of(grid.between_partner(slot))) as f64;
            }
        }
        shots.push(counts);
        same.push(s_same);
        between.push(s_between);
    }
    BinnedPhase { phase: run.phase, slots: 2 * n as usize, shots, same, between }
}

impl BinnedPhase {
    /// Pooled normalised correlations (C_same, C_between) for shot multiplicities `w`.
    fn correlations(&self, grid: &BinGrid, w: Option<&[f64]>) -> (f64, f64) {
        let n = grid.bins_per_halo() as u32;
        let weight = |s: usize| w.map_or(1.0, |w| w[s]);
        let mut singles = vec![0.0; self.slots];
        let (mut total, mut num_same, mut num_between) = (0.0, 0.0, 0.0);
        for (s, counts) in self.shots.iter().enumerate() {
            let ws = weight(s);
            if ws == 0.0 {
                continue;
            }
            total += ws;
            num_same += ws * self.same[s];
            num_between += ws * self.between[s];
            for &(slot, c) in counts {
                singles[slot as usize] += ws * c as f64;
            }
        }
        let (mut den_same, mut den_between) = (0.0, 0.0);
        for slot in 0..self.slots as u32 {
            let partner = grid.same_partner(slot);
            if partner > slot {
                den_same += singles[slot as usize] * singles[partner as usize];
            }
            if slot < n {
                den_between += singles[slot as usize] * singles[grid.between_partner(slot) as usize];
            }
        }
        // ⟨n_L n_R⟩ / (⟨n_L⟩⟨n_R⟩), pooled over bin pairs
        (num_same * total / den_same, num_between * total / den_between)
    }

    fn empty_bins(&self) -> usize {
        let mut seen = vec![false; self.slots];
        for counts in &self.shots {
            for &(slot, _) in counts {
                seen[slot as usize] = true;
            }
        }
        seen.iter().filter(|s| !**s).count()
    }

    fn mean_singles(&self) -> f64 {
        let total: u64 = self.shots.iter().flatten().map(|&(_, c)| c as u64).sum();
        total as f64 / (self.shots.len() * self.slots) as f64
    }
}

fn correlator(same: f64, between: f64) -> f64 {
    (between - same) / (between + same)
}

/// Integrated same-halo and between-halo correlations of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub phase: f64,
    pub c_same: Estimate,
    pub c_between: Estimate,
    /// E = (C_between − C_same)/(C_between + C_same).
    pub e: Estimate,
    pub n_shots: usize,
    /// Bins that recorded no atoms in any shot; they drop out of the pooled sums.
    pub excluded_bins: usize,
    pub mean_singles_per_bin: f64,
}

/// Correlations with bootstrap errors from resampling shots.
pub fn estimate_correlations(
    grid: &BinGrid,
    binned: &BinnedPhase,
    resamples: usize,
    seed: u64,
) -> Result<CorrelationSet> {
    if binned.shots.len() < 2 {
        return Err(Error::InsufficientData(format!("phase {} has fewer than 2 shots", binned.phase)));
    }
    let (same, between) = binned.correlations(grid, None);
    if !same.is_finite() || !between.is_finite() {
        return Err(Error::InsufficientData(format!("no populated bin pairs at phase {}", binned.phase)));
    }
    let errs = bootstrap(binned.shots.len(), resamples, seed, |w| {
        let (s, b) = binned.correlations(grid, Some(w));
        vec![s, b, correlator(s, b)]
    })?;
    Ok(CorrelationSet {
        phase: binned.phase,
        c_same: Estimate::new(same, errs[0]),
        c_between: Estimate::new(between, errs[1]),
        e: Estimate::new(correlator(same, between), errs[2]),
        n_shots: binned.shots.len(),
        excluded_bins: binned.empty_bins(),
        mean_singles_per_bin: binned.mean_singles(),
    })
}

/// Destroys shot-to-shot correlations by moving every event to a random shot.
pub fn shuffle_shots(run: &PhaseRun, seed: u64) -> PhaseRun {
    let n = run.shots.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shots = vec![Vec::new(); n];
    for e in run.shots.iter().flatten() {
        let s = rng.random_range(0..n);
        let mut moved = *e;
        moved.shot_id = s as u32;
        shots[s].push(moved);
    }
    PhaseRun { phase: run.phase, shots }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub lambda: [f64; 3],
    pub resamples: usize,
    pub seed: u64,
}

impl AnalysisOptions {
    pub fn from_config(cfg: &ExperimentConfig, seed: u64) -> Self {
        Self { lambda: cfg.bin_lambda, resamples: cfg.analysis.bootstrap_resamples, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config_hash: String,
    pub store_config_hash: String,
    pub store_seed: u64,
    pub options: AnalysisOptions,
    pub bins_per_halo: usize,
    /// Correlator amplitude predicted by the closed-form model for the configured source.
    pub model_e0: f64,
    pub correlations: Vec<CorrelationSet>,
    pub summary: BellSummary,
}

/// Full pipeline: binning, correlations with bootstrap errors, fringe fits, E, V and S.
pub fn analyze_campaign(
    campaign: &Campaign,
    cfg: &ExperimentConfig,
    options: AnalysisOptions,
) -> Result<AnalysisReport> {
    if campaign.runs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "analysis needs at least 2 phases, store has {}",
            campaign.runs.len()
        )));
    }
    let grid = BinGrid::new(cfg, options.lambda)?;
    let correlations = campaign
        .runs
        .iter()
        .enumerate()
        .map(|(i, run)| {
            let binned = bin_phase(&grid, run);
            // a phase without coincidences has zero bootstrap spread and cannot enter the fits
            for (name, sums) in [("same-halo", &binned.same), ("between-halo", &binned.between)] {
                if sums.iter().all(|&c| c == 0.0) {
                    return Err(Error::InsufficientData(format!(
                        "no {name} coincidences at phase {} in {} shots",
                        binned.phase,
                        binned.shots.len()
                    )));
                }
            }
            estimate_correlations(&grid, &binned, options.resamples, options.seed.wrapping_add(i as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = extract_e_and_s(&correlations)?;
    let mut bins = BinSpec::from_config(cfg, DephasingTime::MirrorTime)?;
    bins.lambda = options.lambda;
    Ok(AnalysisReport {
        config_hash: cfg.hash(),
        store_config_hash: campaign.config_hash.clone(),
        store_seed: campaign.seed,
        options,
        bins_per_halo: grid.bins_per_halo(),
        model_e0: correlator_amplitude(cfg.source.correlation_height, &bins)?,
        correlations,
        summary,
    })
}
