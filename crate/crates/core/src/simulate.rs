//! Monte Carlo detection events. Each scattered pair is an independent
//! two-atom Bell pair: its momenta are drawn from the Gaussian pair-correlation
//! model, the pair acquires the global phase plus its momentum-dependent offset,
//! and the joint output port is drawn from the exact two-particle probabilities
//! of the interferometer. Unpaired atoms, detection losses and dark counts are
//! added on top.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::continuous::{gravitational_phase, phase_offset, PortPair};
use crate::error::{Error, Result};

/// Output port of a detected atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    P,
    PPrime,
    Q,
    QPrime,
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub shot_id: u32,
    /// Velocity, mm/s.
    pub velocity: [f64; 3],
    /// Known for simulated events; `None` once read back from a store.
    pub port: Option<Port>,
}

/// A generated pair, described by the upper-halo members p and p′ of its quartet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEvent {
    /// μm⁻¹
    pub k: Vector3<f64>,
    pub k_prime: Vector3<f64>,
    pub joint_phase: f64,
}

/// Region of relative momenta r (about a halo centre) populated by the source:
/// a spherical shell |r| ∈ [k0 − w, k0 + w] cut to the slab |r_z| ≤ z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceRegion {
    pub k0: f64,
    pub half_width: f64,
    pub half_height: f64,
}

impl SourceRegion {
    pub fn outer(&self) -> f64 {
        self.k0 + self.half_width
    }

    pub fn inner(&self) -> f64 {
        (self.k0 - self.half_width).max(0.0)
    }

    pub fn contains(&self, r: &Vector3<f64>) -> bool {
        let n = r.norm();
        n <= self.outer() && n >= self.inner() && r.z.abs() <= self.half_height
    }

    /// Exact volume, μm⁻³.
    pub fn volume(&self) -> f64 {
        // ball of radius R cut to |z| ≤ Z: π(2R²Z' − 2Z'³/3), Z' = min(Z, R)
        let cut = |r: f64| {
            let z = self.half_height.min(r);
            PI * (2.0 * r * r * z - 2.0 * z * z * z / 3.0)
        };
        cut(self.outer()) - cut(self.inner())
    }

    /// Uniform sample by rejection from the bounding box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector3<f64> {
        let (ro, z) = (self.outer(), self.half_height.min(self.outer()));
        loop {
            let r = Vector3::new(rng.random_range(-ro..ro), rng.random_range(-ro..ro), rng.random_range(-z..z));
            if self.contains(&r) {
                return r;
            }
        }
    }
}

/// Per-shot generation model derived from an [`ExperimentConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub k0: f64,
    /// Correlation widths, μm⁻¹.
    pub sigma: [f64; 3],
    pub region: SourceRegion,
    /// Mean number of pairs per shot.
    pub pairs_per_shot: f64,
    /// Mean number of unpaired atoms per halo per shot.
    pub unpaired_per_halo: f64,
    pub detection_efficiency: f64,
    /// Mean dark counts per halo bounding box per shot.
    pub dark_per_halo: f64,
    /// Phase added to every pair (gravity), rad.
    pub phase_shift: f64,
    /// φ(k,k′) = slope·(k_z + k′_z − 2k0).
    pub dephasing_slope: f64,
    /// Velocity per unit wavenumber, mm/s per μm⁻¹.
    pub velocity_per_k: f64,
}

impl SourceModel {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let s = &cfg.source;
        let sigma = cfg.sigma_k();
        let c = &cfg.constants;
        let region = SourceRegion {
            k0: cfg.k0,
            half_width: c.velocity_to_wavenumber(s.shell_halfwidth_mm_s),
            half_height: c.velocity_to_wavenumber(s.slab_halfheight_mm_s),
        };
        if region.half_height >= cfg.k0 {
            return Err(Error::InvalidConfig(
                "source slab half-height must be below k0 so the two halos do not overlap".into(),
            ));
        }
        let h = s.correlation_height;
        let occupancy = s.mode_occupancy.unwrap_or(1.0 / h);
        let coherence_volume = (2.0 * PI).powf(1.5) * sigma.iter().product::<f64>();
        // total single-atom density n0 per halo and the part carried by pairs
        let n0 = occupancy / coherence_volume;
        let pair_density = (h * occupancy).min(1.0) * n0;
        let volume = region.volume();
        let phase_shift = if cfg.include_gravity { gravitational_phase(cfg)?.global } else { 0.0 };
        // dephasing of a pair whose axial sum misses 2k0 by d: φ = slope·d
        let dephasing_slope = phase_offset(cfg.k0 + 0.5, cfg.k0 + 0.5, PortPair::PPPrime, cfg);
        let velocity_per_k = c.wavenumber_to_velocity(1.0);
        // dark counts: rate·T²·Δv_xΔv_y·Δv_z/g per velocity volume
        let g_mm = c.g_accel * 1e3;
        let dark_density_v = cfg.dark_rate_per_mm2_s * cfg.fall_time_s.powi(2) / g_mm;
        let ro = region.outer();
        let box_volume_k = (2.0 * ro) * (2.0 * ro) * (2.0 * region.half_height);
        let dark_per_halo = dark_density_v * box_volume_k * velocity_per_k.powi(3);
        Ok(Self {
            k0: cfg.k0,
            sigma,
            region,
            pairs_per_shot: pair_density * volume,
            unpaired_per_halo: (n0 - pair_density).max(0.0) * volume,
            detection_efficiency: cfg.detection_efficiency,
            dark_per_halo,
            phase_shift,
            dephasing_slope,
            velocity_per_k,
        })
    }

    /// Dark counts expected in one velocity-space cell of the given size (mm/s).
    pub fn dark_counts_in_cell(&self, cell_mm_s: [f64; 3]) -> f64 {
        let ro = self.region.outer();
        let box_v = (2.0 * ro) * (2.0 * ro) * (2.0 * self.region.half_height) * self.velocity_per_k.powi(3);
        self.dark_per_halo / box_v * cell_mm_s.iter().product::<f64>()
    }

    fn centre(&self, upper: bool) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, if upper { self.k0 } else { -self.k0 })
    }

    /// Draws one pair at global phase `phi`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, phi: f64, rng: &mut R) -> PairEvent {
        let r = self.region.sample(rng);
        let delta =
            Vector3::new(gaussian(rng) * self.sigma[0], gaussian(rng) * self.sigma[1], gaussian(rng) * self.sigma[2]);
        let c = self.centre(true);
        let joint_phase = phi + self.phase_shift + self.dephasing_slope * delta.z;
        PairEvent { k: c + r, k_prime: c - r + delta, joint_phase }
    }

    /// Draws the joint output ports of a pair: (p,p′) and (q,q′) each with
    /// ½sin²(Φ/2), (p,q′) and (p′,q) each with ½cos²(Φ/2).
    pub fn sample_ports<R: Rng + ?Sized>(&self, pair: &PairEvent, rng: &mut R) -> [(Port, Vector3<f64>); 2] {
        let shift = Vector3::new(0.0, 0.0, 2.0 * self.k0);
        let s2 = (0.5 * pair.joint_phase).sin().powi(2);
        let u: f64 = rng.random();
        let (p, pp) = (pair.k, pair.k_prime);
        let (q, qp) = (p - shift, pp - shift);
        if u < 0.5 * s2 {
            [(Port::P, p), (Port::PPrime, pp)]
        } else if u < s2 {
            [(Port::Q, q), (Port::QPrime, qp)]
        } else if u < 0.5 * (1.0 + s2) {
            [(Port::P, p), (Port::QPrime, qp)]
        } else {
            [(Port::PPrime, pp), (Port::Q, q)]
        }
    }

    /// All detections of one shot.
    pub fn generate_shot<R: Rng + ?Sized>(&self, phi: f64, shot_id: u32, rng: &mut R) -> Vec<DetectionEvent> {
        let eta = self.detection_efficiency;
        let mut out = Vec::new();
        let emit = |port: Port, k: Vector3<f64>, out: &mut Vec<DetectionEvent>| {
            let v = k * self.velocity_per_k;
            out.push(DetectionEvent { shot_id, velocity: [v.x, v.y, v.z], port: Some(port) });
        };
        let n_pairs = poisson(self.pairs_per_shot, rng);
        for _ in 0..n_pairs {
            let pair = self.sample_pair(phi, rng);
            for (port, k) in self.sample_ports(&pair, rng) {
                if rng.random::<f64>() < eta {
                    emit(port, k, &mut out);
                }
            }
        }
        for upper in [true, false] {
            let c = self.centre(upper);
            let n = poisson(self.unpaired_per_halo * eta, rng);
            for _ in 0..n {
                emit(Port::Background, c + self.region.sample(rng), &mut out);
            }
            let ro = self.region.outer();
            let z = self.region.half_height;
            for _ in 0..poisson(self.dark_per_halo, rng) {
                let r = Vector3::new(rng.random_range(-ro..ro), rng.random_range(-ro..ro), rng.random_range(-z..z));
                emit(Port::Background, c + r, &mut out);
            }
        }
        out
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Independent random stream for one (phase, shot) under a campaign seed.
pub fn shot_rng(seed: u64, phase_index: usize, shot: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((phase_index as u64) << 32) | shot as u64);
    rng
}

/// Detections of a campaign at one global phase, grouped by shot.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRun {
    pub phase: f64,
    pub shots: Vec<Vec<DetectionEvent>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub config_hash: String,
    pub seed: u64,
    pub runs: Vec<PhaseRun>,
}

impl Campaign {
    pub fn total_events(&self) -> usize {
        self.runs.iter().flat_map(|r| &r.shots).map(Vec::len).sum()
    }
}

/// Simulates `shots_per_phase` shots at each phase. Deterministic in `seed`
/// regardless of thread scheduling.
pub fn run_campaign(cfg: &ExperimentConfig, phases: &[f64], shots_per_phase: u32, seed: u64) -> Result<Campaign> {
    if shots_per_phase == 0 {
        return Err(Error::InvalidConfig("shots per phase must be at least 1".into()));
    }
    if phases.is_empty() {
        return Err(Error::InvalidConfig("no phases requested".into()));
    }
    let model = SourceModel::from_config(cfg)?;
    let runs = phases
        .iter()
        .enumerate()
        .map(|(pi, &phase)| {
            let shots = (0..shots_per_phase)
                .into_par_iter()
                .map(|s| model.generate_shot(phase, s, &mut shot_rng(seed, pi, s)))
                .collect();
            PhaseRun { phase, shots }
        })
        .collect();
    Ok(Campaign { config_hash: cfg.hash(), seed, runs })
}
