//! Discrete four-mode model: the two-mode squeezed vacua of the twin halos
//! reduced to a quartet (p, p′, q, q′), its Bell-state truncation, and exact
//! Fock-space pair correlations.

use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transfer;

/// Occupations (n_p, n_p′, n_q, n_q′).
pub type Occupation = [u32; 4];

pub const P: usize = 0;
pub const P_PRIME: usize = 1;
pub const Q: usize = 2;
pub const Q_PRIME: usize = 3;

/// Largest Fock truncation used when building squeezed states.
pub const MAX_TRUNCATION: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    mu: f64,
}

impl SqueezeParams {
    /// μ = tanh(ζt₁) ∈ [0, 1).
    pub fn from_mu(mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::Domain(format!("squeeze amplitude must lie in [0, 1), got {mu}")));
        }
        Ok(Self { mu })
    }

    /// From the mode occupancy N̄ = μ²/(1−μ²).
    pub fn from_n_bar(n_bar: f64) -> Result<Self> {
        if !(n_bar >= 0.0 && n_bar.is_finite()) {
            return Err(Error::Domain(format!("occupancy must be finite and >= 0, got {n_bar}")));
        }
        Self::from_mu((n_bar / (1.0 + n_bar)).sqrt())
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n_bar(&self) -> f64 {
        let m2 = self.mu * self.mu;
        m2 / (1.0 - m2)
    }

    /// Correlation height 1/μ²; infinite for the vacuum.
    pub fn h(&self) -> f64 {
        1.0 / (self.mu * self.mu)
    }

    /// Smallest n_max whose discarded weight is below `tail`, capped at [`MAX_TRUNCATION`].
    pub fn adaptive_truncation(&self, tail: f64) -> u32 {
        (1..=MAX_TRUNCATION).find(|&n| truncation_tail(self.mu, n) < tail).unwrap_or(MAX_TRUNCATION)
    }
}

/// Σ_{n+m > n_max} |(1−μ²)μ^{n+m}|² in closed form.
pub fn truncation_tail(mu: f64, n_max: u32) -> f64 {
    let x = mu * mu;
    let n = n_max as f64;
    x.powi(n_max as i32 + 1) * ((n + 2.0) - (n + 1.0) * x)
}

/// Four momentum modes coupled by the Bragg optics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeQuartet {
    pub p: Vector3<f64>,
    pub p_prime: Vector3<f64>,
    pub q: Vector3<f64>,
    pub q_prime: Vector3<f64>,
}

impl ModeQuartet {
    /// Builds the quartet from the upper-halo mode `p`: p′ = 2k0ẑ − p, q = p − 2k0ẑ, q′ = −p.
    pub fn from_upper(p: Vector3<f64>, k0: f64) -> Self {
        let kz = Vector3::new(0.0, 0.0, 2.0 * k0);
        let p_prime = kz - p;
        Self { p, p_prime, q: p - kz, q_prime: p_prime - kz }
    }

    /// Checks the resonance conditions p + p′ = 2k0ẑ, q + q′ = −2k0ẑ, p − q = p′ − q′ = 2k0ẑ.
    pub fn validate(&self, k0: f64, tol: f64) -> Result<()> {
        let kz = Vector3::new(0.0, 0.0, 2.0 * k0);
        let checks = [
            ("p + p′ = 2k0ẑ", self.p + self.p_prime - kz),
            ("q + q′ = −2k0ẑ", self.q + self.q_prime + kz),
            ("p − q = 2k0ẑ", self.p - self.q - kz),
            ("p′ − q′ = 2k0ẑ", self.p_prime - self.q_prime - kz),
        ];
        for (name, r) in checks {
            if r.norm() > tol {
                return Err(Error::Domain(format!("quartet violates {name} by {:.3e}", r.norm())));
            }
        }
        Ok(())
    }
}

/// A truncated state of the quartet in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuartetState {
    pub amplitudes: BTreeMap<Occupation, Complex64>,
    pub n_max: u32,
    /// Probability discarded by truncation before renormalisation.
    pub tail: f64,
}

impl QuartetState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, occ: Occupation) -> Complex64 {
        self.amplitudes.get(&occ).copied().unwrap_or_default()
    }

    /// (|1,1,0,0⟩ + |0,0,1,1⟩)/√2.
    pub fn bell() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let amplitudes = BTreeMap::from([([1, 1, 0, 0], a), ([0, 0, 1, 1], a)]);
        Self { amplitudes, n_max: 1, tail: 0.0 }
    }

    fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::DegenerateState("state has zero norm".into()));
        }
        for a in self.amplitudes.values_mut() {
            *a /= n;
        }
        Ok(())
    }
}

/// Product of two identical two-mode squeezed vacua: (1−μ²)μ^{n+m} on |n,n,m,m⟩, n + m ≤ n_max.
pub fn build_quartet_state(params: SqueezeParams, n_max: u32) -> Result<QuartetState> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let mu = params.mu;
    let norm = 1.0 - mu * mu;
    let mut amplitudes = BTreeMap::new();
    for n in 0..=n_max {
        for m in 0..=(n_max - n) {
            let a = norm * mu.powi((n + m) as i32);
            if a != 0.0 || (n, m) == (0, 0) {
                amplitudes.insert([n, n, m, m], Complex64::new(a, 0.0));
            }
        }
    }
    let mut state = QuartetState { amplitudes, n_max, tail: truncation_tail(mu, n_max) };
    state.normalize()?;
    Ok(state)
}

/// Keeps only the |1,1,0,0⟩ and |0,0,1,1⟩ components, renormalised.
pub fn truncate_to_bell(state: &QuartetState) -> Result<QuartetState> {
    let a = state.amplitude([1, 1, 0, 0]);
    let b = state.amplitude([0, 0, 1, 1]);
    if a.norm_sqr() + b.norm_sqr() == 0.0 {
        return Err(Error::DegenerateState("no weight in the single-pair sector".into()));
    }
    let mut out =
        QuartetState { amplitudes: BTreeMap::from([([1, 1, 0, 0], a), ([0, 0, 1, 1], b)]), n_max: 1, tail: 0.0 };
    out.normalize()?;
    Ok(out)
}

/// The four joint-detection correlations of the output ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortCorrelations {
    pub pp_prime: f64,
    pub qq_prime: f64,
    pub pq_prime: f64,
    pub p_prime_q: f64,
}

impl PortCorrelations {
    pub fn as_array(&self) -> [f64; 4] {
        [self.pp_prime, self.qq_prime, self.pq_prime, self.p_prime_q]
    }

    /// (C_pq′ + C_p′q − C_pp′ − C_qq′)/(sum of all four).
    pub fn correlator(&self) -> f64 {
        let s = self.pp_prime + self.qq_prime + self.pq_prime + self.p_prime_q;
        (self.pq_prime + self.p_prime_q - self.pp_prime - self.qq_prime) / s
    }
}

/// Normalised output correlations C/N̄² of the quartet for global phase φ_L + φ_R.
pub fn discrete_pair_correlations(params: SqueezeParams, phi_l: f64, phi_r: f64) -> Result<PortCorrelations> {
    if params.mu == 0.0 {
        return Err(Error::Domain("μ = 0: correlation height is infinite".into()));
    }
    let h = params.h();
    let half = 0.5 * (phi_l + phi_r);
    let same = 1.0 + h * half.sin().powi(2);
    let cross = 1.0 + h * half.cos().powi(2);
    Ok(PortCorrelations { pp_prime: same, qq_prime: same, pq_prime: cross, p_prime_q: cross })
}

/// Raw moments of the output ports for a given quartet state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMoments {
    /// ⟨b†_k b†_l b_l b_k⟩ for the four port pairs.
    pub pairs: PortCorrelations,
    /// ⟨b†_k b_k⟩ for p, p′, q, q′.
    pub singles: [f64; 4],
}

impl OracleMoments {
    /// Pair moments divided by the product of the corresponding single-port occupations.
    pub fn normalized(&self) -> PortCorrelations {
        let n = self.singles;
        PortCorrelations {
            pp_prime: self.pairs.pp_prime / (n[P] * n[P_PRIME]),
            qq_prime: self.pairs.qq_prime / (n[Q] * n[Q_PRIME]),
            pq_prime: self.pairs.pq_prime / (n[P] * n[Q_PRIME]),
            p_prime_q: self.pairs.p_prime_q / (n[P_PRIME] * n[Q]),
        }
    }
}

/// Exact output moments by brute force: the Heisenberg-picture output operators
/// b_k = Σ_j M_kj a_j are applied to the Fock amplitudes of `state`.
pub fn oracle_quartet_correlations(state: &QuartetState, phi_l: f64, phi_r: f64) -> OracleMoments {
    let m = transfer::output_mode_map(phi_l, phi_r);
    oracle_moments(state, &m)
}

/// Same as [`oracle_quartet_correlations`] for an arbitrary 4×4 output map.
pub fn oracle_moments(state: &QuartetState, m: &Matrix4<Complex64>) -> OracleMoments {
    let single: Vec<Sparse> = (0..4).map(|k| apply_output(&state.amplitudes, m, k)).collect();
    let singles = [0, 1, 2, 3].map(|k| norm_sqr(&single[k]));
    let pair = |k: usize, l: usize| norm_sqr(&apply_output(&single[k], m, l));
    OracleMoments {
        pairs: PortCorrelations {
            pp_prime: pair(P, P_PRIME),
            qq_prime: pair(Q, Q_PRIME),
            pq_prime: pair(P, Q_PRIME),
            p_prime_q: pair(P_PRIME, Q),
        },
        singles,
    }
}

type Sparse = BTreeMap<Occupation, Complex64>;

fn norm_sqr(s: &Sparse) -> f64 {
    s.values().map(|a| a.norm_sqr()).sum()
}

/// b_k|ψ⟩ with b_k = Σ_j M_kj a_j and a_j|n⟩ = √n_j |n − e_j⟩.
fn apply_output(state: &Sparse, m: &Matrix4<Complex64>, k: usize) -> Sparse {
    let mut out = Sparse::new();
    for (occ, amp) in state {
        for j in 0..4 {
            if occ[j] == 0 || m[(k, j)] == Complex64::default() {
                continue;
            }
            let mut lowered = *occ;
            lowered[j] -= 1;
            *out.entry(lowered).or_default() += m[(k, j)] * amp * (occ[j] as f64).sqrt();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn vacuum_state() {
        let s = build_quartet_state(SqueezeParams::from_mu(0.0).unwrap(), 3).unwrap();
        assert_eq!(s.amplitudes.len(), 1);
        assert_eq!(s.amplitude([0, 0, 0, 0]), Complex64::new(1.0, 0.0));
        assert!(matches!(truncate_to_bell(&s), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn amplitude_ratio() {
        let s = build_quartet_state(SqueezeParams::from_mu(0.3397).unwrap(), 10).unwrap();
        let r = s.amplitude([1, 1, 0, 0]) / s.amplitude([0, 0, 0, 0]);
        assert!((r.re - 0.3397).abs() < 1e-14 && r.im == 0.0);
        let p = SqueezeParams::from_mu(0.3397).unwrap();
        assert!((p.n_bar() - 0.1304).abs() < 1e-4);
        assert!((1.0 + p.h() - 9.67).abs() < 0.01);
    }

    #[test]
    fn second_order_enumeration() {
        let mu = 0.5;
        let s = build_quartet_state(SqueezeParams::from_mu(mu).unwrap(), 2).unwrap();
        let keys: Vec<_> = s.amplitudes.keys().copied().collect();
        assert_eq!(keys.len(), 6);
        for (n, m) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let a = s.amplitude([n, n, m, m]).re / s.amplitude([0, 0, 0, 0]).re;
            assert!((a - mu.powi((n + m) as i32)).abs() < 1e-15);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
        let direct: f64 = (0..200u32)
            .flat_map(|n| (0..200u32).map(move |m| (n, m)))
            .filter(|&(n, m)| n + m > 2)
            .map(|(n, m)| ((1.0 - mu * mu) * mu.powi((n + m) as i32)).powi(2))
            .sum();
        assert!((s.tail - direct).abs() < 1e-14);
    }

    #[test]
    fn bell_truncation() {
        for mu in [0.05, 0.3, 0.9] {
            let s = build_quartet_state(SqueezeParams::from_mu(mu).unwrap(), 6).unwrap();
            let b = truncate_to_bell(&s).unwrap();
            assert!((b.amplitude([1, 1, 0, 0]).re - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((b.amplitude([0, 0, 1, 1]).re - FRAC_1_SQRT_2).abs() < 1e-15);
            assert_eq!(b.amplitudes.len(), 2);
        }
    }

    #[test]
    fn rejects_unit_mu() {
        assert!(SqueezeParams::from_mu(1.0).is_err());
        assert!(SqueezeParams::from_mu(-0.1).is_err());
        assert!(discrete_pair_correlations(SqueezeParams::from_mu(0.0).unwrap(), 0.0, 0.0).is_err());
    }

    #[test]
    fn discrete_examples() {
        let p = SqueezeParams::from_mu(0.5).unwrap();
        let c = discrete_pair_correlations(p, 0.0, 0.0).unwrap();
        assert!((c.pp_prime - 1.0).abs() < 1e-15 && (c.pq_prime - 5.0).abs() < 1e-14);
        let d = discrete_pair_correlations(p, 0.3, PI - 0.3).unwrap();
        assert!((d.pp_prime - c.pq_prime).abs() < 1e-14 && (d.pq_prime - c.pp_prime).abs() < 1e-14);
    }

    #[test]
    fn bell_oracle_examples() {
        let b = QuartetState::bell();
        let c = oracle_quartet_correlations(&b, 0.0, 0.0).pairs;
        assert!(c.pp_prime.abs() < 1e-15 && c.qq_prime.abs() < 1e-15);
        assert!((c.pq_prime - 0.5).abs() < 1e-15 && (c.p_prime_q - 0.5).abs() < 1e-15);
        let c = oracle_quartet_correlations(&b, PI / 4.0, PI / 4.0).pairs;
        for v in c.as_array() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn full_state_matches_closed_form() {
        let p = SqueezeParams::from_mu(0.2).unwrap();
        let s = build_quartet_state(p, p.adaptive_truncation(1e-12)).unwrap();
        assert!(s.tail < 1e-12);
        for i in 0..12 {
            let phi = 2.0 * PI * i as f64 / 12.0;
            let o = oracle_quartet_correlations(&s, 0.4 * phi, 0.6 * phi).normalized();
            let d = discrete_pair_correlations(p, 0.4 * phi, 0.6 * phi).unwrap();
            for (a, b) in o.as_array().iter().zip(d.as_array()) {
                assert!(((a - b) / b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn quartet_geometry() {
        let q = ModeQuartet::from_upper(Vector3::new(3.0, 1.0, 4.5), 4.102);
        q.validate(4.102, 1e-12).unwrap();
        let mut bad = q;
        bad.q.z += 0.1;
        assert!(bad.validate(4.102, 1e-6).is_err());
    }

    proptest! {
        #[test]
        fn sum_rule(mu in 0.01f64..0.95, phi in 0.0f64..6.3) {
            let p = SqueezeParams::from_mu(mu).unwrap();
            let c = discrete_pair_correlations(p, phi, 0.0).unwrap();
            prop_assert!((c.pp_prime + c.pq_prime - (2.0 + p.h())).abs() < 1e-10 * p.h());
        }

        #[test]
        fn bell_sum_rule(phi_l in -7.0f64..7.0, phi_r in -7.0f64..7.0) {
            let c = oracle_quartet_correlations(&QuartetState::bell(), phi_l, phi_r).pairs;
            prop_assert!((c.pp_prime + c.pq_prime - 0.5).abs() < 1e-14);
            let want = 0.5 * (0.5 * (phi_l + phi_r)).sin().powi(2);
            prop_assert!((c.pp_prime - want).abs() < 1e-14);
        }

        #[test]
        fn halo_exchange_symmetry(mu in 0.0f64..0.9, n_max in 1u32..12) {
            let s = build_quartet_state(SqueezeParams::from_mu(mu).unwrap(), n_max).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            for (occ, a) in &s.amplitudes {
                prop_assert_eq!(occ[0], occ[1]);
                prop_assert_eq!(occ[2], occ[3]);
                let swapped = s.amplitude([occ[2], occ[3], occ[0], occ[1]]);
                prop_assert!((swapped - a).norm() < 1e-15);
            }
        }
    }
}
