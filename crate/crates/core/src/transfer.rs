//! Ideal (instantaneous) Bragg optics: pulse unitaries, the mirror-beamsplitter
//! sequence of each interferometer arm, and propagation of quartet states.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::squeezed::{Occupation, QuartetState, P, P_PRIME, Q, Q_PRIME};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryKind {
    Pulse,
    Mirror,
    Beamsplitter,
    Composite,
    InverseComposite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeUnitary {
    pub matrix: Matrix2<Complex64>,
    pub kind: UnitaryKind,
}

impl TwoModeUnitary {
    pub fn deviation_from_unitarity(&self) -> f64 {
        let prod = self.matrix * self.matrix.adjoint();
        (prod - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> Complex64 {
        self.matrix.determinant()
    }

    pub fn compose(&self, rhs: &TwoModeUnitary) -> TwoModeUnitary {
        TwoModeUnitary { matrix: self.matrix * rhs.matrix, kind: UnitaryKind::Composite }
    }

    pub fn inverse(&self) -> TwoModeUnitary {
        let kind = match self.kind {
            UnitaryKind::Composite => UnitaryKind::InverseComposite,
            UnitaryKind::InverseComposite => UnitaryKind::Composite,
            k => k,
        };
        TwoModeUnitary { matrix: self.matrix.adjoint(), kind }
    }
}

/// Two-level pulse propagator with area Ωt and lattice phase φ.
pub fn evolution_operator(pulse_area: f64, phi: f64) -> TwoModeUnitary {
    let (s, c) = (0.5 * pulse_area).sin_cos();
    let i = Complex64::i();
    let matrix = Matrix2::new(
        Complex64::new(c, 0.0),
        -i * Complex64::from_polar(1.0, -phi) * s,
        -i * Complex64::from_polar(1.0, phi) * s,
        Complex64::new(c, 0.0),
    );
    let kind = if (pulse_area - PI).abs() < 1e-15 {
        UnitaryKind::Mirror
    } else if (pulse_area - FRAC_PI_2).abs() < 1e-15 {
        UnitaryKind::Beamsplitter
    } else {
        UnitaryKind::Pulse
    };
    TwoModeUnitary { matrix, kind }
}

/// Mirror (phase `phi_pi`) followed by beamsplitter (phase `phi_half`); returns A and A⁻¹.
pub fn interferometer_map(phi_half: f64, phi_pi: f64) -> (TwoModeUnitary, TwoModeUnitary) {
    let a = evolution_operator(FRAC_PI_2, phi_half).compose(&evolution_operator(PI, phi_pi));
    (a, a.inverse())
}

/// Heisenberg map b = M a of the quartet, ordered (p, p′, q, q′). The (p, q)
/// arm carries beamsplitter phase φ_R, the (p′, q′) arm φ_L; mirrors have phase π/2.
pub fn output_mode_map(phi_l: f64, phi_r: f64) -> Matrix4<Complex64> {
    let right = interferometer_map(phi_r, FRAC_PI_2).0.matrix.adjoint();
    let left = interferometer_map(phi_l, FRAC_PI_2).0.matrix.adjoint();
    let mut m = Matrix4::zeros();
    for (arm, (a, b)) in [(right, (P, Q)), (left, (P_PRIME, Q_PRIME))] {
        m[(a, a)] = arm[(0, 0)];
        m[(a, b)] = arm[(0, 1)];
        m[(b, a)] = arm[(1, 0)];
        m[(b, b)] = arm[(1, 1)];
    }
    m
}

/// Propagates a Fock-basis state through the interferometer. Each input creation
/// operator is replaced by a†_j = Σ_k M_kj b†_k and the products are expanded.
pub fn propagate(state: &QuartetState, phi_l: f64, phi_r: f64) -> QuartetState {
    let m = output_mode_map(phi_l, phi_r);
    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, amp) in &state.amplitudes {
        let mut poly: BTreeMap<Occupation, Complex64> = BTreeMap::from([([0; 4], *amp)]);
        let mut factorial = 1.0;
        for j in 0..4 {
            for n in 0..occ[j] {
                factorial *= (n + 1) as f64;
                let mut next = BTreeMap::new();
                for (o, a) in &poly {
                    for k in 0..4 {
                        let c = m[(k, j)];
                        if c == Complex64::default() {
                            continue;
                        }
                        let mut raised = *o;
                        raised[k] += 1;
                        *next.entry(raised).or_insert(Complex64::default()) += c * a * (raised[k] as f64).sqrt();
                    }
                }
                poly = next;
            }
        }
        let scale = 1.0 / factorial.sqrt();
        for (o, a) in poly {
            *out.entry(o).or_default() += a * scale;
        }
    }
    out.retain(|_, a| a.norm_sqr() > 1e-300);
    QuartetState { amplitudes: out, n_max: state.n_max, tail: state.tail }
}

/// The Bell pair after both arms, in the output Fock basis.
pub fn propagate_bell_state(phi_l: f64, phi_r: f64) -> QuartetState {
    propagate(&QuartetState::bell(), phi_l, phi_r)
}

/// Closed-form coefficients of the propagated Bell pair on
/// (|p,p′⟩, |p,q′⟩, |p′,q⟩, |q,q′⟩), up to per-port phase conventions.
pub fn bell_output_coefficients(phi_l: f64, phi_r: f64) -> [Complex64; 4] {
    let i = Complex64::i();
    let s = 0.5 * FRAC_1_SQRT_2;
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let big = phi_l + phi_r;
    [(1.0 - e(big)) * s, i * (e(phi_l) + e(-phi_r)) * s, i * (e(phi_r) + e(-phi_l)) * s, (1.0 - e(-big)) * s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    #[test]
    fn zero_area_is_identity() {
        assert!(close(&evolution_operator(0.0, 1.3).matrix, &Matrix2::identity(), 1e-15));
    }

    #[test]
    fn mirror_and_beamsplitter() {
        let m = evolution_operator(PI, FRAC_PI_2);
        assert_eq!(m.kind, UnitaryKind::Mirror);
        assert!(m.matrix[(0, 0)].norm() < 1e-15);
        assert!((m.matrix[(0, 1)] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((m.matrix[(1, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let b = evolution_operator(FRAC_PI_2, 0.7);
        assert!(b.matrix.iter().all(|z| (z.norm() - FRAC_1_SQRT_2).abs() < 1e-15));
    }

    #[test]
    fn composite_structure() {
        let (a, inv) = interferometer_map(0.0, FRAC_PI_2);
        assert!(close(&(a.matrix * inv.matrix), &Matrix2::identity(), 1e-12));
        // φ = 0, mirror phase π/2: (1/√2)[[−i, −1], [1, i]]
        let want = Matrix2::new(
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ) * Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(&a.matrix, &want, 1e-15));
    }

    #[test]
    fn opposite_phases_compose_to_square() {
        for phi in [0.3, 1.1, -2.0] {
            let (p, _) = interferometer_map(phi, FRAC_PI_2);
            let (m, _) = interferometer_map(-phi, FRAC_PI_2);
            let (z, _) = interferometer_map(0.0, FRAC_PI_2);
            let lhs = p.matrix * m.matrix;
            let rhs = z.matrix * z.matrix;
            // equal up to a global phase
            let g = lhs[(0, 0)] / rhs[(0, 0)];
            assert!((g.norm() - 1.0).abs() < 1e-12);
            assert!(close(&lhs, &(rhs * g), 1e-12));
        }
    }

    #[test]
    fn bell_output_at_zero_phase() {
        let out = propagate_bell_state(0.0, 0.0);
        assert!(out.amplitude([1, 1, 0, 0]).norm() < 1e-15);
        assert!(out.amplitude([0, 0, 1, 1]).norm() < 1e-15);
        assert!((out.amplitude([1, 0, 0, 1]).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.amplitude([0, 1, 1, 0]).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn output_matches_closed_form_and_is_normalized() {
        for i in 0..12 {
            for j in 0..12 {
                let (l, r) = (i as f64 * PI / 6.0, j as f64 * PI / 6.0);
                let out = propagate_bell_state(l, r);
                assert!((out.norm_sqr() - 1.0).abs() < 1e-14);
                let c = bell_output_coefficients(l, r);
                let got = [[1, 1, 0, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1]].map(|o| out.amplitude(o).norm());
                for (g, w) in got.iter().zip(c) {
                    assert!((g - w.norm()).abs() < 1e-14);
                }
                let want = 0.5 * (0.5 * (l + r)).sin().powi(2);
                assert!((out.amplitude([1, 1, 0, 0]).norm_sqr() - want).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn pulses_are_unitary(area in -10.0f64..10.0, phi in -10.0f64..10.0) {
            let u = evolution_operator(area, phi);
            prop_assert!(u.deviation_from_unitarity() < 1e-12);
            prop_assert!((u.determinant().norm() - 1.0).abs() < 1e-12);
            let (a, _) = interferometer_map(phi, area);
            prop_assert!(a.deviation_from_unitarity() < 1e-12);
        }

        #[test]
        fn depends_only_on_global_phase(l in -4.0f64..4.0, r in -4.0f64..4.0, d in -4.0f64..4.0) {
            let a = propagate_bell_state(l, r);
            let b = propagate_bell_state(l + d, r - d);
            for o in [[1, 1, 0, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1]] {
                prop_assert!((a.amplitude(o).norm_sqr() - b.amplitude(o).norm_sqr()).abs() < 1e-13);
            }
            let c = propagate_bell_state(l + 2.0 * PI, r);
            prop_assert!((a.amplitude([1, 1, 0, 0]).norm_sqr() - c.amplitude([1, 1, 0, 0]).norm_sqr()).abs() < 1e-13);
        }

        #[test]
        fn mirror_phase_is_irrelevant(l in -4.0f64..4.0, r in -4.0f64..4.0, mp in -4.0f64..4.0) {
            // both arms share the mirror phase; pair probabilities are unchanged
            let arm = |phi: f64| interferometer_map(phi, mp).0.matrix.adjoint();
            let (ar, al) = (arm(r), arm(l));
            let pp = (ar[(0, 0)] * al[(0, 0)] + ar[(0, 1)] * al[(0, 1)]).norm_sqr() / 2.0;
            let want = 0.5 * (0.5 * (l + r)).sin().powi(2);
            prop_assert!((pp - want).abs() < 1e-13);
        }
    }
}
