//! Faddeeva function w(z) = e^{−z²} erfc(−iz), complex erf and Dawson's integral.
//!
//! w is evaluated with Weideman's rational approximation (SIAM J. Numer. Anal.
//! 31, 1994): a truncated expansion in Z = (L+iz)/(L−iz) whose coefficients are
//! Fourier coefficients of e^{−t²}(L²+t²) under t = L·tan(θ/2). Valid for
//! Im z ≥ 0; the lower half plane follows from reflection.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Number of expansion terms. Chosen so that |Δw| stays near 1e-15 over |z| ≤ 30.
const TERMS: usize = 48;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

struct Weideman {
    l: f64,
    /// Coefficients of Z^0 .. Z^{N−1}.
    coeffs: Vec<f64>,
}

fn weideman() -> &'static Weideman {
    static W: OnceLock<Weideman> = OnceLock::new();
    W.get_or_init(|| {
        let n = TERMS;
        let m = 2 * n;
        let l = (n as f64 / std::f64::consts::SQRT_2).sqrt();
        // samples f(t_k), k = −M+1 .. M−1, plus a zero at θ = −π
        let samples: Vec<(f64, f64)> = (-(m as i64) + 1..m as i64)
            .map(|k| {
                let theta = k as f64 * PI / m as f64;
                let t = l * (0.5 * theta).tan();
                (theta, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let mut coeffs = vec![0.0; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let order = (j + 1) as f64;
            let s: f64 = samples.iter().map(|&(th, f)| f * (order * th).cos()).sum();
            *c = s / (2 * m) as f64;
        }
        Weideman { l, coeffs }
    })
}

/// Faddeeva function w(z) = e^{−z²}·erfc(−iz).
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        // w(z) = 2e^{−z²} − w(−z)
        return 2.0 * (-z * z).exp() - faddeeva_upper(-z);
    }
    faddeeva_upper(z)
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    let w = weideman();
    let iz = Complex64::i() * z;
    let denom = w.l - iz;
    let big_z = (w.l + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in w.coeffs.iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

/// Complex error function.
pub fn erf_complex(z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        return erf_series(z);
    }
    if z.re >= 0.0 {
        Complex64::new(1.0, 0.0) - (-z * z).exp() * faddeeva(Complex64::i() * z)
    } else {
        -(Complex64::new(1.0, 0.0) - (-z * z).exp() * faddeeva(-Complex64::i() * z))
    }
}

/// Maclaurin series 2/√π Σ (−1)ⁿ z^{2n+1} / (n!(2n+1)), accurate for |z| ≲ 1.
fn erf_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..60 {
        let nf = n as f64;
        term = -term * z2 / nf;
        let add = term / (2.0 * nf + 1.0);
        sum += add;
        if add.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    2.0 * FRAC_1_SQRT_PI * sum
}

/// Real error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Dawson's integral F(x) = e^{−x²}∫₀ˣ e^{t²} dt.
pub fn dawson(x: f64) -> f64 {
    if x.abs() < 0.2 {
        // odd series x − 2x³/3 + 4x⁵/15 − 8x⁷/105 + ...
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        for n in 1..20 {
            term *= -2.0 * x2 / (2.0 * n as f64 + 1.0);
            sum += term;
        }
        return sum;
    }
    0.5 * PI.sqrt() * faddeeva(Complex64::new(x, 0.0)).im
}

/// e^{−s²}·erf(x + i s) for x ≥ 0, evaluated without forming the overflowing erf.
pub fn scaled_erf(x: f64, s: f64) -> Complex64 {
    let z = Complex64::new(x, s);
    if z.norm() < 1.0 {
        return (-s * s).exp() * erf_series(z);
    }
    // e^{−s²}(1 − e^{−z²} w(iz)) with e^{−s²}e^{−z²} = e^{−x²}e^{−2ixs}
    let phase = Complex64::from_polar((-x * x).exp(), -2.0 * x * s);
    (-s * s).exp() - phase * faddeeva(Complex64::i() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    /// erf(x+iy) = erf(x) + (2i/√π) e^{−x²} ∫₀^y e^{t²} e^{−2ixt} dt
    fn erf_oracle(z: Complex64) -> Complex64 {
        let g = GaussLegendre::new(24);
        let (x, y) = (z.re, z.im);
        let panels = (8.0 * (1.0 + y.abs() * (1.0 + x.abs()))).ceil() as usize;
        let re = g.integrate(0.0, y, panels, |t| (t * t - x * x).exp() * (2.0 * x * t).cos());
        let im = g.integrate(0.0, y, panels, |t| -(t * t - x * x).exp() * (2.0 * x * t).sin());
        Complex64::new(erf(x), 0.0) + 2.0 * FRAC_1_SQRT_PI * Complex64::i() * Complex64::new(re, im)
    }

    /// F(x) = ∫₀ˣ e^{(t−x)(t+x)} dt
    fn dawson_oracle(x: f64) -> f64 {
        let g = GaussLegendre::new(24);
        g.integrate(0.0, x, 40, |t| ((t - x) * (t + x)).exp())
    }

    #[test]
    fn known_values() {
        // w(0) = 1, w(i) = e·erfc(1)
        assert!(close(faddeeva(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0), 1e-14));
        let erfc1 = 0.157_299_207_050_285_13;
        assert!(close(faddeeva(Complex64::new(0.0, 1.0)), Complex64::new(std::f64::consts::E * erfc1, 0.0), 1e-14));
        // F(1) = 0.5380795069127684
        assert!((dawson(1.0) - 0.538_079_506_912_768_4).abs() < 1e-14);
        assert!((erf_complex(Complex64::new(1.0, 0.0)).re - 0.842_700_792_949_714_9).abs() < 1e-14);
    }

    #[test]
    fn dawson_matches_quadrature() {
        let mut x = -10.0;
        while x <= 10.0 {
            let got = dawson(x);
            let want = dawson_oracle(x);
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "x={x}: {got} vs {want}");
            x += 0.137;
        }
    }

    #[test]
    fn complex_erf_matches_quadrature() {
        for i in 0..=40 {
            for j in 0..=20 {
                let z = Complex64::new(-4.0 + 0.2 * i as f64, -5.0 + 0.5 * j as f64);
                let got = erf_complex(z);
                let want = erf_oracle(z);
                assert!(close(got, want, 1e-12), "z={z}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn scaled_erf_is_stable() {
        for &(x, s) in &[(0.3, 0.2), (0.85, 1.7), (0.85, 20.0), (1.2, 42.0), (5.0, 3.0)] {
            let got = scaled_erf(x, s);
            if s < 10.0 {
                let want = (-s * s).exp() * erf_oracle(Complex64::new(x, s));
                assert!(close(got, want, 1e-12), "({x},{s}): {got} vs {want}");
            }
            assert!(got.re.is_finite() && got.im.is_finite());
        }
    }

    proptest! {
        #[test]
        fn reflection_symmetry(x in -8.0f64..8.0, y in 0.0f64..8.0) {
            let z = Complex64::new(x, y);
            // w(−z̄) = conj w(z)
            let a = faddeeva(-z.conj());
            let b = faddeeva(z).conj();
            prop_assert!((a - b).norm() < 1e-15);
            // erf is odd
            prop_assert!((erf_complex(-z) + erf_complex(z)).norm() < 1e-13 * (1.0 + erf_complex(z).norm()));
        }

        #[test]
        fn series_and_faddeeva_agree(r in 0.6f64..1.4, t in 0.0f64..std::f64::consts::TAU) {
            let z = Complex64::from_polar(r, t);
            let a = erf_series(z);
            let b = if z.re >= 0.0 {
                Complex64::new(1.0, 0.0) - (-z * z).exp() * faddeeva(Complex64::i() * z)
            } else {
                -(Complex64::new(1.0, 0.0) - (-z * z).exp() * faddeeva(-Complex64::i() * z))
            };
            prop_assert!((a - b).norm() < 1e-13);
        }
    }
}
