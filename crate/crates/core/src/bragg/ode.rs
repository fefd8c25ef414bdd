//! Adaptive Dormand-Prince 5(4) integrator for complex linear systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Stage coefficients; the last row doubles as the 5th-order weights (FSAL).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between 5th- and 4th-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Integrates y′ = f(t, y) from `t0` to `t1` in place. `f(t, y, dy)` writes the derivative.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y: &mut [Complex64], tol: Tolerances) -> Result<Stats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; 7];
    let mut tmp = vec![Complex64::default(); n];
    let mut y5 = vec![Complex64::default(); n];
    let mut stats = Stats::default();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(stats);
    }
    let dir = span.signum();
    let mut t = t0;
    f(t, y, &mut k[0]);
    let mut h = initial_step(y, &k[0], span, tol);
    let mut err_prev: f64 = 1e-4;

    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::Integration { t, reason: "maximum number of steps exceeded".into() });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc += kj[i] * (h * A[s][j]);
                    }
                }
                tmp[i] = acc;
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
            if s == 6 {
                y5.copy_from_slice(&tmp);
            }
        }
        // error estimate
        let mut err = 0.0;
        for i in 0..n {
            let mut e = Complex64::default();
            for s in 0..7 {
                if E[s] != 0.0 {
                    e += k[s][i] * E[s];
                }
            }
            let scale = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
            err += (e * h).norm_sqr() / (scale * scale);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            k.swap(0, 6);
            stats.accepted += 1;
            // PI step-size controller
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration { t, reason: "step size underflow".into() });
        }
    }
    Ok(stats)
}

fn initial_step(y: &[Complex64], dy: &[Complex64], span: f64, tol: Tolerances) -> f64 {
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (a, b) in y.iter().zip(dy) {
        let sc = tol.atol + tol.rtol * a.norm();
        d0 += a.norm_sqr() / (sc * sc);
        d1 += b.norm_sqr() / (sc * sc);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.abs()) * span.signum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_rotation() {
        // y′ = iωy → y = e^{iωt}
        let w = 3.7;
        let mut y = vec![Complex64::new(1.0, 0.0)];
        integrate(|_, y, dy| dy[0] = Complex64::i() * w * y[0], 0.0, 10.0, &mut y, Tolerances::default()).unwrap();
        let want = Complex64::from_polar(1.0, w * 10.0);
        assert!((y[0] - want).norm() < 1e-8, "{}", (y[0] - want).norm());
    }

    #[test]
    fn time_dependent_decay() {
        // y′ = −2t y → y = e^{−t²}
        let mut y = vec![Complex64::new(1.0, 0.0)];
        integrate(|t, y, dy| dy[0] = -2.0 * t * y[0], 0.0, 2.0, &mut y, Tolerances::default()).unwrap();
        assert!((y[0].re - (-4f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn step_limit_is_reported() {
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let tol = Tolerances { max_steps: 5, ..Tolerances::default() };
        let r = integrate(|_, y, dy| dy[0] = Complex64::i() * 100.0 * y[0], 0.0, 10.0, &mut y, tol);
        assert!(matches!(r, Err(Error::Integration { .. })));
    }
}
