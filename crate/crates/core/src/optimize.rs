//! Thin closures-based wrappers around the `argmin` Nelder-Mead and Brent solvers.

use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentOpt;
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};

struct Multi<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Multi<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(p))
    }
}

struct Scalar<F>(F);

impl<F: Fn(f64) -> f64> CostFunction for Scalar<F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<P> {
    pub x: P,
    pub value: f64,
    pub iterations: u64,
}

fn solver_error(e: argmin::core::Error) -> Error {
    Error::Numerical(format!("optimizer failed: {e}"))
}

/// Nelder-Mead from `x0` with an initial simplex of axis steps `step`.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], sd_tolerance: f64, max_iters: u64) -> Result<Minimum<Vec<f64>>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut simplex = vec![x0.to_vec()];
    for (i, s) in step.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += s;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(sd_tolerance).map_err(solver_error)?;
    let res = Executor::new(Multi(f), solver).configure(|s| s.max_iters(max_iters)).run().map_err(solver_error)?;
    let st = res.state();
    let x = st.best_param.clone().ok_or_else(|| Error::Numerical("optimizer returned no point".into()))?;
    Ok(Minimum { x, value: st.best_cost, iterations: st.iter })
}

/// Brent minimisation of a scalar function on [lo, hi].
pub fn brent<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Minimum<f64>>
where
    F: Fn(f64) -> f64,
{
    let solver = BrentOpt::new(lo, hi).set_tolerance(tol, 1e-14);
    let res = Executor::new(Scalar(f), solver).configure(|s| s.max_iters(500)).run().map_err(solver_error)?;
    let st = res.state();
    let x = st.best_param.ok_or_else(|| Error::Numerical("optimizer returned no point".into()))?;
    Ok(Minimum { x, value: st.best_cost, iterations: st.iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], 1e-14, 5000).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn parabola() {
        let m = brent(|x| (x - 0.7).powi(2) + 3.0, -2.0, 5.0, 1e-10).unwrap();
        assert!((m.x - 0.7).abs() < 1e-6);
        assert!((m.value - 3.0).abs() < 1e-12);
    }
}
