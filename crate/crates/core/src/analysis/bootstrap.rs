use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Resamples `n` items with replacement `resamples` times and returns the
/// standard deviation of each component of `statistic` across resamples.
/// `statistic` receives the multiplicity of every item in the resample.
pub fn bootstrap<F>(n: usize, resamples: usize, seed: u64, statistic: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if n < 2 {
        return Err(Error::InsufficientData(format!("bootstrap needs at least 2 shots, got {n}")));
    }
    if resamples < 100 {
        return Err(Error::Domain(format!("use at least 100 bootstrap resamples, got {resamples}")));
    }
    let replicas: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut weights = vec![0.0; n];
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1.0;
            }
            statistic(&weights)
        })
        .collect();
    let dim = replicas[0].len();
    let count = replicas.len() as f64;
    Ok((0..dim)
        .map(|d| {
            let mean = replicas.iter().map(|r| r[d]).sum::<f64>() / count;
            let var = replicas.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / (count - 1.0);
            var.sqrt()
        })
        .collect())
}

/// Bootstrap error of the mean of `values`.
pub fn bootstrap_mean_error(values: &[f64], resamples: usize, seed: u64) -> Result<f64> {
    let n = values.len();
    let err =
        bootstrap(n, resamples, seed, |w| vec![w.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / n as f64])?;
    Ok(err[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_values(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn constant_statistic_has_no_spread() {
        let e = bootstrap(50, 200, 1, |_| vec![3.0]).unwrap();
        assert_eq!(e, vec![0.0]);
    }

    #[test]
    fn mean_error_follows_sqrt_n() {
        let v = gaussian_values(400, 5);
        let e = bootstrap_mean_error(&v, 1000, 2).unwrap();
        assert!((e / 0.05 - 1.0).abs() < 0.2, "{e}");
    }

    #[test]
    fn more_resamples_agree() {
        let v = gaussian_values(400, 6);
        let a = bootstrap_mean_error(&v, 500, 3).unwrap();
        let b = bootstrap_mean_error(&v, 1000, 4).unwrap();
        // Monte Carlo error of a bootstrap std with R resamples ≈ e/√(2R)
        let mc = a / (2.0 * 500f64).sqrt();
        assert!((a - b).abs() < 3.0 * mc, "{a} {b}");
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(bootstrap(1, 200, 0, |_| vec![0.0]), Err(Error::InsufficientData(_))));
        assert!(bootstrap(10, 20, 0, |_| vec![0.0]).is_err());
    }
}
