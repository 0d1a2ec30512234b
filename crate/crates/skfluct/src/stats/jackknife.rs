//! Jackknife standard errors for statistics of i.i.d. samples.
//!
//! Resampling is the honest way to attach uncertainties to the nonlinear
//! statistics this crate reports (variances of variances, ratios, scaling
//! fits). Delete-one is the default; delete-group keeps the cost down when
//! the statistic itself is expensive.

use crate::error::{Error, Result};

/// A point estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jackknife {
    pub estimate: f64,
    pub standard_error: f64,
}

/// Delete-one jackknife of `stat` over `samples`.
///
/// The estimate is `stat` on the full sample; the standard error is
/// `sqrt((n-1)/n * sum_i (theta_(i) - theta_bar)^2)` over the leave-one-out
/// replicates. Needs at least two samples.
pub fn jackknife<F>(samples: &[f64], mut stat: F) -> Result<Jackknife>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "jackknife needs at least 2 samples, got {n}"
        )));
    }
    let estimate = stat(samples);
    let mut buffer = Vec::with_capacity(n - 1);
    let mut replicates = Vec::with_capacity(n);
    for i in 0..n {
        buffer.clear();
        buffer.extend_from_slice(&samples[..i]);
        buffer.extend_from_slice(&samples[i + 1..]);
        replicates.push(stat(&buffer));
    }
    Ok(Jackknife {
        estimate,
        standard_error: spread(&replicates),
    })
}

/// Delete-group jackknife: the sample is cut into `n_groups` contiguous
/// blocks of near-equal size and one block is left out at a time.
///
/// Equivalent to [`jackknife`] when `n_groups == samples.len()`, and much
/// cheaper when `stat` is expensive (quantile integrals, fits).
pub fn jackknife_groups<F>(samples: &[f64], n_groups: usize, mut stat: F) -> Result<Jackknife>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = samples.len();
    if n_groups < 2 || n_groups > n {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= n_groups <= n, got n_groups = {n_groups}, n = {n}"
        )));
    }
    let estimate = stat(samples);
    let mut buffer = Vec::with_capacity(n);
    let mut replicates = Vec::with_capacity(n_groups);
    for g in 0..n_groups {
        let lo = g * n / n_groups;
        let hi = (g + 1) * n / n_groups;
        buffer.clear();
        buffer.extend_from_slice(&samples[..lo]);
        buffer.extend_from_slice(&samples[hi..]);
        replicates.push(stat(&buffer));
    }
    Ok(Jackknife {
        estimate,
        standard_error: spread(&replicates),
    })
}

fn spread(replicates: &[f64]) -> f64 {
    let g = replicates.len() as f64;
    let mean = replicates.iter().sum::<f64>() / g;
    let ss: f64 = replicates.iter().map(|v| (v - mean) * (v - mean)).sum();
    ((g - 1.0) / g * ss).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn mean_recovers_classical_standard_error() {
        // for the sample mean the jackknife SE is exactly s/sqrt(n)
        let xs = [0.3, -1.2, 2.4, 0.9, -0.5, 1.7, 0.1, -2.2];
        let n = xs.len() as f64;
        let m = mean(&xs);
        let s2 = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        let classical = (s2 / n).sqrt();
        let jk = jackknife(&xs, mean).unwrap();
        assert_relative_eq!(jk.estimate, m, max_relative = 1e-14);
        assert_relative_eq!(jk.standard_error, classical, max_relative = 1e-12);
    }

    #[test]
    fn delete_group_with_singleton_groups_matches_delete_one() {
        let xs = [0.3, -1.2, 2.4, 0.9, -0.5, 1.7];
        let a = jackknife(&xs, mean).unwrap();
        let b = jackknife_groups(&xs, xs.len(), mean).unwrap();
        assert_relative_eq!(a.standard_error, b.standard_error, max_relative = 1e-12);
    }

    #[test]
    fn constant_statistic_has_zero_error() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let jk = jackknife(&xs, |_| 7.5).unwrap();
        assert_eq!(jk.estimate, 7.5);
        assert_eq!(jk.standard_error, 0.0);
    }

    #[test]
    fn variance_statistic_gets_a_positive_error() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 37 % 17) as f64) / 17.0).collect();
        let var = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
        };
        let jk = jackknife(&xs, var).unwrap();
        assert!(jk.estimate > 0.0);
        assert!(jk.standard_error > 0.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(jackknife(&[1.0], mean).is_err());
        assert!(jackknife_groups(&[1.0, 2.0, 3.0], 1, mean).is_err());
        assert!(jackknife_groups(&[1.0, 2.0, 3.0], 4, mean).is_err());
    }
}
