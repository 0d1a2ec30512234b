//! Power-law fits v(N) ~ c * N^slope via least squares on (ln N, ln v),
//! with optional confidence intervals from per-point standard errors or from
//! a disorder-level bootstrap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

use super::mean;

/// Two-sided normal quantile for a 95% interval.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// 95% interval for the slope when error information was supplied.
    pub slope_ci: Option<(f64, f64)>,
}

fn validate(sizes: &[f64], values: &[f64]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(Error::InvalidArgument(
            "power-law fit needs at least three sizes".into(),
        ));
    }
    if sizes.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "got {} sizes but {} values",
            sizes.len(),
            values.len()
        )));
    }
    for (&n, &v) in sizes.iter().zip(values) {
        if !(n.is_finite() && n > 0.0) || !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power-law fit needs positive finite points, got ({n}, {v})"
            )));
        }
    }
    for w in sizes.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument("sizes must be distinct".into()));
        }
    }
    Ok(())
}

fn log_fit(sizes: &[f64], values: &[f64]) -> (f64, f64, f64, f64) {
    let xs: Vec<f64> = sizes.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let xbar = mean(&xs);
    let ybar = mean(&ys);
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sst: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    (slope, intercept, r_squared, sxx)
}

/// Fit ln v = intercept + slope * ln N.
pub fn scaling_fit(sizes: &[f64], values: &[f64]) -> Result<ScalingFit> {
    validate(sizes, values)?;
    let (slope, intercept, r_squared, _) = log_fit(sizes, values);
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        slope_ci: None,
    })
}

/// Same fit, with a delta-method slope interval: each ln v_k inherits the
/// variance (se_k / v_k)^2 and the slope is a fixed linear combination of the
/// log values.
pub fn scaling_fit_with_errors(
    sizes: &[f64],
    values: &[f64],
    standard_errors: &[f64],
) -> Result<ScalingFit> {
    validate(sizes, values)?;
    if standard_errors.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "got {} values but {} standard errors",
            values.len(),
            standard_errors.len()
        )));
    }
    if standard_errors.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidArgument(
            "standard errors must be finite and nonnegative".into(),
        ));
    }
    let (slope, intercept, r_squared, sxx) = log_fit(sizes, values);
    let xbar = mean(&sizes.iter().map(|n| n.ln()).collect::<Vec<f64>>());
    let mut var = 0.0;
    for ((&n, &v), &se) in sizes.iter().zip(values).zip(standard_errors) {
        let weight = (n.ln() - xbar) / sxx;
        var += (weight * se / v).powi(2);
    }
    let half = Z_95 * var.sqrt();
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        slope_ci: Some((slope - half, slope + half)),
    })
}

/// Percentile bootstrap interval for the slope. Each replicate resamples the
/// per-size disorder values with replacement (independent streams per size),
/// refits, and the middle 95% of replicate slopes forms the interval.
pub fn bootstrap_slope_ci(
    sizes: &[f64],
    per_size_values: &[Vec<f64>],
    n_boot: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if sizes.len() != per_size_values.len() {
        return Err(Error::InvalidArgument(format!(
            "got {} sizes but {} value groups",
            sizes.len(),
            per_size_values.len()
        )));
    }
    if n_boot < 100 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 100 replicates".into(),
        ));
    }
    let point_values: Vec<f64> = per_size_values.iter().map(|g| mean(g)).collect();
    validate(sizes, &point_values)?;
    if per_size_values.iter().any(|g| g.len() < 2) {
        return Err(Error::InvalidArgument(
            "each size needs at least two disorder values to resample".into(),
        ));
    }
    let mut slopes = Vec::with_capacity(n_boot);
    let mut skipped = 0usize;
    for b in 0..n_boot {
        let mut resampled = Vec::with_capacity(sizes.len());
        for (k, group) in per_size_values.iter().enumerate() {
            let mut rng = stream(master_seed, Domain::Resample, b as u64, k as u64);
            let total: f64 = (0..group.len())
                .map(|_| group[rand::Rng::gen_range(&mut rng, 0..group.len())])
                .sum();
            resampled.push(total / group.len() as f64);
        }
        if resampled.iter().any(|v| *v <= 0.0) {
            skipped += 1;
            continue;
        }
        let (slope, _, _, _) = log_fit(sizes, &resampled);
        slopes.push(slope);
    }
    if skipped * 5 > n_boot {
        return Err(Error::InternalConsistency(format!(
            "bootstrap discarded {skipped} of {n_boot} replicates with nonpositive means; \
             the statistic is not power-law shaped"
        )));
    }
    slopes.sort_by(f64::total_cmp);
    let pick = |p: f64| slopes[((slopes.len() - 1) as f64 * p).round() as usize];
    Ok((pick(0.025), pick(0.975)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn exact_powers_are_recovered() {
        let sizes: [f64; 4] = [32.0, 64.0, 128.0, 256.0];
        let inv_sqrt: Vec<f64> = sizes.iter().map(|&n| 3.0 / n.sqrt()).collect();
        let fit = scaling_fit(&sizes, &inv_sqrt).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12, "slope {}", fit.slope);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let inv: Vec<f64> = sizes.iter().map(|n| 0.7 / n).collect();
        let fit = scaling_fit(&sizes, &inv).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_method_interval_covers_true_slope() {
        let sizes: [f64; 4] = [32.0, 64.0, 128.0, 256.0];
        let values: Vec<f64> = sizes.iter().map(|&n| 2.0 / n.sqrt()).collect();
        let ses: Vec<f64> = values.iter().map(|v| 0.05 * v).collect();
        let fit = scaling_fit_with_errors(&sizes, &values, &ses).unwrap();
        let (lo, hi) = fit.slope_ci.unwrap();
        assert!(lo < -0.5 && -0.5 < hi);
        assert!(hi - lo < 0.5, "interval ({lo}, {hi}) too wide");
    }

    #[test]
    fn bootstrap_interval_covers_true_slope() {
        let sizes: [f64; 4] = [32.0, 64.0, 128.0, 256.0];
        let mut rng = crate::rng::stream(31, crate::rng::Domain::Synthetic, 0, 0);
        let groups: Vec<Vec<f64>> = sizes
            .iter()
            .map(|&n| {
                (0..120)
                    .map(|_| {
                        let noise: f64 = rng.sample(rand_distr::StandardNormal);
                        (1.0 / n) * (1.0 + 0.3 * noise)
                    })
                    .collect()
            })
            .collect();
        let (lo, hi) = bootstrap_slope_ci(&sizes, &groups, 400, 99).unwrap();
        assert!(lo < -1.0 && -1.0 < hi, "interval ({lo}, {hi}) misses -1");
        assert!(hi - lo < 0.6, "interval ({lo}, {hi}) too wide");
        // Deterministic in the master seed.
        let again = bootstrap_slope_ci(&sizes, &groups, 400, 99).unwrap();
        assert_eq!((lo, hi), again);
    }

    #[test]
    fn rejects_short_or_nonpositive_inputs() {
        assert!(scaling_fit(&[32.0, 64.0], &[1.0, 0.5]).is_err());
        assert!(scaling_fit(&[32.0, 64.0, 128.0], &[1.0, -0.5, 0.2]).is_err());
        assert!(scaling_fit(&[32.0, 32.0, 128.0], &[1.0, 0.5, 0.2]).is_err());
        assert!(scaling_fit_with_errors(&[32.0, 64.0, 128.0], &[1.0, 0.5, 0.2], &[0.1, 0.1]).is_err());
    }
}
