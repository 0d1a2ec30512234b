//! Empirical moment generating function and characteristic function, with
//! standard errors, for comparing sampled observables against Gaussian
//! predictions exp(mu^2 sigma^2 / 2) and exp(-t^2 sigma^2 / 2).

use serde::Serialize;

use crate::error::{Error, Result};

use super::{mean, sample_variance};

/// Largest |mu| accepted; beyond this the empirical MGF of a heavy sample is
/// dominated by a handful of draws and its standard error is meaningless.
pub const MGF_ARGUMENT_CAP: f64 = 2.0;
/// exp overflows to +inf just above this exponent.
const EXP_OVERFLOW: f64 = 709.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MgfPoint {
    pub mu: f64,
    pub value: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CfPoint {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub phase: f64,
    pub se_re: f64,
    pub se_im: f64,
}

fn check_sample(sample: &[f64]) -> Result<()> {
    if sample.len() < 2 {
        return Err(Error::InvalidArgument(
            "mgf/cf need at least two observations".into(),
        ));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("sample must be finite".into()));
    }
    Ok(())
}

/// Mean of exp(mu * x) over the sample at each requested argument.
pub fn empirical_mgf(sample: &[f64], mu_values: &[f64]) -> Result<Vec<MgfPoint>> {
    check_sample(sample)?;
    let n = sample.len() as f64;
    let mut points = Vec::with_capacity(mu_values.len());
    for &mu in mu_values {
        if !mu.is_finite() || mu.abs() > MGF_ARGUMENT_CAP {
            return Err(Error::InvalidArgument(format!(
                "mgf argument must satisfy |mu| <= {MGF_ARGUMENT_CAP}, got {mu}"
            )));
        }
        let worst = sample
            .iter()
            .map(|&x| mu * x)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst >= EXP_OVERFLOW {
            return Err(Error::MgfOverflow {
                mu,
                exponent: worst,
            });
        }
        let transformed: Vec<f64> = sample.iter().map(|&x| (mu * x).exp()).collect();
        points.push(MgfPoint {
            mu,
            value: mean(&transformed),
            standard_error: (sample_variance(&transformed) / n).sqrt(),
        });
    }
    Ok(points)
}

/// Mean of exp(i t x) over the sample at each requested frequency.
pub fn empirical_cf(sample: &[f64], t_values: &[f64]) -> Result<Vec<CfPoint>> {
    check_sample(sample)?;
    let n = sample.len() as f64;
    let mut points = Vec::with_capacity(t_values.len());
    for &t in t_values {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cf frequency must be finite, got {t}"
            )));
        }
        let cos: Vec<f64> = sample.iter().map(|&x| (t * x).cos()).collect();
        let sin: Vec<f64> = sample.iter().map(|&x| (t * x).sin()).collect();
        let re = mean(&cos);
        let im = mean(&sin);
        points.push(CfPoint {
            t,
            re,
            im,
            modulus: re.hypot(im),
            phase: im.atan2(re),
            se_re: (sample_variance(&cos) / n).sqrt(),
            se_im: (sample_variance(&sin) / n).sqrt(),
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn gaussian_sample(n: usize, seed_index: u64) -> Vec<f64> {
        let mut rng = crate::rng::stream(23, crate::rng::Domain::Synthetic, seed_index, 0);
        (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect()
    }

    #[test]
    fn zero_argument_is_exactly_one_with_zero_error() {
        let sample = gaussian_sample(500, 0);
        let mgf = empirical_mgf(&sample, &[0.0]).unwrap();
        assert_eq!(mgf[0].value, 1.0);
        assert_eq!(mgf[0].standard_error, 0.0);
        let cf = empirical_cf(&sample, &[0.0]).unwrap();
        assert_eq!(cf[0].re, 1.0);
        assert_eq!(cf[0].im, 0.0);
        assert_eq!(cf[0].se_re, 0.0);
    }

    #[test]
    fn gaussian_sample_matches_gaussian_mgf_and_cf() {
        let sample = gaussian_sample(40_000, 1);
        for &mu in &[0.5, -1.0, 1.5] {
            let point = &empirical_mgf(&sample, &[mu]).unwrap()[0];
            let target = (0.5 * mu * mu).exp();
            let gap = (point.value - target).abs();
            assert!(
                gap < 4.0 * point.standard_error.max(1e-4),
                "mu {mu}: value {} vs {target} (se {})",
                point.value,
                point.standard_error
            );
        }
        for &t in &[0.7, 2.0] {
            let point = &empirical_cf(&sample, &[t]).unwrap()[0];
            let target = (-0.5 * t * t).exp();
            assert!(
                (point.re - target).abs() < 4.0 * point.se_re.max(1e-4),
                "t {t}: re {} vs {target}",
                point.re
            );
            assert!(point.im.abs() < 4.0 * point.se_im.max(1e-4));
        }
    }

    #[test]
    fn rejects_wide_arguments_and_reports_overflow() {
        let sample = vec![0.0, 1.0, 2.0];
        assert!(matches!(
            empirical_mgf(&sample, &[2.5]),
            Err(Error::InvalidArgument(_))
        ));
        let huge = vec![0.0, 400.0, 800.0];
        match empirical_mgf(&huge, &[1.0]) {
            Err(Error::MgfOverflow { mu, exponent }) => {
                assert_eq!(mu, 1.0);
                assert!(exponent >= 709.0);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn rejects_degenerate_samples() {
        assert!(empirical_mgf(&[1.0], &[0.5]).is_err());
        assert!(empirical_cf(&[f64::NAN, 0.0], &[0.5]).is_err());
    }
}
