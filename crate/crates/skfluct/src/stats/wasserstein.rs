//! Exact Wasserstein-1 distance from an empirical sample to a Gaussian.
//!
//! For one-dimensional laws W1 equals the L1 distance between CDFs. Between
//! consecutive order statistics the empirical CDF is the constant k/n while
//! the Gaussian CDF is monotone, so each interval contributes a closed-form
//! piece once the single crossing point `mu + sigma * Phi^{-1}(k/n)` is
//! located. The antiderivative of the standard normal CDF used for the pieces
//! is I(u) = u*Phi(u) + phi(u), with I(u) -> 0 as u -> -inf and the tails of
//! the integral equal to sigma*I(z_1) and sigma*I(-z_n).

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::EmpiricalSample;

fn phi(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Antiderivative of the standard normal CDF, normalized to vanish at -inf.
fn cdf_antiderivative(u: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    u * normal.cdf(u) + phi(u)
}

/// W1 distance between `sample` and the Gaussian with mean `mu`, deviation
/// `sigma`. Requires `sigma > 0`; a degenerate target has no density and the
/// distance to it is better served by the Levy metric.
pub fn wasserstein1_to_gaussian(sample: &EmpiricalSample, mu: f64, sigma: f64) -> Result<f64> {
    if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gaussian target needs finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let xs = sample.values();
    let n = xs.len() as f64;
    let z = |x: f64| (x - mu) / sigma;
    // Integral of Phi over [a, b] in x units.
    let segment = |a: f64, b: f64| sigma * (cdf_antiderivative(z(b)) - cdf_antiderivative(z(a)));

    // Tails: below x_1 the empirical CDF is 0, above x_n it is 1.
    let mut total = sigma * cdf_antiderivative(z(xs[0]));
    total += sigma * cdf_antiderivative(-z(xs[xs.len() - 1]));

    for k in 1..xs.len() {
        let (a, b) = (xs[k - 1], xs[k]);
        if a == b {
            continue;
        }
        let level = k as f64 / n;
        let crossing = mu + sigma * normal.inverse_cdf(level);
        total += if crossing <= a {
            segment(a, b) - level * (b - a)
        } else if crossing >= b {
            level * (b - a) - segment(a, b)
        } else {
            (level * (crossing - a) - segment(a, crossing))
                + (segment(crossing, b) - level * (b - crossing))
        };
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::super::MeasureTag;
    use super::*;
    use rand::Rng;

    fn sample(values: Vec<f64>) -> EmpiricalSample {
        EmpiricalSample::new(values, MeasureTag::Annealed).expect("valid sample")
    }

    /// Brute-force L1 distance between CDFs on a fine grid.
    fn w1_reference(xs: &[f64], mu: f64, sigma: f64) -> f64 {
        let normal = Normal::new(mu, sigma).expect("target");
        let lo = xs[0].min(mu - 12.0 * sigma) - 1.0;
        let hi = xs[xs.len() - 1].max(mu + 12.0 * sigma) + 1.0;
        let steps = 4_000_000usize;
        let h = (hi - lo) / steps as f64;
        let n = xs.len() as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let x = lo + (i as f64 + 0.5) * h;
            let ecdf = xs.iter().filter(|&&v| v <= x).count() as f64 / n;
            acc += (ecdf - normal.cdf(x)).abs() * h;
        }
        acc
    }

    #[test]
    fn point_mass_at_zero_against_unit_gaussian() {
        // W1(delta_0, N(0,1)) = E|Z| = sqrt(2/pi).
        let d = wasserstein1_to_gaussian(&sample(vec![0.0]), 0.0, 1.0).unwrap();
        let expected = (2.0 / std::f64::consts::PI).sqrt();
        assert!((d - expected).abs() < 1e-14, "got {d}, want {expected}");
    }

    #[test]
    fn translating_both_measures_leaves_distance_unchanged() {
        let values = vec![-1.3, -0.2, 0.4, 0.9, 2.1, 2.2];
        let base = wasserstein1_to_gaussian(&sample(values.clone()), 0.0, 1.0).unwrap();
        let shifted: Vec<f64> = values.iter().map(|v| v + 5.5).collect();
        let moved = wasserstein1_to_gaussian(&sample(shifted), 5.5, 1.0).unwrap();
        assert!((base - moved).abs() < 1e-12);
    }

    #[test]
    fn matches_grid_reference_on_small_samples() {
        let cases: Vec<(Vec<f64>, f64, f64)> = vec![
            (vec![0.0], 0.0, 1.0),
            (vec![-0.7, 0.1, 0.4], 0.2, 0.8),
            (vec![1.0, 1.0, 1.0, 4.0], 1.5, 2.0),
            (vec![-3.0, -1.0, 0.0, 1.0, 3.0], 0.0, 1.0),
        ];
        for (values, mu, sigma) in cases {
            let exact = wasserstein1_to_gaussian(&sample(values.clone()), mu, sigma).unwrap();
            let approx = w1_reference(&values, mu, sigma);
            assert!(
                (exact - approx).abs() < 5e-6,
                "values {values:?}: exact {exact} vs reference {approx}"
            );
        }
    }

    #[test]
    fn gaussian_draws_shrink_at_root_n_rate() {
        // E W1(empirical_n, N(0,1)) ~ c / sqrt(n); check the ratio between
        // n = 400 and n = 6400 sits near the ideal factor 4.
        let mut rng = crate::rng::stream(7, crate::rng::Domain::Synthetic, 0, 0);
        let draw = |rng: &mut rand_chacha::ChaCha12Rng, n: usize| -> f64 {
            let values: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            wasserstein1_to_gaussian(&sample(values), 0.0, 1.0).unwrap()
        };
        let mut small = 0.0;
        let mut large = 0.0;
        for _ in 0..8 {
            small += draw(&mut rng, 400) / 8.0;
            large += draw(&mut rng, 6400) / 8.0;
        }
        let ratio = small / large;
        assert!(
            (2.5..6.0).contains(&ratio),
            "expected ratio near 4, got {ratio} ({small} vs {large})"
        );
    }

    #[test]
    fn nearly_degenerate_target_approaches_point_mass_distance() {
        // As sigma -> 0 the Gaussian collapses onto mu and W1 tends to the
        // mean absolute deviation of the sample from mu.
        let values = vec![-1.0, 0.5, 2.0];
        let d = wasserstein1_to_gaussian(&sample(values), 0.0, 1e-9).unwrap();
        let mad = (1.0 + 0.5 + 2.0) / 3.0;
        assert!((d - mad).abs() < 1e-6, "got {d}, want {mad}");
    }

    #[test]
    fn rejects_degenerate_or_malformed_targets() {
        let s = sample(vec![0.0, 1.0]);
        assert!(wasserstein1_to_gaussian(&s, 0.0, 0.0).is_err());
        assert!(wasserstein1_to_gaussian(&s, 0.0, -1.0).is_err());
        assert!(wasserstein1_to_gaussian(&s, f64::NAN, 1.0).is_err());
        assert!(EmpiricalSample::new(vec![], MeasureTag::Annealed).is_err());
        assert!(EmpiricalSample::new(vec![f64::INFINITY], MeasureTag::Annealed).is_err());
    }
}
