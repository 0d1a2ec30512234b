//! Distances, diagnostics and error bars for the sampled observables:
//! Wasserstein and Levy distances against Gaussian references, Stein
//! residuals, moment generating functions, scaling fits, and jackknife
//! standard errors.

pub mod jackknife;
pub mod levy;
pub mod mgf;
pub mod scaling;
pub mod stein;
pub mod wasserstein;

pub use jackknife::{jackknife, jackknife_groups, Jackknife};
pub use levy::{kolmogorov_to_gaussian, levy_to_gaussian};
pub use mgf::{empirical_cf, empirical_mgf, CfPoint, MgfPoint};
pub use scaling::{bootstrap_slope_ci, scaling_fit, scaling_fit_with_errors, ScalingFit};
pub use stein::{
    annealed_stein_residual, chain_views, quenched_stein_residual, stein_solve,
    synthetic_conditionally_gaussian, test_function_battery, variance_concentration,
    SplitEstimate, SteinResidual, SteinTestFunction,
};
pub use wasserstein::wasserstein1_to_gaussian;

use crate::error::{Error, Result};

/// Which layer of randomness an empirical sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureTag {
    /// Pooled over disorders and spins: draws from `nu`.
    Annealed,
    /// Thinned Gibbs samples at one frozen disorder.
    QuenchedSingleDisorder,
    /// One quenched mean per disorder.
    AcrossDisorderMeans,
}

/// A finite, sorted sample of real observations.
#[derive(Debug, Clone)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    pub tag: MeasureTag,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>, tag: MeasureTag) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("sample must be nonempty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sample must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, tag })
    }

    /// Sorted ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Arithmetic mean. Empty input gives NaN.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (denominator `n - 1`). Fewer than two samples
/// give NaN.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}
