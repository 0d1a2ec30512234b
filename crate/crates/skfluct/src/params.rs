use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Model parameters: inverse temperature, external field, system size.
///
/// `beta = 0` is accepted (the Gibbs measure degenerates to independent
/// spins tilted by `h`), but the high temperature theory additionally
/// requires `beta < 1` when `h = 0`; operations that need that regime check
/// it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
    pub n_spins: u32,
}

/// Centring constants for the normalized observables, injected from the
/// theory layer so samplers and enumerators never solve fixed points
/// themselves: `q1` centres the magnetization, `q2` centres the energy and
/// the overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub q1: f64,
    pub q2: f64,
}

impl Normalization {
    pub fn new(q1: f64, q2: f64) -> Self {
        Self { q1, q2 }
    }
}

impl ModelParams {
    pub fn new(beta: f64, h: f64, n_spins: u32) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "beta must be finite and non-negative, got {beta}"
            )));
        }
        if !h.is_finite() {
            return Err(Error::InvalidArgument(format!("h must be finite, got {h}")));
        }
        if n_spins == 0 {
            return Err(Error::InvalidArgument("n_spins must be at least 1".into()));
        }
        Ok(Self { beta, h, n_spins })
    }

    /// Number of distinct couplings `g_ij`, `i < j`.
    pub fn n_couplings(&self) -> usize {
        let n = self.n_spins as usize;
        n * (n - 1) / 2
    }
}
