//! Exact quenched Gibbs computations by full enumeration.
//!
//! For `N <= 20` spins every configuration is visited once, so partition
//! functions, spin correlations and observable moments come out exact up to
//! floating point. This is the oracle layer: the Monte Carlo engine is
//! validated against it, and it in turn validates the theory layer on small
//! systems.
//!
//! Conventions: a configuration `sigma` carries weight
//! `exp(beta * E_N(sigma) + h * sum_i sigma_i)` with
//! `E_N = sum_{i<j} g_ij sigma_i sigma_j / sqrt(N)`, so the external field
//! is not scaled by the inverse temperature. The normalized observables are
//! `script_E = E_N / sqrt(N) - (beta sqrt(N) / 2)(1 - q2^2)`,
//! `script_M = sqrt(N) (M_N - q1)` and `script_H = script_E + script_M`,
//! with `q1, q2` injected from the theory layer via [`Normalization`].

use crate::error::{Error, Result};
use crate::params::{ModelParams, Normalization};
use crate::rng::{self, Domain};
use crate::stats::{jackknife, sample_variance, Jackknife};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Hard cap on exact enumeration; `2^20` configurations is about the most a
/// single core should be asked to sweep twice per disorder.
pub const ENUMERATION_CAP: u32 = 20;

/// Cadence (in Gray-code steps) at which local fields and energy are
/// recomputed from scratch to stop incremental drift.
const REFRESH_INTERVAL: u64 = 1 << 16;

/// One sample of the coupling matrix `g_ij`, `i < j`, stored as the
/// condensed upper triangle in row-major order.
#[derive(Debug, Clone)]
pub struct Disorder {
    n_spins: u32,
    couplings: Vec<f64>,
    pub seed: u64,
    pub scheme_version: u32,
}

/// Condensed index of the pair `(i, j)`, `0 <= i < j < n`.
fn triangle_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl Disorder {
    /// Draws the couplings as i.i.d. standard normals. Each coupling comes
    /// from its own counter-based stream keyed on `(seed, i, j)`, so the
    /// result is independent of call order and thread count.
    pub fn sample(n_spins: u32, seed: u64) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidArgument("n_spins must be at least 1".into()));
        }
        let n = n_spins as usize;
        let mut couplings = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let mut stream = rng::stream(seed, Domain::Disorder, i as u64, j as u64);
                couplings.push(StandardNormal.sample(&mut stream));
            }
        }
        Ok(Self {
            n_spins,
            couplings,
            seed,
            scheme_version: rng::SCHEME_VERSION,
        })
    }

    /// Wraps an explicit coupling matrix (tests, file input). The seed is
    /// recorded as 0 since the values were not generated from one.
    pub fn from_couplings(n_spins: u32, couplings: Vec<f64>) -> Result<Self> {
        let n = n_spins as usize;
        if n == 0 {
            return Err(Error::InvalidArgument("n_spins must be at least 1".into()));
        }
        if couplings.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidArgument(format!(
                "expected {} couplings for {} spins, got {}",
                n * (n - 1) / 2,
                n,
                couplings.len()
            )));
        }
        if couplings.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument("couplings must be finite".into()));
        }
        Ok(Self {
            n_spins,
            couplings,
            seed: 0,
            scheme_version: rng::SCHEME_VERSION,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    /// `g_ij` for any `i != j` (symmetric access).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.couplings[triangle_index(self.n_spins as usize, lo, hi)]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Dense symmetric matrix `w_ij = g_ij / sqrt(N)` with zero diagonal,
    /// row-major. This is the form both the enumerator and the Metropolis
    /// sampler consume.
    pub fn interaction_matrix(&self) -> Vec<f64> {
        let n = self.n_spins as usize;
        let scale = 1.0 / (n as f64).sqrt();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.coupling(i, j) * scale;
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
        w
    }
}

/// Exact Gibbs expectations for one disorder sample.
///
/// `pair_corr` is the condensed upper triangle of `<sigma_i sigma_j>`.
/// The overlap moments refer to two independent replicas sharing the
/// disorder, so they factorize through the single-replica tables:
/// `<R_12> = (1/N) sum_i <sigma_i>^2` and
/// `<R_12^2> = (1/N^2) sum_ij <sigma_i sigma_j>^2`.
/// `mgf` holds `(mu, <exp(mu * script_H)>)` pairs when requested.
#[derive(Debug, Clone, serde::Serialize)]
pub struct QuenchedMoments {
    pub log_z: f64,
    pub mean_spin: Vec<f64>,
    pub pair_corr: Vec<f64>,
    pub mean_e_script: f64,
    pub var_e_script: f64,
    pub mean_m_script: f64,
    pub var_m_script: f64,
    pub mean_h_script: f64,
    pub var_h_script: f64,
    pub overlap_mean: f64,
    pub overlap_second: f64,
    pub mgf: Vec<(f64, f64)>,
}

impl QuenchedMoments {
    /// `<script_H^2>` reassembled from mean and variance.
    pub fn second_moment_h(&self) -> f64 {
        self.var_h_script + self.mean_h_script * self.mean_h_script
    }

    /// `<(R_12 - q2)^2>` for the given centring.
    pub fn centered_overlap_square(&self, q2: f64) -> f64 {
        self.overlap_second - 2.0 * q2 * self.overlap_mean + q2 * q2
    }
}

/// Recomputes local fields `ell_i = sum_j w_ij sigma_j` and the energy
/// `E = sum_{i<j} w_ij sigma_i sigma_j` from scratch.
fn refresh_fields(n: usize, w: &[f64], spins: &[f64], ell: &mut [f64]) -> f64 {
    for i in 0..n {
        let row = &w[i * n..(i + 1) * n];
        ell[i] = row.iter().zip(spins).map(|(wij, s)| wij * s).sum();
    }
    0.5 * spins.iter().zip(ell.iter()).map(|(s, l)| s * l).sum::<f64>()
}

/// Walks all `2^n` configurations in Gray-code order, maintaining spins,
/// energy and magnetization incrementally; calls `visit(spins, E, sum sigma)`
/// once per configuration.
fn gray_sweep<F: FnMut(&[f64], f64, i64)>(n: usize, w: &[f64], mut visit: F) {
    let total: u64 = 1 << n;
    let mut spins = vec![-1.0f64; n];
    let mut ell = vec![0.0f64; n];
    let mut energy = refresh_fields(n, w, &spins, &mut ell);
    let mut magnet: i64 = -(n as i64);
    visit(&spins, energy, magnet);
    for k in 1..total {
        if k % REFRESH_INTERVAL == 0 {
            energy = refresh_fields(n, w, &spins, &mut ell);
        }
        let i = k.trailing_zeros() as usize;
        let flipped = -spins[i];
        // ell_i does not involve sigma_i, so it is valid on both sides of
        // the flip; the energy change is (sigma_i' - sigma_i) * ell_i.
        energy += 2.0 * flipped * ell[i];
        magnet += if flipped > 0.0 { 2 } else { -2 };
        spins[i] = flipped;
        let step = 2.0 * flipped;
        let row = &w[i * n..(i + 1) * n];
        for (l, wij) in ell.iter_mut().zip(row) {
            *l += step * wij;
        }
        visit(&spins, energy, magnet);
    }
}

struct ObservableScales {
    beta: f64,
    h: f64,
    sqrt_n: f64,
    inv_n: f64,
    energy_shift: f64,
    q1: f64,
}

impl ObservableScales {
    fn new(params: &ModelParams, norm: Normalization) -> Self {
        let n = params.n_spins as f64;
        Self {
            beta: params.beta,
            h: params.h,
            sqrt_n: n.sqrt(),
            inv_n: 1.0 / n,
            energy_shift: 0.5 * params.beta * n.sqrt() * (1.0 - norm.q2 * norm.q2),
            q1: norm.q1,
        }
    }

    /// Log-weight of a configuration.
    fn exponent(&self, energy: f64, magnet: i64) -> f64 {
        self.beta * energy + self.h * magnet as f64
    }

    /// `script_H = script_E + script_M`.
    fn h_script(&self, energy: f64, magnet: i64) -> f64 {
        let e_script = energy / self.sqrt_n - self.energy_shift;
        let m_script = self.sqrt_n * (magnet as f64 * self.inv_n - self.q1);
        e_script + m_script
    }
}

/// Exact expectations by full enumeration. See the module docs for the
/// weight convention. Fails for more than [`ENUMERATION_CAP`] spins.
pub fn enumerate(
    disorder: &Disorder,
    params: &ModelParams,
    norm: Normalization,
) -> Result<QuenchedMoments> {
    enumerate_with_mgf(disorder, params, norm, &[])
}

/// [`enumerate`], additionally reporting `<exp(mu * script_H)>` for each
/// requested `mu`. Every exponential goes through max-subtraction, so the
/// only way to overflow is for the reported value itself to exceed `f64`.
pub fn enumerate_with_mgf(
    disorder: &Disorder,
    params: &ModelParams,
    norm: Normalization,
    mgf_mu: &[f64],
) -> Result<QuenchedMoments> {
    if params.n_spins > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            max: ENUMERATION_CAP,
            got: params.n_spins,
        });
    }
    if params.n_spins != disorder.n_spins {
        return Err(Error::InvalidArgument(format!(
            "params describe {} spins but disorder has {}",
            params.n_spins, disorder.n_spins
        )));
    }
    if mgf_mu.iter().any(|mu| !mu.is_finite()) {
        return Err(Error::InvalidArgument("mgf arguments must be finite".into()));
    }

    let n = params.n_spins as usize;
    let w = disorder.interaction_matrix();
    let scales = ObservableScales::new(params, norm);

    // pass 1: largest exponents, for max-subtraction
    let mut s_max = f64::NEG_INFINITY;
    let mut u_max = vec![f64::NEG_INFINITY; mgf_mu.len()];
    gray_sweep(n, &w, |_, energy, magnet| {
        let s = scales.exponent(energy, magnet);
        s_max = s_max.max(s);
        if !mgf_mu.is_empty() {
            let hs = scales.h_script(energy, magnet);
            for (m, mu) in u_max.iter_mut().zip(mgf_mu) {
                *m = m.max(s + mu * hs);
            }
        }
    });

    // pass 2: shifted accumulation
    let n_pairs = n * (n - 1) / 2;
    let mut z = 0.0;
    let mut spin_acc = vec![0.0; n];
    let mut pair_acc = vec![0.0; n_pairs];
    let mut e_acc = [0.0; 2];
    let mut m_acc = [0.0; 2];
    let mut h_acc = [0.0; 2];
    let mut mgf_acc = vec![0.0; mgf_mu.len()];
    gray_sweep(n, &w, |spins, energy, magnet| {
        let s = scales.exponent(energy, magnet);
        let weight = (s - s_max).exp();
        z += weight;
        for (acc, sigma) in spin_acc.iter_mut().zip(spins) {
            *acc += weight * sigma;
        }
        let mut p = 0;
        for i in 0..n {
            let wi = weight * spins[i];
            for sj in &spins[i + 1..] {
                pair_acc[p] += wi * sj;
                p += 1;
            }
        }
        let e_script = energy / scales.sqrt_n - scales.energy_shift;
        let m_script = scales.sqrt_n * (magnet as f64 * scales.inv_n - scales.q1);
        let h_script = e_script + m_script;
        e_acc[0] += weight * e_script;
        e_acc[1] += weight * e_script * e_script;
        m_acc[0] += weight * m_script;
        m_acc[1] += weight * m_script * m_script;
        h_acc[0] += weight * h_script;
        h_acc[1] += weight * h_script * h_script;
        for ((acc, mu), m) in mgf_acc.iter_mut().zip(mgf_mu).zip(&u_max) {
            *acc += (s + mu * h_script - m).exp();
        }
    });

    let mean_spin: Vec<f64> = spin_acc.iter().map(|a| a / z).collect();
    let pair_corr: Vec<f64> = pair_acc.iter().map(|a| a / z).collect();
    let mean_e = e_acc[0] / z;
    let mean_m = m_acc[0] / z;
    let mean_h = h_acc[0] / z;
    let log_z = s_max + z.ln();

    let mut mgf = Vec::with_capacity(mgf_mu.len());
    for ((mu, acc), m) in mgf_mu.iter().zip(&mgf_acc).zip(&u_max) {
        let log_value = m + acc.ln() - log_z;
        if log_value >= 709.0 {
            return Err(Error::MgfOverflow {
                mu: *mu,
                exponent: log_value,
            });
        }
        mgf.push((*mu, log_value.exp()));
    }

    let overlap_mean = mean_spin.iter().map(|m| m * m).sum::<f64>() / n as f64;
    let overlap_second =
        (n as f64 + 2.0 * pair_corr.iter().map(|c| c * c).sum::<f64>()) / (n as f64 * n as f64);

    Ok(QuenchedMoments {
        log_z,
        mean_spin,
        pair_corr,
        mean_e_script: mean_e,
        var_e_script: (e_acc[1] / z - mean_e * mean_e).max(0.0),
        mean_m_script: mean_m,
        var_m_script: (m_acc[1] / z - mean_m * mean_m).max(0.0),
        mean_h_script: mean_h,
        var_h_script: (h_acc[1] / z - mean_h * mean_h).max(0.0),
        overlap_mean,
        overlap_second,
        mgf,
    })
}

/// Disorder averages of the exact quenched quantities.
///
/// With a single disorder the estimates equal the per-disorder values and
/// every standard error (and the across-disorder variance) is NaN, since
/// one sample carries no spread information.
#[derive(Debug, Clone)]
pub struct ExactEnsemble {
    /// `nu((R_12 - q2)^2)`.
    pub nu_overlap_sq: Jackknife,
    /// `nu(script_H)`.
    pub nu_h: Jackknife,
    /// `nu(script_H^2)`.
    pub nu_h2: Jackknife,
    /// Variance across disorders of the quenched mean `<script_H>`.
    pub var_quenched_mean: Jackknife,
    pub disorder_seeds: Vec<u64>,
    pub per_disorder: Vec<QuenchedMoments>,
}

/// Enumerates `n_disorders` independent disorders (seeds derived from
/// `master_seed`) and averages. Fans out across disorders; the merge order
/// is fixed by disorder index, so results do not depend on thread count.
pub fn disorder_average_exact(
    params: &ModelParams,
    norm: Normalization,
    n_disorders: usize,
    master_seed: u64,
) -> Result<ExactEnsemble> {
    if n_disorders == 0 {
        return Err(Error::InvalidArgument("need at least one disorder".into()));
    }
    let seeds: Vec<u64> = (0..n_disorders)
        .map(|i| rng::derive_seed(master_seed, Domain::Disorder, i as u64))
        .collect();
    let per_disorder: Vec<QuenchedMoments> = seeds
        .par_iter()
        .map(|&seed| {
            let disorder = Disorder::sample(params.n_spins, seed)?;
            enumerate(&disorder, params, norm)
        })
        .collect::<Result<_>>()?;

    let h_means: Vec<f64> = per_disorder.iter().map(|m| m.mean_h_script).collect();
    let h_seconds: Vec<f64> = per_disorder.iter().map(|m| m.second_moment_h()).collect();
    let overlap_sq: Vec<f64> = per_disorder
        .iter()
        .map(|m| m.centered_overlap_square(norm.q2))
        .collect();

    let single = |xs: &[f64]| Jackknife {
        estimate: xs[0],
        standard_error: f64::NAN,
    };
    let (nu_h, nu_h2, nu_overlap_sq, var_quenched_mean) = if n_disorders == 1 {
        (
            single(&h_means),
            single(&h_seconds),
            single(&overlap_sq),
            Jackknife {
                estimate: f64::NAN,
                standard_error: f64::NAN,
            },
        )
    } else {
        (
            jackknife(&h_means, crate::stats::mean)?,
            jackknife(&h_seconds, crate::stats::mean)?,
            jackknife(&overlap_sq, crate::stats::mean)?,
            jackknife(&h_means, sample_variance)?,
        )
    };

    Ok(ExactEnsemble {
        nu_overlap_sq,
        nu_h,
        nu_h2,
        var_quenched_mean,
        disorder_seeds: seeds,
        per_disorder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::OverlapMoments;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn norm_at(beta: f64, h: f64) -> Normalization {
        OverlapMoments::compute(beta, h).unwrap().normalization()
    }

    fn zero_norm() -> Normalization {
        Normalization::new(0.0, 0.0)
    }

    /// Bit-decode reference enumerator: energy from scratch per
    /// configuration, no Gray walk, same two-pass max subtraction.
    fn naive_enumerate(
        disorder: &Disorder,
        params: &ModelParams,
        norm: Normalization,
    ) -> QuenchedMoments {
        let n = params.n_spins as usize;
        let w = disorder.interaction_matrix();
        let scales = ObservableScales::new(params, norm);
        let configs = 1u64 << n;
        let spins_of = |k: u64| -> Vec<f64> {
            (0..n)
                .map(|i| if k >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect()
        };
        let energy_of = |spins: &[f64]| -> f64 {
            let mut e = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    e += w[i * n + j] * spins[i] * spins[j];
                }
            }
            e
        };
        let mut s_max = f64::NEG_INFINITY;
        for k in 0..configs {
            let spins = spins_of(k);
            let magnet = spins.iter().sum::<f64>() as i64;
            s_max = s_max.max(scales.exponent(energy_of(&spins), magnet));
        }
        let mut z = 0.0;
        let mut spin_acc = vec![0.0; n];
        let mut pair_acc = vec![0.0; n * (n - 1) / 2];
        let mut h_acc = [0.0; 2];
        let mut e_acc = [0.0; 2];
        let mut m_acc = [0.0; 2];
        for k in 0..configs {
            let spins = spins_of(k);
            let magnet = spins.iter().sum::<f64>() as i64;
            let energy = energy_of(&spins);
            let weight = (scales.exponent(energy, magnet) - s_max).exp();
            z += weight;
            for i in 0..n {
                spin_acc[i] += weight * spins[i];
                for j in (i + 1)..n {
                    pair_acc[triangle_index(n, i, j)] += weight * spins[i] * spins[j];
                }
            }
            let e_script = energy / scales.sqrt_n - scales.energy_shift;
            let m_script = scales.sqrt_n * (magnet as f64 * scales.inv_n - scales.q1);
            let h_script = e_script + m_script;
            e_acc[0] += weight * e_script;
            e_acc[1] += weight * e_script * e_script;
            m_acc[0] += weight * m_script;
            m_acc[1] += weight * m_script * m_script;
            h_acc[0] += weight * h_script;
            h_acc[1] += weight * h_script * h_script;
        }
        let mean_spin: Vec<f64> = spin_acc.iter().map(|a| a / z).collect();
        let pair_corr: Vec<f64> = pair_acc.iter().map(|a| a / z).collect();
        let overlap_mean = mean_spin.iter().map(|m| m * m).sum::<f64>() / n as f64;
        let overlap_second = (n as f64
            + 2.0 * pair_corr.iter().map(|c| c * c).sum::<f64>())
            / (n as f64 * n as f64);
        QuenchedMoments {
            log_z: s_max + z.ln(),
            mean_spin,
            pair_corr,
            mean_e_script: e_acc[0] / z,
            var_e_script: e_acc[1] / z - (e_acc[0] / z) * (e_acc[0] / z),
            mean_m_script: m_acc[0] / z,
            var_m_script: m_acc[1] / z - (m_acc[0] / z) * (m_acc[0] / z),
            mean_h_script: h_acc[0] / z,
            var_h_script: h_acc[1] / z - (h_acc[0] / z) * (h_acc[0] / z),
            overlap_mean,
            overlap_second,
            mgf: Vec::new(),
        }
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let a = Disorder::sample(4, 42).unwrap();
        let b = Disorder::sample(4, 42).unwrap();
        let c = Disorder::sample(4, 43).unwrap();
        assert_eq!(a.couplings(), b.couplings());
        assert_ne!(a.couplings(), c.couplings());
        assert_eq!(a.couplings().len(), 6);
    }

    #[test]
    fn sampled_couplings_look_standard_normal() {
        // 460 spins give 105_570 draws
        let d = Disorder::sample(460, 7).unwrap();
        let n = d.couplings().len() as f64;
        let mean = d.couplings().iter().sum::<f64>() / n;
        let var = d
            .couplings()
            .iter()
            .map(|g| (g - mean) * (g - mean))
            .sum::<f64>()
            / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "variance {var}");
    }

    #[test]
    fn matches_naive_reference_on_small_systems() {
        let norm = norm_at(0.25, 0.3);
        for (n, seed) in [(2u32, 11u64), (3, 12), (5, 13), (8, 14), (8, 15)] {
            let disorder = Disorder::sample(n, seed).unwrap();
            let params = ModelParams::new(0.25, 0.3, n).unwrap();
            let fast = enumerate(&disorder, &params, norm).unwrap();
            let slow = naive_enumerate(&disorder, &params, norm);
            assert_abs_diff_eq!(fast.log_z, slow.log_z, epsilon = 1e-12);
            for (a, b) in fast.mean_spin.iter().zip(&slow.mean_spin) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
            for (a, b) in fast.pair_corr.iter().zip(&slow.pair_corr) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(fast.mean_h_script, slow.mean_h_script, epsilon = 1e-12);
            assert_abs_diff_eq!(fast.var_h_script, slow.var_h_script, epsilon = 1e-12);
            assert_abs_diff_eq!(fast.overlap_second, slow.overlap_second, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_spin_closed_form() {
        let disorder = Disorder::from_couplings(1, vec![]).unwrap();
        let params = ModelParams::new(0.7, 0.4, 1).unwrap();
        let moments = enumerate(&disorder, &params, zero_norm()).unwrap();
        assert_relative_eq!(
            moments.log_z,
            (2.0 * 0.4f64.cosh()).ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(moments.mean_spin[0], 0.4f64.tanh(), max_relative = 1e-14);
        // no couplings: script_E is a constant, so its variance vanishes
        assert_abs_diff_eq!(moments.var_e_script, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_spin_closed_form() {
        let g = 0.8;
        let (beta, h) = (0.3, 0.25);
        let disorder = Disorder::from_couplings(2, vec![g]).unwrap();
        let params = ModelParams::new(beta, h, 2).unwrap();
        let moments = enumerate(&disorder, &params, zero_norm()).unwrap();
        let a = beta * g / 2f64.sqrt();
        let z = 2.0 * a.exp() * (2.0 * h).cosh() + 2.0 * (-a).exp();
        assert_relative_eq!(moments.log_z, z.ln(), max_relative = 1e-14);
        let pair = (a.exp() * (2.0 * h).cosh() - (-a).exp())
            / (a.exp() * (2.0 * h).cosh() + (-a).exp());
        assert_relative_eq!(moments.pair_corr[0], pair, max_relative = 1e-13);
        let spin = 2.0 * a.exp() * (2.0 * h).sinh() / z;
        assert_relative_eq!(moments.mean_spin[0], spin, max_relative = 1e-13);
        assert_relative_eq!(moments.mean_spin[1], spin, max_relative = 1e-13);
    }

    #[test]
    fn zero_beta_decouples_the_spins() {
        let disorder = Disorder::sample(9, 21).unwrap();
        let params = ModelParams::new(0.0, 0.35, 9).unwrap();
        let moments = enumerate(&disorder, &params, zero_norm()).unwrap();
        let t = 0.35f64.tanh();
        for m in &moments.mean_spin {
            assert_abs_diff_eq!(*m, t, epsilon = 1e-13);
        }
        for c in &moments.pair_corr {
            assert_abs_diff_eq!(*c, t * t, epsilon = 1e-13);
        }
        // and with the field off as well, the measure is uniform
        let flat = ModelParams::new(0.0, 0.0, 9).unwrap();
        let uniform = enumerate(&disorder, &flat, zero_norm()).unwrap();
        assert_relative_eq!(uniform.log_z, 9.0 * 2f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn zero_field_kills_the_magnetization() {
        let disorder = Disorder::sample(10, 33).unwrap();
        let params = ModelParams::new(0.4, 0.0, 10).unwrap();
        let moments = enumerate(&disorder, &params, zero_norm()).unwrap();
        for m in &moments.mean_spin {
            assert!(m.abs() < 1e-12, "residual magnetization {m}");
        }
    }

    #[test]
    fn relabeling_spins_preserves_the_measure() {
        let n = 6u32;
        let disorder = Disorder::sample(n, 5).unwrap();
        // cyclic relabeling i -> i+1 mod 6
        let perm = |i: usize| (i + 1) % 6;
        let mut permuted = vec![0.0; 15];
        for i in 0..6 {
            for j in (i + 1)..6 {
                let (pi, pj) = (perm(i), perm(j));
                let (lo, hi) = if pi < pj { (pi, pj) } else { (pj, pi) };
                permuted[triangle_index(6, lo, hi)] = disorder.coupling(i, j);
            }
        }
        let relabeled = Disorder::from_couplings(n, permuted).unwrap();
        let params = ModelParams::new(0.35, 0.2, n).unwrap();
        let norm = norm_at(0.35, 0.2);
        let a = enumerate(&disorder, &params, norm).unwrap();
        let b = enumerate(&relabeled, &params, norm).unwrap();
        assert_abs_diff_eq!(a.log_z, b.log_z, epsilon = 1e-12);
        for i in 0..6 {
            assert_abs_diff_eq!(a.mean_spin[i], b.mean_spin[perm(i)], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(a.mean_h_script, b.mean_h_script, epsilon = 1e-12);
    }

    #[test]
    fn refuses_oversized_systems() {
        let disorder = Disorder::sample(21, 1).unwrap();
        let params = ModelParams::new(0.2, 0.1, 21).unwrap();
        match enumerate(&disorder, &params, zero_norm()) {
            Err(Error::EnumerationCap { max: 20, got: 21 }) => {}
            other => panic!("expected cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn mgf_at_zero_is_one_and_matches_naive_values() {
        let disorder = Disorder::sample(6, 44).unwrap();
        let params = ModelParams::new(0.25, 0.3, 6).unwrap();
        let norm = norm_at(0.25, 0.3);
        let moments = enumerate_with_mgf(&disorder, &params, norm, &[0.0, 0.5, -1.0]).unwrap();
        assert_abs_diff_eq!(moments.mgf[0].1, 1.0, epsilon = 1e-14);
        // direct reference: sum exp(s + mu*h_script) / sum exp(s)
        let w = disorder.interaction_matrix();
        let scales = ObservableScales::new(&params, norm);
        for &(mu, reported) in &moments.mgf[1..] {
            let mut num = 0.0;
            let mut den = 0.0;
            for k in 0..64u64 {
                let spins: Vec<f64> = (0..6)
                    .map(|i| if k >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect();
                let mut energy = 0.0;
                for i in 0..6 {
                    for j in (i + 1)..6 {
                        energy += w[i * 6 + j] * spins[i] * spins[j];
                    }
                }
                let magnet = spins.iter().sum::<f64>() as i64;
                let s = scales.exponent(energy, magnet);
                num += (s + mu * scales.h_script(energy, magnet)).exp();
                den += s.exp();
            }
            assert_relative_eq!(reported, num / den, max_relative = 1e-12);
        }
    }

    #[test]
    fn moment_inequalities_hold() {
        for seed in [3u64, 4, 5] {
            let disorder = Disorder::sample(8, seed).unwrap();
            let params = ModelParams::new(0.45, 0.6, 8).unwrap();
            let m = enumerate(&disorder, &params, norm_at(0.45, 0.6)).unwrap();
            assert!(m.mean_spin.iter().all(|s| s.abs() <= 1.0));
            assert!(m.pair_corr.iter().all(|c| c.abs() <= 1.0));
            assert!(m.var_h_script >= 0.0);
            assert!(m.overlap_second >= m.overlap_mean * m.overlap_mean - 1e-15);
        }
    }

    #[test]
    fn singleton_ensemble_equals_plain_enumeration() {
        let params = ModelParams::new(0.25, 0.3, 6).unwrap();
        let norm = norm_at(0.25, 0.3);
        let ensemble = disorder_average_exact(&params, norm, 1, 99).unwrap();
        let disorder = Disorder::sample(6, ensemble.disorder_seeds[0]).unwrap();
        let single = enumerate(&disorder, &params, norm).unwrap();
        assert_eq!(ensemble.nu_h.estimate, single.mean_h_script);
        assert_eq!(ensemble.nu_h2.estimate, single.second_moment_h());
        assert!(ensemble.nu_h.standard_error.is_nan());
        assert!(ensemble.var_quenched_mean.estimate.is_nan());
    }

    #[test]
    fn averaging_a_constant_returns_it_exactly() {
        let params = ModelParams::new(0.3, 0.2, 5).unwrap();
        let norm = norm_at(0.3, 0.2);
        let ones: Vec<f64> = (0..4)
            .map(|i| {
                let seed = rng::derive_seed(17, Domain::Disorder, i);
                let disorder = Disorder::sample(5, seed).unwrap();
                enumerate_with_mgf(&disorder, &params, norm, &[0.0]).unwrap().mgf[0].1
            })
            .collect();
        let jk = jackknife(&ones, crate::stats::mean).unwrap();
        assert_eq!(jk.estimate, 1.0);
        assert_eq!(jk.standard_error, 0.0);
    }

    #[test]
    fn overlap_concentrates_as_the_system_grows() {
        let norm = norm_at(0.25, 0.3);
        let mut values = Vec::new();
        for n in [8u32, 12, 16] {
            let params = ModelParams::new(0.25, 0.3, n).unwrap();
            let ensemble = disorder_average_exact(&params, norm, 40, 2024).unwrap();
            values.push(ensemble.nu_overlap_sq.estimate);
        }
        assert!(
            values[0] > values[1] && values[1] > values[2],
            "nu((R - q2)^2) should fall with N, got {values:?}"
        );
    }
}
