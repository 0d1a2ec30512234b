//! Metropolis Monte Carlo for the quenched Gibbs measure.
//!
//! Sequential-site sweeps with cached local fields; several independent
//! chains per disorder give replica overlaps and the disjoint sample halves
//! that unbiased product estimators need. The weight convention matches the
//! enumerator: a flip of spin `i` changes the log weight by
//! `-2 sigma_i (beta ell_i + h)` with `ell_i = sum_j g_ij sigma_j / sqrt(N)`.
//!
//! Stationarity is not taken on faith: the test suite drives every recorded
//! observable against exact enumeration on small systems.

use crate::error::{Error, Result};
use crate::gibbs::Disorder;
use crate::params::{ModelParams, Normalization};
use crate::rng::{self, Domain};
use crate::stats::{jackknife, mean, sample_variance, Jackknife};
use rand::Rng;
use rayon::prelude::*;

/// Sweeps between from-scratch recomputations of the cached fields.
const REFRESH_SWEEPS: u32 = 2000;

/// Largest incremental-vs-recomputed field discrepancy tolerated at a
/// refresh before the run is declared inconsistent.
const DRIFT_TOLERANCE: f64 = 1e-7;

/// One spin configuration with cached local fields
/// `ell_i = sum_j w_ij sigma_j` and running energy `E = sum_{i<j} w_ij
/// sigma_i sigma_j`, where `w` is the scaled interaction matrix.
#[derive(Debug, Clone)]
pub struct SpinState {
    spins: Vec<f64>,
    fields: Vec<f64>,
    energy: f64,
    magnet: i64,
}

impl SpinState {
    /// Uniformly random configuration.
    pub fn random<R: Rng>(n: usize, w: &[f64], rng: &mut R) -> Self {
        let spins: Vec<f64> = (0..n)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Self::from_spin_vector(spins, w)
    }

    /// Wraps an explicit +-1 configuration.
    pub fn from_spins(spins: Vec<f64>, w: &[f64]) -> Result<Self> {
        if spins.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidArgument("spins must be +-1".into()));
        }
        if w.len() != spins.len() * spins.len() {
            return Err(Error::InvalidArgument(
                "interaction matrix does not match spin count".into(),
            ));
        }
        Ok(Self::from_spin_vector(spins, w))
    }

    fn from_spin_vector(spins: Vec<f64>, w: &[f64]) -> Self {
        let mut state = Self {
            magnet: spins.iter().map(|s| *s as i64).sum(),
            fields: vec![0.0; spins.len()],
            energy: 0.0,
            spins,
        };
        state.refresh(w);
        state
    }

    /// Recomputes fields and energy from scratch; returns the largest
    /// absolute discrepancy the incremental bookkeeping had accumulated.
    pub fn refresh(&mut self, w: &[f64]) -> f64 {
        let n = self.spins.len();
        let mut drift = 0.0f64;
        for i in 0..n {
            let row = &w[i * n..(i + 1) * n];
            let exact: f64 = row.iter().zip(&self.spins).map(|(wij, s)| wij * s).sum();
            drift = drift.max((exact - self.fields[i]).abs());
            self.fields[i] = exact;
        }
        let exact_energy = 0.5
            * self
                .spins
                .iter()
                .zip(&self.fields)
                .map(|(s, l)| s * l)
                .sum::<f64>();
        drift = drift.max((exact_energy - self.energy).abs());
        self.energy = exact_energy;
        drift
    }

    pub fn spins(&self) -> &[f64] {
        &self.spins
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn magnetization_sum(&self) -> i64 {
        self.magnet
    }
}

/// Log-weight change from flipping spin `i`.
fn flip_log_weight(state: &SpinState, i: usize, params: &ModelParams) -> f64 {
    -2.0 * state.spins[i] * (params.beta * state.fields[i] + params.h)
}

/// One systematic pass over all sites. Each proposal draws its uniform
/// unconditionally, so the random stream stays aligned across parameter
/// changes (useful for coupled comparisons).
pub fn metropolis_sweep<R: Rng>(
    state: &mut SpinState,
    w: &[f64],
    params: &ModelParams,
    rng: &mut R,
) {
    let n = state.spins.len();
    debug_assert_eq!(w.len(), n * n);
    for i in 0..n {
        let delta = flip_log_weight(state, i, params);
        let u: f64 = rng.gen();
        // For delta >= 0 the exp is >= 1 > u, so skipping it changes nothing.
        if delta >= 0.0 || u < delta.exp() {
            let flipped = -state.spins[i];
            // ell_i excludes sigma_i, so it is the same before and after
            state.energy += 2.0 * flipped * state.fields[i];
            state.magnet += if flipped > 0.0 { 2 } else { -2 };
            state.spins[i] = flipped;
            let step = 2.0 * flipped;
            let row = &w[i * n..(i + 1) * n];
            for (f, wij) in state.fields.iter_mut().zip(row) {
                *f += step * wij;
            }
        }
    }
}

/// Chain schedule. `sweeps` counts total passes including `burn_in`;
/// after burn-in every `thin`-th sweep is recorded.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChainConfig {
    pub sweeps: u32,
    pub burn_in: u32,
    pub thin: u32,
    pub n_chains: u32,
    /// Pooled effective-sample-size floor below which the estimate is
    /// flagged (not failed).
    pub ess_floor: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            sweeps: 20_000,
            burn_in: 2_000,
            thin: 5,
            n_chains: 4,
            ess_floor: 200.0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidArgument(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be at least 1".into()));
        }
        if self.n_chains < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 chains for replica overlaps".into(),
            ));
        }
        Ok(())
    }

    pub fn samples_per_chain(&self) -> usize {
        ((self.sweeps - self.burn_in) / self.thin) as usize
    }
}

/// Monte Carlo summaries for one disorder realization.
///
/// Raw thinned `script_H` samples are kept per chain: downstream
/// estimators form products of expectations from disjoint chains, which
/// needs the samples rather than precomputed moments.
#[derive(Debug, Clone)]
pub struct PerDisorderEstimate {
    pub disorder_seed: u64,
    pub n_spins: u32,
    pub chain_h_samples: Vec<Vec<f64>>,
    pub chain_mean_e: Vec<f64>,
    pub chain_mean_m: Vec<f64>,
    pub chain_mean_spin1: Vec<f64>,
    /// Mean of the replica overlap over all chain pairs and recorded sweeps.
    pub overlap_mean: f64,
    /// Mean of the squared overlap.
    pub overlap_second: f64,
    pub n_overlap_samples: usize,
    /// Pooled effective sample size of the `script_H` series.
    pub ess_h: f64,
    pub low_ess: bool,
}

impl PerDisorderEstimate {
    pub fn pooled_h(&self) -> Vec<f64> {
        self.chain_h_samples.iter().flatten().copied().collect()
    }

    pub fn mean_h(&self) -> f64 {
        let total: f64 = self.chain_h_samples.iter().flatten().sum();
        let count: usize = self.chain_h_samples.iter().map(Vec::len).sum();
        total / count as f64
    }

    /// Quenched variance estimate `<script_H^2> - <script_H>^2` from the
    /// pooled samples.
    pub fn var_h(&self) -> f64 {
        let pooled = self.pooled_h();
        let m = mean(&pooled);
        pooled.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / pooled.len() as f64
    }

    pub fn second_moment_h(&self) -> f64 {
        let m = self.mean_h();
        self.var_h() + m * m
    }

    pub fn mean_e(&self) -> f64 {
        mean(&self.chain_mean_e)
    }

    pub fn mean_m(&self) -> f64 {
        mean(&self.chain_mean_m)
    }

    pub fn mean_spin1(&self) -> f64 {
        mean(&self.chain_mean_spin1)
    }

    /// Standard error of [`Self::mean_h`], using the autocorrelation-aware
    /// effective sample size.
    pub fn se_mean_h(&self) -> f64 {
        (self.var_h() / self.ess_h).sqrt()
    }

    /// `<(R_12 - q2)^2>` estimate.
    pub fn centered_overlap_square(&self, q2: f64) -> f64 {
        self.overlap_second - 2.0 * q2 * self.overlap_mean + q2 * q2
    }
}

/// Effective sample size by Geyer's initial positive, monotone sequence on
/// the autocovariance pairs. Clamped to `[1, n]`; degenerate or antithetic
/// series report `n`.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n.max(1) as f64;
    }
    let m = mean(series);
    let gamma = |k: usize| -> f64 {
        series[..n - k]
            .iter()
            .zip(&series[k..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n as f64
    };
    let g0 = gamma(0);
    if g0 <= 0.0 {
        return n as f64;
    }
    let mut long_run = -g0;
    let mut prev = f64::INFINITY;
    let mut pair_start = 0;
    while pair_start + 1 < n {
        let pair = gamma(pair_start) + gamma(pair_start + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        long_run += 2.0 * pair;
        prev = pair;
        pair_start += 2;
    }
    if long_run <= 0.0 {
        return n as f64;
    }
    (n as f64 * g0 / long_run).clamp(1.0, n as f64)
}

struct Normalizer {
    sqrt_n: f64,
    inv_n: f64,
    energy_shift: f64,
    q1: f64,
}

impl Normalizer {
    fn new(params: &ModelParams, norm: Normalization) -> Self {
        let n = params.n_spins as f64;
        Self {
            sqrt_n: n.sqrt(),
            inv_n: 1.0 / n,
            energy_shift: 0.5 * params.beta * n.sqrt() * (1.0 - norm.q2 * norm.q2),
            q1: norm.q1,
        }
    }

    fn e_script(&self, energy: f64) -> f64 {
        energy / self.sqrt_n - self.energy_shift
    }

    fn m_script(&self, magnet: i64) -> f64 {
        self.sqrt_n * (magnet as f64 * self.inv_n - self.q1)
    }
}

/// Runs `config.n_chains` independent chains on one disorder, all advanced
/// in lockstep so cross-chain overlaps can be recorded sweep by sweep.
/// Chain `c` draws from the stream `(master_seed, disorder_index, c)`.
pub fn run_chains(
    disorder: &Disorder,
    params: &ModelParams,
    norm: Normalization,
    config: &ChainConfig,
    master_seed: u64,
    disorder_index: u64,
) -> Result<PerDisorderEstimate> {
    config.validate()?;
    if params.n_spins != disorder.n_spins() {
        return Err(Error::InvalidArgument(format!(
            "params describe {} spins but disorder has {}",
            params.n_spins,
            disorder.n_spins()
        )));
    }
    let n = params.n_spins as usize;
    let w = disorder.interaction_matrix();
    let normalizer = Normalizer::new(params, norm);
    let n_chains = config.n_chains as usize;

    let mut rngs: Vec<_> = (0..n_chains)
        .map(|c| rng::stream(master_seed, Domain::Chain, disorder_index, c as u64))
        .collect();
    let mut states: Vec<SpinState> = rngs
        .iter_mut()
        .map(|r| SpinState::random(n, &w, r))
        .collect();

    let samples = config.samples_per_chain();
    let mut chain_h_samples: Vec<Vec<f64>> = vec![Vec::with_capacity(samples); n_chains];
    let mut sum_e = vec![0.0; n_chains];
    let mut sum_m = vec![0.0; n_chains];
    let mut sum_spin1 = vec![0.0; n_chains];
    let mut overlap_sum = 0.0;
    let mut overlap_sq_sum = 0.0;
    let mut n_overlap = 0usize;

    for sweep in 1..=config.sweeps {
        for (state, rng) in states.iter_mut().zip(&mut rngs) {
            metropolis_sweep(state, &w, params, rng);
        }
        if sweep % REFRESH_SWEEPS == 0 {
            for state in &mut states {
                let drift = state.refresh(&w);
                if drift > DRIFT_TOLERANCE {
                    return Err(Error::InternalConsistency(format!(
                        "cached fields drifted by {drift:.3e} after {sweep} sweeps"
                    )));
                }
            }
        }
        if sweep > config.burn_in && (sweep - config.burn_in).is_multiple_of(config.thin) {
            for (c, state) in states.iter().enumerate() {
                let e = normalizer.e_script(state.energy());
                let m = normalizer.m_script(state.magnetization_sum());
                chain_h_samples[c].push(e + m);
                sum_e[c] += e;
                sum_m[c] += m;
                sum_spin1[c] += state.spins()[0];
            }
            for a in 0..n_chains {
                for b in (a + 1)..n_chains {
                    let r = states[a]
                        .spins()
                        .iter()
                        .zip(states[b].spins())
                        .map(|(x, y)| x * y)
                        .sum::<f64>()
                        * normalizer.inv_n;
                    overlap_sum += r;
                    overlap_sq_sum += r * r;
                    n_overlap += 1;
                }
            }
        }
    }

    let count = samples as f64;
    let ess_h: f64 = chain_h_samples
        .iter()
        .map(|s| effective_sample_size(s))
        .sum();
    Ok(PerDisorderEstimate {
        disorder_seed: disorder.seed,
        n_spins: params.n_spins,
        chain_h_samples,
        chain_mean_e: sum_e.iter().map(|s| s / count).collect(),
        chain_mean_m: sum_m.iter().map(|s| s / count).collect(),
        chain_mean_spin1: sum_spin1.iter().map(|s| s / count).collect(),
        overlap_mean: overlap_sum / n_overlap as f64,
        overlap_second: overlap_sq_sum / n_overlap as f64,
        n_overlap_samples: n_overlap,
        low_ess: ess_h < config.ess_floor,
        ess_h,
    })
}

/// Monte Carlo results over an ensemble of disorders.
#[derive(Debug, Clone)]
pub struct McEnsemble {
    pub per_disorder: Vec<PerDisorderEstimate>,
}

impl McEnsemble {
    /// All recorded `script_H` samples pooled across disorders and chains
    /// with equal weight, in deterministic (disorder, chain, sweep) order.
    pub fn annealed_h_samples(&self) -> Vec<f64> {
        self.per_disorder.iter().flat_map(|d| d.pooled_h()).collect()
    }

    /// Across-disorder sample of the quenched means `<script_H>`.
    pub fn quenched_means(&self) -> Vec<f64> {
        self.per_disorder.iter().map(|d| d.mean_h()).collect()
    }

    /// `nu((R_12 - q2)^2)` with a jackknife error over disorders.
    pub fn nu_overlap_sq(&self, q2: f64) -> Result<Jackknife> {
        let values: Vec<f64> = self
            .per_disorder
            .iter()
            .map(|d| d.centered_overlap_square(q2))
            .collect();
        jackknife(&values, mean)
    }

    /// Across-disorder variance of `<script_H>` with a jackknife error.
    pub fn var_quenched_mean(&self) -> Result<Jackknife> {
        let means = self.quenched_means();
        jackknife(&means, sample_variance)
    }

    /// The leading `n_disorders` disorders as their own ensemble. Disorder
    /// streams are keyed by index, so this equals a fresh run with the
    /// smaller count bit for bit.
    pub fn truncated(&self, n_disorders: usize) -> Result<McEnsemble> {
        if n_disorders == 0 || n_disorders > self.per_disorder.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot take {n_disorders} disorders from an ensemble of {}",
                self.per_disorder.len()
            )));
        }
        Ok(McEnsemble {
            per_disorder: self.per_disorder[..n_disorders].to_vec(),
        })
    }
}

/// Independent disorders fanned out in parallel; the merge order is fixed
/// by disorder index, so output does not depend on the thread count.
/// Disorder `i` draws its couplings from the seed
/// `derive_seed(master_seed, Disorder, i)`, the same derivation the exact
/// enumerator uses, so both engines can be pointed at identical ensembles.
pub fn disorder_ensemble(
    params: &ModelParams,
    norm: Normalization,
    n_disorders: usize,
    config: &ChainConfig,
    master_seed: u64,
) -> Result<McEnsemble> {
    if n_disorders == 0 {
        return Err(Error::InvalidArgument("need at least one disorder".into()));
    }
    config.validate()?;
    let per_disorder: Vec<PerDisorderEstimate> = (0..n_disorders as u64)
        .into_par_iter()
        .map(|i| {
            let seed = rng::derive_seed(master_seed, Domain::Disorder, i);
            let disorder = Disorder::sample(params.n_spins, seed)?;
            run_chains(&disorder, params, norm, config, master_seed, i)
        })
        .collect::<Result<_>>()?;
    Ok(McEnsemble { per_disorder })
}
