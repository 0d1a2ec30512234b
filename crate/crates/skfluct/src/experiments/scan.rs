//! Size scans for the three limit theorems.
//!
//! One Monte Carlo ensemble per system size feeds every column: the pooled
//! sample tests the annealed law against N(0, sigma_A^2); the per-disorder
//! samples, centred at their own means, test the quenched law against
//! N(0, sigma_Q^2); the across-disorder sample of quenched means tests the
//! third law with variance sigma_A^2 - sigma_Q^2. Since the closed-form
//! expressions for sigma_Q^2 are ambiguous (two printed variants disagree),
//! quenched targets use the simulation value: the disorder average of the
//! per-disorder variance of script_H at the same size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{disorder_ensemble, ChainConfig, McEnsemble};
use crate::params::ModelParams;
use crate::rng::{derive_seed, Domain};
use crate::stats::{
    annealed_stein_residual, chain_views, jackknife, jackknife_groups, levy_to_gaussian, mean,
    quenched_stein_residual, test_function_battery, variance_concentration,
    wasserstein1_to_gaussian, EmpiricalSample, MeasureTag, ScalingFit,
};
use crate::theory::{sigma_a2_h, sigma_q2_closed, OverlapMoments};

/// Two-sided normal quantile for a 95% interval.
const Z_95: f64 = 1.959_963_984_540_054;
/// Disorder blocks used for jackknife errors of pooled statistics.
const JACKKNIFE_BLOCKS: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub beta: f64,
    pub h: f64,
    pub sizes: Vec<u32>,
    pub n_disorders: usize,
    pub chain: ChainConfig,
    pub master_seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            beta: 0.25,
            h: 0.3,
            sizes: vec![32, 64, 128, 256],
            n_disorders: 200,
            chain: ChainConfig::default(),
            master_seed: 0x5eed_cafe,
        }
    }
}

/// Size-independent theory columns for one (beta, h).
#[derive(Debug, Clone, Copy)]
pub struct SizeTheory {
    pub q1: f64,
    pub q2: f64,
    pub sigma_a2_h: f64,
    pub sigma_q2_variant_a: f64,
    pub sigma_q2_variant_b: f64,
}

pub fn theory_at(beta: f64, h: f64) -> Result<SizeTheory> {
    let moments = OverlapMoments::compute(beta, h)?;
    let closed = sigma_q2_closed(&moments)?;
    Ok(SizeTheory {
        q1: moments.q(1),
        q2: moments.q(2),
        sigma_a2_h: sigma_a2_h(&moments)?,
        sigma_q2_variant_a: closed.variant_a,
        sigma_q2_variant_b: closed.variant_b,
    })
}

/// One size's Monte Carlo data, tagged with the seed that regenerates it.
#[derive(Debug)]
pub struct SizeEnsemble {
    pub n: u32,
    /// Master seed of this size's disorder ensemble:
    /// `derive_seed(scan_master, Scan, n)`.
    pub size_seed: u64,
    pub ensemble: McEnsemble,
}

/// Run one size of the scan with an explicit disorder count.
pub fn run_size_with(config: &ScanConfig, n: u32, n_disorders: usize) -> Result<SizeEnsemble> {
    let params = ModelParams::new(config.beta, config.h, n)?;
    let norm = OverlapMoments::compute(config.beta, config.h)?.normalization();
    let size_seed = derive_seed(config.master_seed, Domain::Scan, n as u64);
    let ensemble = disorder_ensemble(&params, norm, n_disorders, &config.chain, size_seed)?;
    Ok(SizeEnsemble {
        n,
        size_seed,
        ensemble,
    })
}

pub fn run_size(config: &ScanConfig, n: u32) -> Result<SizeEnsemble> {
    run_size_with(config, n, config.n_disorders)
}

/// One row of the scan table. Theory columns repeat the same values on every
/// row sharing (beta, h); simulation columns carry jackknife or
/// order-statistic standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub n: u32,
    pub beta: f64,
    pub h: f64,
    pub n_disorders: usize,
    pub size_seed: u64,
    pub q1: f64,
    pub q2: f64,
    pub sigma_a2_theory: f64,
    pub sigma_q2_variant_a: f64,
    pub sigma_q2_variant_b: f64,
    pub sigma_q2_sim: f64,
    pub sigma_q2_sim_se: f64,
    pub w1_h_annealed: f64,
    pub w1_h_annealed_se: f64,
    pub levy_quenched_median: f64,
    pub levy_quenched_median_se: f64,
    pub var_annealed_h: f64,
    pub var_annealed_h_se: f64,
    pub var_quenched_mean_h: f64,
    pub var_quenched_mean_h_se: f64,
    pub nu_overlap_sq: f64,
    pub nu_overlap_sq_se: f64,
    pub stein_annealed_tanh: f64,
    pub stein_annealed_tanh_se: f64,
    pub stein_annealed_arctan: f64,
    pub stein_annealed_arctan_se: f64,
    pub stein_annealed_soft_clip: f64,
    pub stein_annealed_soft_clip_se: f64,
    pub stein_quenched_tanh: f64,
    pub stein_quenched_tanh_se: f64,
    pub stein_quenched_tanh_naive: f64,
    pub stein_quenched_arctan: f64,
    pub stein_quenched_arctan_se: f64,
    pub stein_quenched_arctan_naive: f64,
    pub stein_quenched_soft_clip: f64,
    pub stein_quenched_soft_clip_se: f64,
    pub stein_quenched_soft_clip_naive: f64,
    pub variance_concentration: f64,
    pub variance_concentration_se: f64,
    pub variance_concentration_naive: f64,
    pub mean_ess_h: f64,
    pub n_low_ess: usize,
}

fn population_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// W1 of the pooled sample to N(0, sigma^2), with a delete-block jackknife
/// over disorder groups. Blocks follow disorder order, so with a disorder
/// count divisible by the block count each block is a whole set of
/// disorders.
fn w1_block_jackknife(by_disorder: &[Vec<f64>], sigma: f64) -> Result<(f64, f64)> {
    let w1_of = |values: Vec<f64>| -> Result<f64> {
        let sample = EmpiricalSample::new(values, MeasureTag::Annealed)?;
        wasserstein1_to_gaussian(&sample, 0.0, sigma)
    };
    let pooled: Vec<f64> = by_disorder.iter().flatten().copied().collect();
    let estimate = w1_of(pooled)?;
    let d = by_disorder.len();
    let blocks = JACKKNIFE_BLOCKS.min(d);
    if blocks < 2 {
        return Ok((estimate, f64::NAN));
    }
    let mut deletes = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let lo = b * d / blocks;
        let hi = (b + 1) * d / blocks;
        let kept: Vec<f64> = by_disorder
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < lo || *i >= hi)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        deletes.push(w1_of(kept)?);
    }
    let center = mean(&deletes);
    let var = deletes
        .iter()
        .map(|v| (v - center) * (v - center))
        .sum::<f64>()
        * (blocks as f64 - 1.0)
        / blocks as f64;
    Ok((estimate, var.sqrt()))
}

/// Median plus an order-statistic standard error: the 95% binomial-rank
/// interval around the median, rescaled by the normal quantile.
fn median_with_se(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    if n < 8 {
        return (median, f64::NAN);
    }
    let half_width = Z_95 * 0.5 * (n as f64).sqrt();
    let lo = (n as f64 / 2.0 - half_width).floor().max(0.0) as usize;
    let hi = ((n as f64 / 2.0 + half_width).ceil() as usize).min(n - 1);
    (median, (sorted[hi] - sorted[lo]) / (2.0 * Z_95))
}

/// All derived columns for one size.
pub fn analyze_size(config: &ScanConfig, theory: &SizeTheory, size: &SizeEnsemble) -> Result<ScanRow> {
    let ens = &size.ensemble;
    let n_disorders = ens.per_disorder.len();
    let by_disorder: Vec<Vec<f64>> = ens.per_disorder.iter().map(|d| d.pooled_h()).collect();

    // Conditional variance of script_H, averaged over disorders: the
    // simulation stand-in for sigma_Q^2.
    let disorder_vars: Vec<f64> = ens.per_disorder.iter().map(|d| d.var_h()).collect();
    let sigma_q2_sim = jackknife(&disorder_vars, mean)?;
    if !(sigma_q2_sim.estimate.is_finite() && sigma_q2_sim.estimate > 0.0) {
        return Err(Error::InternalConsistency(format!(
            "simulated conditional variance must be positive, got {}",
            sigma_q2_sim.estimate
        )));
    }

    // Annealed distance to N(0, sigma_A^2).
    let (w1, w1_se) = w1_block_jackknife(&by_disorder, theory.sigma_a2_h.sqrt())?;

    // Quenched distances: each disorder's sample, centred at its own mean,
    // against N(0, sigma_Q2_sim).
    let sigma_q = sigma_q2_sim.estimate.sqrt();
    let mut levy_values = Vec::with_capacity(n_disorders);
    for pooled in &by_disorder {
        let m = mean(pooled);
        let centered: Vec<f64> = pooled.iter().map(|x| x - m).collect();
        let sample = EmpiricalSample::new(centered, MeasureTag::QuenchedSingleDisorder)?;
        levy_values.push(levy_to_gaussian(&sample, 0.0, sigma_q)?);
    }
    let (levy_median, levy_median_se) = median_with_se(&levy_values);

    let pooled_all: Vec<f64> = by_disorder.iter().flatten().copied().collect();
    let var_annealed =
        jackknife_groups(&pooled_all, JACKKNIFE_BLOCKS.min(n_disorders), population_variance)?;
    let var_quenched_mean = ens.var_quenched_mean()?;
    let nu_overlap = ens.nu_overlap_sq(theory.q2)?;

    // Stein residuals: annealed battery against sigma_A^2 on the pooled
    // sample, quenched split battery against sigma_Q2_sim per disorder.
    let annealed_battery = test_function_battery(theory.sigma_a2_h.sqrt())?;
    let mut annealed_res = Vec::with_capacity(3);
    for f in &annealed_battery {
        annealed_res.push(annealed_stein_residual(
            &pooled_all,
            theory.sigma_a2_h,
            f,
            JACKKNIFE_BLOCKS.min(n_disorders),
        )?);
    }
    let chain_data: Vec<Vec<Vec<f64>>> = ens
        .per_disorder
        .iter()
        .map(|d| d.chain_h_samples.clone())
        .collect();
    let views = chain_views(&chain_data);
    let quenched_battery = test_function_battery(sigma_q)?;
    let mut quenched_res = Vec::with_capacity(3);
    for f in &quenched_battery {
        quenched_res.push(quenched_stein_residual(&views, sigma_q2_sim.estimate, f)?);
    }
    let concentration = variance_concentration(&views, sigma_q2_sim.estimate)?;

    let mean_ess = mean(&ens.per_disorder.iter().map(|d| d.ess_h).collect::<Vec<f64>>());
    let n_low_ess = ens.per_disorder.iter().filter(|d| d.low_ess).count();

    Ok(ScanRow {
        n: size.n,
        beta: config.beta,
        h: config.h,
        n_disorders,
        size_seed: size.size_seed,
        q1: theory.q1,
        q2: theory.q2,
        sigma_a2_theory: theory.sigma_a2_h,
        sigma_q2_variant_a: theory.sigma_q2_variant_a,
        sigma_q2_variant_b: theory.sigma_q2_variant_b,
        sigma_q2_sim: sigma_q2_sim.estimate,
        sigma_q2_sim_se: sigma_q2_sim.standard_error,
        w1_h_annealed: w1,
        w1_h_annealed_se: w1_se,
        levy_quenched_median: levy_median,
        levy_quenched_median_se: levy_median_se,
        var_annealed_h: var_annealed.estimate,
        var_annealed_h_se: var_annealed.standard_error,
        var_quenched_mean_h: var_quenched_mean.estimate,
        var_quenched_mean_h_se: var_quenched_mean.standard_error,
        nu_overlap_sq: nu_overlap.estimate,
        nu_overlap_sq_se: nu_overlap.standard_error,
        stein_annealed_tanh: annealed_res[0].residual,
        stein_annealed_tanh_se: annealed_res[0].standard_error,
        stein_annealed_arctan: annealed_res[1].residual,
        stein_annealed_arctan_se: annealed_res[1].standard_error,
        stein_annealed_soft_clip: annealed_res[2].residual,
        stein_annealed_soft_clip_se: annealed_res[2].standard_error,
        stein_quenched_tanh: quenched_res[0].estimate,
        stein_quenched_tanh_se: quenched_res[0].standard_error,
        stein_quenched_tanh_naive: quenched_res[0].naive_estimate,
        stein_quenched_arctan: quenched_res[1].estimate,
        stein_quenched_arctan_se: quenched_res[1].standard_error,
        stein_quenched_arctan_naive: quenched_res[1].naive_estimate,
        stein_quenched_soft_clip: quenched_res[2].estimate,
        stein_quenched_soft_clip_se: quenched_res[2].standard_error,
        stein_quenched_soft_clip_naive: quenched_res[2].naive_estimate,
        variance_concentration: concentration.estimate,
        variance_concentration_se: concentration.standard_error,
        variance_concentration_naive: concentration.naive_estimate,
        mean_ess_h: mean_ess,
        n_low_ess,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanOutcome {
    pub rows: Vec<ScanRow>,
}

/// The full scan: one ensemble per size, analyzed and discarded in turn.
pub fn run_scan(config: &ScanConfig) -> Result<ScanOutcome> {
    if config.sizes.len() < 2 {
        return Err(Error::InvalidArgument(
            "a scan needs at least two sizes".into(),
        ));
    }
    let theory = theory_at(config.beta, config.h)?;
    let mut rows = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let size = run_size(config, n)?;
        rows.push(analyze_size(config, &theory, &size)?);
    }
    Ok(ScanOutcome { rows })
}

/// Power-law fit of the annealed W1 column, with a delta-method slope CI
/// from the per-size jackknife errors.
pub fn w1_scaling(rows: &[ScanRow]) -> Result<ScalingFit> {
    let sizes: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.w1_h_annealed).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.w1_h_annealed_se).collect();
    crate::stats::scaling_fit_with_errors(&sizes, &values, &errors)
}

/// Power-law fit of nu((R_12 - q2)^2) against N.
pub fn overlap_scaling(rows: &[ScanRow]) -> Result<ScalingFit> {
    let sizes: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.nu_overlap_sq).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.nu_overlap_sq_se).collect();
    crate::stats::scaling_fit_with_errors(&sizes, &values, &errors)
}

/// Per-disorder detail row for the quenched scan output.
#[derive(Debug, Clone, Serialize)]
pub struct QuenchedDisorderRow {
    pub n: u32,
    pub disorder_index: usize,
    pub disorder_seed: u64,
    pub levy_centered: f64,
    pub mean_h: f64,
    pub var_h: f64,
    pub ess_h: f64,
    pub low_ess: bool,
}

/// Per-disorder Levy distances of the centred quenched samples to
/// N(0, sigma_q2). Pass the row's `sigma_q2_sim` for the self-consistent
/// target.
pub fn quenched_disorder_rows(
    size: &SizeEnsemble,
    sigma_q2: f64,
) -> Result<Vec<QuenchedDisorderRow>> {
    if !(sigma_q2.is_finite() && sigma_q2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target conditional variance must be positive, got {sigma_q2}"
        )));
    }
    let sigma_q = sigma_q2.sqrt();
    size.ensemble
        .per_disorder
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let pooled = d.pooled_h();
            let m = mean(&pooled);
            let centered: Vec<f64> = pooled.iter().map(|x| x - m).collect();
            let sample = EmpiricalSample::new(centered, MeasureTag::QuenchedSingleDisorder)?;
            Ok(QuenchedDisorderRow {
                n: size.n,
                disorder_index: i,
                disorder_seed: d.disorder_seed,
                levy_centered: levy_to_gaussian(&sample, 0.0, sigma_q)?,
                mean_h: m,
                var_h: d.var_h(),
                ess_h: d.ess_h,
                low_ess: d.low_ess,
            })
        })
        .collect()
}

/// Summary row for the quenched-mean law: the across-disorder sample of
/// `<script_H>` against N(0, sigma_A^2 - sigma_Q^2).
#[derive(Debug, Clone, Serialize)]
pub struct QuenchedMeanRow {
    pub n: u32,
    pub beta: f64,
    pub h: f64,
    pub n_disorders: usize,
    pub var_quenched_mean_h: f64,
    pub var_quenched_mean_h_se: f64,
    /// sigma_A^2 (theory) minus sigma_Q^2 (simulation), the predicted
    /// variance of the quenched mean. Zero at h = 0 up to noise.
    pub variance_gap: f64,
    pub sigma_q2_sim: f64,
    /// Levy distance of the raw quenched means to N(0, variance_gap); the
    /// gap may be ~0 at h = 0, where the target degenerates to a point mass.
    pub levy_means: f64,
}

pub fn quenched_mean_row(
    config: &ScanConfig,
    theory: &SizeTheory,
    size: &SizeEnsemble,
) -> Result<QuenchedMeanRow> {
    let means = size.ensemble.quenched_means();
    let var = size.ensemble.var_quenched_mean()?;
    let disorder_vars: Vec<f64> =
        size.ensemble.per_disorder.iter().map(|d| d.var_h()).collect();
    let sigma_q2_sim = mean(&disorder_vars);
    let gap = (theory.sigma_a2_h - sigma_q2_sim).max(0.0);
    let sample = EmpiricalSample::new(means, MeasureTag::AcrossDisorderMeans)?;
    Ok(QuenchedMeanRow {
        n: size.n,
        beta: config.beta,
        h: config.h,
        n_disorders: size.ensemble.per_disorder.len(),
        var_quenched_mean_h: var.estimate,
        var_quenched_mean_h_se: var.standard_error,
        variance_gap: gap,
        sigma_q2_sim,
        levy_means: levy_to_gaussian(&sample, 0.0, gap.sqrt())?,
    })
}

/// Characteristic-function table of the across-disorder means, with the
/// Gaussian prediction exp(-gap t^2 / 2) alongside.
#[derive(Debug, Clone, Serialize)]
pub struct CfRow {
    pub n: u32,
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub phase: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub gaussian_re: f64,
}

pub fn cf_rows(size: &SizeEnsemble, variance_gap: f64, t_grid: &[f64]) -> Result<Vec<CfRow>> {
    let means = size.ensemble.quenched_means();
    let points = crate::stats::empirical_cf(&means, t_grid)?;
    Ok(points
        .into_iter()
        .map(|p| CfRow {
            n: size.n,
            t: p.t,
            re: p.re,
            im: p.im,
            modulus: p.modulus,
            phase: p.phase,
            se_re: p.se_re,
            se_im: p.se_im,
            gaussian_re: (-0.5 * variance_gap * p.t * p.t).exp(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ScanConfig {
        ScanConfig {
            beta: 0.25,
            h: 0.3,
            sizes: vec![8, 12],
            n_disorders: 12,
            chain: ChainConfig {
                sweeps: 1_500,
                burn_in: 300,
                thin: 3,
                n_chains: 4,
                ess_floor: 0.0,
            },
            master_seed: 2_024,
        }
    }

    #[test]
    fn scan_rows_are_complete_and_deterministic() {
        let config = tiny_config();
        let outcome = run_scan(&config).unwrap();
        assert_eq!(outcome.rows.len(), 2);
        for row in &outcome.rows {
            assert!(row.sigma_q2_sim > 0.0);
            assert!(row.w1_h_annealed > 0.0);
            assert!(row.levy_quenched_median > 0.0);
            for se in [
                row.sigma_q2_sim_se,
                row.w1_h_annealed_se,
                row.levy_quenched_median_se,
                row.var_annealed_h_se,
                row.var_quenched_mean_h_se,
                row.nu_overlap_sq_se,
                row.stein_annealed_tanh_se,
                row.stein_quenched_tanh_se,
                row.variance_concentration_se,
            ] {
                assert!(se >= 0.0, "negative standard error {se}");
            }
            assert!(row.stein_annealed_tanh >= 0.0);
        }
        // Theory columns identical across rows sharing (beta, h).
        assert_eq!(outcome.rows[0].q2, outcome.rows[1].q2);
        assert_eq!(outcome.rows[0].sigma_a2_theory, outcome.rows[1].sigma_a2_theory);
        assert_eq!(
            outcome.rows[0].sigma_q2_variant_a,
            outcome.rows[1].sigma_q2_variant_a
        );
        // Same config, same numbers.
        let again = run_scan(&config).unwrap();
        assert_eq!(
            serde_json::to_string(&outcome).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }

    #[test]
    fn truncated_ensemble_matches_fresh_smaller_run() {
        let config = tiny_config();
        let big = run_size_with(&config, 8, 12).unwrap();
        let small = run_size_with(&config, 8, 5).unwrap();
        let truncated = big.ensemble.truncated(5).unwrap();
        for (a, b) in truncated.per_disorder.iter().zip(&small.ensemble.per_disorder) {
            assert_eq!(a.disorder_seed, b.disorder_seed);
            assert_eq!(a.chain_h_samples, b.chain_h_samples);
        }
    }

    #[test]
    fn quenched_mean_and_cf_rows_are_consistent() {
        let config = tiny_config();
        let theory = theory_at(config.beta, config.h).unwrap();
        let size = run_size(&config, 8).unwrap();
        let row = quenched_mean_row(&config, &theory, &size).unwrap();
        assert!(row.var_quenched_mean_h > 0.0);
        assert!(row.levy_means >= 0.0 && row.levy_means <= 1.0);
        let cf = cf_rows(&size, row.variance_gap, &[0.0, 1.0]).unwrap();
        assert_eq!(cf[0].re, 1.0);
        assert_eq!(cf[0].gaussian_re, 1.0);
        assert!(cf[1].modulus <= 1.0);
        let detail = quenched_disorder_rows(&size, row.sigma_q2_sim).unwrap();
        assert_eq!(detail.len(), config.n_disorders);
        assert!(detail.iter().all(|d| d.levy_centered >= 0.0));
    }

    #[test]
    fn median_se_brackets_the_median() {
        let values: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let (median, se) = median_with_se(&values);
        assert!((median - 0.4975).abs() < 1e-12);
        // Uniform order statistics: the rank interval spans about
        // 1.96*sqrt(n)/n in probability, so se ~ sqrt(n)/(2n) * spread.
        assert!(se > 0.0 && se < 0.1, "se {se}");
    }
}
