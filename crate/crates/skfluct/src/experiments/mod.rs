//! Batch experiments and their on-disk formats.
//!
//! Each experiment writes CSV tables (one row type per file, headers always
//! present, floats at full precision) plus a JSON manifest that records the
//! configuration, seeds and output digests needed to reproduce the run.

mod manifest;
mod scan;
mod validate;

pub use manifest::{sha256_hex, with_manifest, OutputDigest, RunManifest, RunStatus};
pub use scan::{
    analyze_size, cf_rows, overlap_scaling, quenched_disorder_rows, quenched_mean_row, run_scan,
    run_size, run_size_with, theory_at, CfRow, QuenchedDisorderRow, QuenchedMeanRow, ScanConfig,
    ScanOutcome, ScanRow, SizeEnsemble, SizeTheory, w1_scaling,
};
pub use validate::{
    run_validation, ValidateConfig, ValidationReport, ValidationRow, OBSERVABLES,
};

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::gibbs::QuenchedMoments;
use crate::mc::PerDisorderEstimate;

/// Floats in CSV output carry 17 significant digits, enough to round-trip
/// an f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A struct that knows how to lay itself out as one CSV record.
pub trait CsvRow {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

pub fn write_csv_to<W: std::io::Write, R: CsvRow>(writer: W, rows: &[R]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(writer);
    writer.write_record(R::header())?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    write_csv_to(std::fs::File::create(path)?, rows)
}

/// One exactly enumerated disorder, flattened for tabular output.
#[derive(Debug, Clone, Serialize)]
pub struct EnumerateRow {
    pub n: u32,
    pub disorder_index: usize,
    pub disorder_seed: u64,
    pub log_z: f64,
    pub mean_spin1: f64,
    pub mean_e: f64,
    pub var_e: f64,
    pub mean_m: f64,
    pub var_m: f64,
    pub mean_h: f64,
    pub var_h: f64,
    pub second_moment_h: f64,
    pub overlap_mean: f64,
    pub overlap_second: f64,
}

impl EnumerateRow {
    pub fn new(n: u32, disorder_index: usize, disorder_seed: u64, m: &QuenchedMoments) -> Self {
        Self {
            n,
            disorder_index,
            disorder_seed,
            log_z: m.log_z,
            mean_spin1: m.mean_spin[0],
            mean_e: m.mean_e_script,
            var_e: m.var_e_script,
            mean_m: m.mean_m_script,
            var_m: m.var_m_script,
            mean_h: m.mean_h_script,
            var_h: m.var_h_script,
            second_moment_h: m.second_moment_h(),
            overlap_mean: m.overlap_mean,
            overlap_second: m.overlap_second,
        }
    }
}

impl CsvRow for EnumerateRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n",
            "disorder_index",
            "disorder_seed",
            "log_z",
            "mean_spin1",
            "mean_e",
            "var_e",
            "mean_m",
            "var_m",
            "mean_h",
            "var_h",
            "second_moment_h",
            "overlap_mean",
            "overlap_second",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.disorder_index.to_string(),
            self.disorder_seed.to_string(),
            fmt_f64(self.log_z),
            fmt_f64(self.mean_spin1),
            fmt_f64(self.mean_e),
            fmt_f64(self.var_e),
            fmt_f64(self.mean_m),
            fmt_f64(self.var_m),
            fmt_f64(self.mean_h),
            fmt_f64(self.var_h),
            fmt_f64(self.second_moment_h),
            fmt_f64(self.overlap_mean),
            fmt_f64(self.overlap_second),
        ]
    }
}

/// One sampled disorder, flattened for tabular output.
#[derive(Debug, Clone, Serialize)]
pub struct McDisorderRow {
    pub n: u32,
    pub disorder_index: usize,
    pub disorder_seed: u64,
    pub mean_h: f64,
    pub var_h: f64,
    pub mean_e: f64,
    pub mean_m: f64,
    pub mean_spin1: f64,
    pub overlap_mean: f64,
    pub overlap_second: f64,
    pub ess_h: f64,
    pub low_ess: bool,
}

impl McDisorderRow {
    pub fn new(disorder_index: usize, d: &PerDisorderEstimate) -> Self {
        Self {
            n: d.n_spins,
            disorder_index,
            disorder_seed: d.disorder_seed,
            mean_h: d.mean_h(),
            var_h: d.var_h(),
            mean_e: d.mean_e(),
            mean_m: d.mean_m(),
            mean_spin1: d.mean_spin1(),
            overlap_mean: d.overlap_mean,
            overlap_second: d.overlap_second,
            ess_h: d.ess_h,
            low_ess: d.low_ess,
        }
    }
}

impl CsvRow for McDisorderRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n",
            "disorder_index",
            "disorder_seed",
            "mean_h",
            "var_h",
            "mean_e",
            "mean_m",
            "mean_spin1",
            "overlap_mean",
            "overlap_second",
            "ess_h",
            "low_ess",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.disorder_index.to_string(),
            self.disorder_seed.to_string(),
            fmt_f64(self.mean_h),
            fmt_f64(self.var_h),
            fmt_f64(self.mean_e),
            fmt_f64(self.mean_m),
            fmt_f64(self.mean_spin1),
            fmt_f64(self.overlap_mean),
            fmt_f64(self.overlap_second),
            fmt_f64(self.ess_h),
            self.low_ess.to_string(),
        ]
    }
}

impl CsvRow for ScanRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n",
            "beta",
            "h",
            "n_disorders",
            "size_seed",
            "q1",
            "q2",
            "sigma_a2_theory",
            "sigma_q2_variant_a",
            "sigma_q2_variant_b",
            "sigma_q2_sim",
            "sigma_q2_sim_se",
            "w1_h_annealed",
            "w1_h_annealed_se",
            "levy_quenched_median",
            "levy_quenched_median_se",
            "var_annealed_h",
            "var_annealed_h_se",
            "var_quenched_mean_h",
            "var_quenched_mean_h_se",
            "nu_overlap_sq",
            "nu_overlap_sq_se",
            "stein_annealed_tanh",
            "stein_annealed_tanh_se",
            "stein_annealed_arctan",
            "stein_annealed_arctan_se",
            "stein_annealed_soft_clip",
            "stein_annealed_soft_clip_se",
            "stein_quenched_tanh",
            "stein_quenched_tanh_se",
            "stein_quenched_tanh_naive",
            "stein_quenched_arctan",
            "stein_quenched_arctan_se",
            "stein_quenched_arctan_naive",
            "stein_quenched_soft_clip",
            "stein_quenched_soft_clip_se",
            "stein_quenched_soft_clip_naive",
            "variance_concentration",
            "variance_concentration_se",
            "variance_concentration_naive",
            "mean_ess_h",
            "n_low_ess",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.beta),
            fmt_f64(self.h),
            self.n_disorders.to_string(),
            self.size_seed.to_string(),
            fmt_f64(self.q1),
            fmt_f64(self.q2),
            fmt_f64(self.sigma_a2_theory),
            fmt_f64(self.sigma_q2_variant_a),
            fmt_f64(self.sigma_q2_variant_b),
            fmt_f64(self.sigma_q2_sim),
            fmt_f64(self.sigma_q2_sim_se),
            fmt_f64(self.w1_h_annealed),
            fmt_f64(self.w1_h_annealed_se),
            fmt_f64(self.levy_quenched_median),
            fmt_f64(self.levy_quenched_median_se),
            fmt_f64(self.var_annealed_h),
            fmt_f64(self.var_annealed_h_se),
            fmt_f64(self.var_quenched_mean_h),
            fmt_f64(self.var_quenched_mean_h_se),
            fmt_f64(self.nu_overlap_sq),
            fmt_f64(self.nu_overlap_sq_se),
            fmt_f64(self.stein_annealed_tanh),
            fmt_f64(self.stein_annealed_tanh_se),
            fmt_f64(self.stein_annealed_arctan),
            fmt_f64(self.stein_annealed_arctan_se),
            fmt_f64(self.stein_annealed_soft_clip),
            fmt_f64(self.stein_annealed_soft_clip_se),
            fmt_f64(self.stein_quenched_tanh),
            fmt_f64(self.stein_quenched_tanh_se),
            fmt_f64(self.stein_quenched_tanh_naive),
            fmt_f64(self.stein_quenched_arctan),
            fmt_f64(self.stein_quenched_arctan_se),
            fmt_f64(self.stein_quenched_arctan_naive),
            fmt_f64(self.stein_quenched_soft_clip),
            fmt_f64(self.stein_quenched_soft_clip_se),
            fmt_f64(self.stein_quenched_soft_clip_naive),
            fmt_f64(self.variance_concentration),
            fmt_f64(self.variance_concentration_se),
            fmt_f64(self.variance_concentration_naive),
            fmt_f64(self.mean_ess_h),
            self.n_low_ess.to_string(),
        ]
    }
}

impl CsvRow for QuenchedDisorderRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n",
            "disorder_index",
            "disorder_seed",
            "levy_centered",
            "mean_h",
            "var_h",
            "ess_h",
            "low_ess",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.disorder_index.to_string(),
            self.disorder_seed.to_string(),
            fmt_f64(self.levy_centered),
            fmt_f64(self.mean_h),
            fmt_f64(self.var_h),
            fmt_f64(self.ess_h),
            self.low_ess.to_string(),
        ]
    }
}

impl CsvRow for QuenchedMeanRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n",
            "beta",
            "h",
            "n_disorders",
            "var_quenched_mean_h",
            "var_quenched_mean_h_se",
            "variance_gap",
            "sigma_q2_sim",
            "levy_means",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.beta),
            fmt_f64(self.h),
            self.n_disorders.to_string(),
            fmt_f64(self.var_quenched_mean_h),
            fmt_f64(self.var_quenched_mean_h_se),
            fmt_f64(self.variance_gap),
            fmt_f64(self.sigma_q2_sim),
            fmt_f64(self.levy_means),
        ]
    }
}

impl CsvRow for CfRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n",
            "t",
            "re",
            "im",
            "modulus",
            "phase",
            "se_re",
            "se_im",
            "gaussian_re",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.t),
            fmt_f64(self.re),
            fmt_f64(self.im),
            fmt_f64(self.modulus),
            fmt_f64(self.phase),
            fmt_f64(self.se_re),
            fmt_f64(self.se_im),
            fmt_f64(self.gaussian_re),
        ]
    }
}

impl CsvRow for ValidationRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n",
            "observable",
            "n_disorders",
            "exact_mean",
            "mc_mean",
            "mean_diff",
            "se_diff",
            "z",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.observable.clone(),
            self.n_disorders.to_string(),
            fmt_f64(self.exact_mean),
            fmt_f64(self.mc_mean),
            fmt_f64(self.mean_diff),
            fmt_f64(self.se_diff),
            fmt_f64(self.z),
        ]
    }
}
