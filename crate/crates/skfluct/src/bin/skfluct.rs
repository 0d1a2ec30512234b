//! Command line driver for the canonical experiments.
//!
//! Every subcommand is a thin wrapper over `skfluct::experiments`: resolve
//! settings (flags override the optional JSON config file, defaults fill the
//! rest), run the library call, write tables, and record a manifest next to
//! each primary output. Exit codes: 0 success, 2 bad arguments or out of
//! regime, 3 a validation or internal consistency failure, 4 I/O.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use skfluct::error::{Error, Result};
use skfluct::experiments::{
    cf_rows, overlap_scaling, quenched_disorder_rows, quenched_mean_row, run_size_with,
    run_validation, theory_at, w1_scaling, with_manifest, write_csv, write_csv_to, CfRow,
    CsvRow, EnumerateRow, McDisorderRow, QuenchedDisorderRow, QuenchedMeanRow, ScanConfig,
    ScanRow, ValidateConfig,
};
use skfluct::gibbs::disorder_average_exact;
use skfluct::mc::{disorder_ensemble, ChainConfig};
use skfluct::stats::{
    annealed_stein_residual, chain_views, quenched_stein_residual, stein_solve,
    test_function_battery, variance_concentration,
};
use skfluct::theory::{theory_report, OverlapMoments};
use skfluct::ModelParams;

#[derive(Parser)]
#[command(
    name = "skfluct",
    version,
    about = "Fluctuations of the SK energy density: theory, sampling, limit-theorem scans"
)]
struct Cli {
    /// JSON config file mirroring the flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

/// Optional file-backed defaults. Field names mirror the long flags.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    beta: Option<f64>,
    h: Option<f64>,
    n: Option<usize>,
    n_spins: Option<u32>,
    sizes: Option<Vec<u32>>,
    disorders: Option<usize>,
    sweeps: Option<u32>,
    burnin: Option<u32>,
    thin: Option<u32>,
    chains: Option<u32>,
    seed: Option<u64>,
    sigma: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Args)]
struct CommonFlags {
    /// Inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// External field (enters the Gibbs exponent unscaled by beta).
    #[arg(long)]
    h: Option<f64>,
    /// Master seed; every disorder and chain stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted (and no manifest is written).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format for the primary output.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ChainFlags {
    /// Metropolis sweeps per chain after burn-in.
    #[arg(long)]
    sweeps: Option<u32>,
    /// Discarded leading sweeps per chain.
    #[arg(long)]
    burnin: Option<u32>,
    /// Keep one sample every `thin` sweeps.
    #[arg(long)]
    thin: Option<u32>,
    /// Independent chains (replicas) per disorder.
    #[arg(long)]
    chains: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the replica-symmetric predictions at one (beta, h).
    Theory {
        #[command(flatten)]
        common: CommonFlags,
        /// Replica pairs in the covariance block; at most 6.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Exactly enumerate the Gibbs measure over a disorder ensemble.
    Enumerate {
        #[command(flatten)]
        common: CommonFlags,
        /// System size (at most 20 spins).
        #[arg(long)]
        n_spins: Option<u32>,
        /// Number of disorder realizations.
        #[arg(long)]
        disorders: Option<usize>,
    },
    /// Compare the Metropolis sampler against exact enumeration on shared
    /// disorders; exits 3 if any observable strays beyond 4 standard errors.
    Validate {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        chain: ChainFlags,
        /// Sizes to cross-check (each at most 20 spins).
        /// Comma-separated system sizes for the scan.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u32>>,
        /// Disorder realizations per size.
        #[arg(long)]
        disorders: Option<usize>,
    },
    /// Sample one disorder ensemble with Metropolis chains.
    Mc {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        chain: ChainFlags,
        /// System size (number of spins).
        #[arg(long)]
        n_spins: Option<u32>,
        /// Number of disorder realizations.
        #[arg(long)]
        disorders: Option<usize>,
    },
    /// Size scan of the annealed law: W1 distances, variances, Stein
    /// residuals per size, plus power-law fits of W1 and the overlap moment.
    CltScan {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        chain: ChainFlags,
        /// Comma-separated system sizes for the scan.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u32>>,
        /// Disorder realizations per size.
        #[arg(long)]
        disorders: Option<usize>,
    },
    /// Size scan of the quenched law: per-disorder Levy distances of
    /// centered samples, with split-chain Stein residuals in the summary.
    QuenchedScan {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        chain: ChainFlags,
        /// Comma-separated system sizes for the scan.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u32>>,
        /// Disorder realizations per size.
        #[arg(long)]
        disorders: Option<usize>,
    },
    /// Size scan of the quenched-mean law: across-disorder samples of the
    /// Gibbs mean against the variance-gap Gaussian, with a CF table.
    QuenchedMean {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        chain: ChainFlags,
        /// Comma-separated system sizes for the scan.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u32>>,
        /// Disorder realizations per size.
        #[arg(long)]
        disorders: Option<usize>,
    },
    /// Solve the Stein equation for the test battery, dump the profiles,
    /// and run the synthetic null checks; exits 3 on any failed gate.
    SteinCheck {
        #[command(flatten)]
        common: CommonFlags,
        /// Target standard deviation of the Gaussian law.
        #[arg(long)]
        sigma: Option<f64>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(match err {
            Error::InvalidArgument(_)
            | Error::Regime(_)
            | Error::NonConvergence { .. }
            | Error::EnumerationCap { .. }
            | Error::MgfOverflow { .. } => 2,
            Error::Validation(_) | Error::InternalConsistency(_) => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
        });
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(FileConfig::default()),
    }
}

const DEFAULT_SEED: u64 = 0x5eed_cafe;

struct Resolved {
    beta: f64,
    h: f64,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
    chain: ChainConfig,
}

fn resolve(common: &CommonFlags, chain: Option<&ChainFlags>, file: &FileConfig) -> Resolved {
    let defaults = ChainConfig::default();
    let pick = |flag: Option<u32>, from_file: Option<u32>, default: u32| {
        flag.or(from_file).unwrap_or(default)
    };
    let chain = ChainConfig {
        sweeps: pick(chain.and_then(|c| c.sweeps), file.sweeps, defaults.sweeps),
        burn_in: pick(chain.and_then(|c| c.burnin), file.burnin, defaults.burn_in),
        thin: pick(chain.and_then(|c| c.thin), file.thin, defaults.thin),
        n_chains: pick(chain.and_then(|c| c.chains), file.chains, defaults.n_chains),
        ess_floor: defaults.ess_floor,
    };
    Resolved {
        beta: common.beta.or(file.beta).unwrap_or(0.25),
        h: common.h.or(file.h).unwrap_or(0.3),
        seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out: common.out.clone().or_else(|| file.out.clone()),
        format: common.format.or(file.format).unwrap_or(Format::Csv),
        chain,
    }
}

/// Write rows as CSV or JSON to `out`, or to stdout when `out` is `None`.
fn emit_rows<R: CsvRow + Serialize>(rows: &[R], out: Option<&Path>, format: Format) -> Result<()> {
    match (out, format) {
        (Some(path), Format::Csv) => write_csv(path, rows),
        (Some(path), Format::Json) => {
            let file = std::fs::File::create(path)?;
            serde_json::to_writer_pretty(file, rows)?;
            Ok(())
        }
        (None, Format::Csv) => write_csv_to(std::io::stdout().lock(), rows),
        (None, Format::Json) => {
            println!("{}", serde_json::to_string_pretty(rows)?);
            Ok(())
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn run(cli: Cli) -> Result<()> {
    let file = load_file_config(cli.config.as_deref())?;
    match cli.command {
        Command::Theory { common, n } => {
            let r = resolve(&common, None, &file);
            let n = n.or(file.n).unwrap_or(2);
            if n > 6 {
                return Err(Error::InvalidArgument(format!(
                    "covariance blocks are built for at most 6 replica pairs, got {n}"
                )));
            }
            let report = theory_report(r.beta, r.h, n)?;
            let text = serde_json::to_string_pretty(&report)?;
            match &r.out {
                Some(path) => {
                    let config = json!({"beta": r.beta, "h": r.h, "n": n});
                    with_manifest("theory", r.seed, &config, path, || {
                        std::fs::write(path, text.clone() + "\n")?;
                        Ok(vec![path.clone()])
                    })?;
                }
                None => println!("{text}"),
            }
            Ok(())
        }
        Command::Enumerate {
            common,
            n_spins,
            disorders,
        } => {
            let r = resolve(&common, None, &file);
            let n_spins = n_spins.or(file.n_spins).unwrap_or(10);
            let disorders = disorders.or(file.disorders).unwrap_or(20);
            let params = ModelParams::new(r.beta, r.h, n_spins)?;
            let norm = OverlapMoments::compute(r.beta, r.h)?.normalization();
            let ensemble = disorder_average_exact(&params, norm, disorders, r.seed)?;
            let rows: Vec<EnumerateRow> = ensemble
                .per_disorder
                .iter()
                .enumerate()
                .map(|(i, m)| EnumerateRow::new(n_spins, i, ensemble.disorder_seeds[i], m))
                .collect();
            let summary = json!({
                "n": n_spins,
                "n_disorders": disorders,
                "nu_h": {"estimate": ensemble.nu_h.estimate, "se": ensemble.nu_h.standard_error},
                "nu_h2": {"estimate": ensemble.nu_h2.estimate, "se": ensemble.nu_h2.standard_error},
                "nu_overlap_sq": {"estimate": ensemble.nu_overlap_sq.estimate, "se": ensemble.nu_overlap_sq.standard_error},
                "var_quenched_mean": {"estimate": ensemble.var_quenched_mean.estimate, "se": ensemble.var_quenched_mean.standard_error},
            });
            match &r.out {
                Some(path) => {
                    let config =
                        json!({"beta": r.beta, "h": r.h, "n_spins": n_spins, "disorders": disorders});
                    with_manifest("enumerate", r.seed, &config, path, || {
                        emit_rows(&rows, Some(path.as_path()), r.format)?;
                        Ok(vec![path.clone()])
                    })?;
                    println!("{}", serde_json::to_string_pretty(&summary)?);
                }
                None => {
                    emit_rows(&rows, None, r.format)?;
                    eprintln!("{}", serde_json::to_string_pretty(&summary)?);
                }
            }
            Ok(())
        }
        Command::Validate {
            common,
            chain,
            sizes,
            disorders,
        } => {
            let r = resolve(&common, Some(&chain), &file);
            let config = ValidateConfig {
                beta: r.beta,
                h: r.h,
                sizes: sizes.or(file.sizes.clone()).unwrap_or(vec![8, 10, 12]),
                n_disorders: disorders.or(file.disorders).unwrap_or(20),
                chain: r.chain,
                master_seed: r.seed,
            };
            let report = run_validation(&config)?;
            match &r.out {
                Some(path) => {
                    with_manifest("validate", r.seed, &config, path, || {
                        emit_rows(&report.rows, Some(path.as_path()), r.format)?;
                        Ok(vec![path.clone()])
                    })?;
                }
                None => emit_rows(&report.rows, None, r.format)?,
            }
            eprintln!("worst |z| = {:.3}", report.worst_abs_z);
            if !report.passed(4.0) {
                return Err(Error::Validation(format!(
                    "sampler disagrees with enumeration: worst |z| = {:.3} exceeds 4",
                    report.worst_abs_z
                )));
            }
            Ok(())
        }
        Command::Mc {
            common,
            chain,
            n_spins,
            disorders,
        } => {
            let r = resolve(&common, Some(&chain), &file);
            let n_spins = n_spins.or(file.n_spins).unwrap_or(64);
            let disorders = disorders.or(file.disorders).unwrap_or(20);
            let params = ModelParams::new(r.beta, r.h, n_spins)?;
            let norm = OverlapMoments::compute(r.beta, r.h)?.normalization();
            let ensemble = disorder_ensemble(&params, norm, disorders, &r.chain, r.seed)?;
            let rows: Vec<McDisorderRow> = ensemble
                .per_disorder
                .iter()
                .enumerate()
                .map(|(i, d)| McDisorderRow::new(i, d))
                .collect();
            match &r.out {
                Some(path) => {
                    let config = json!({
                        "beta": r.beta, "h": r.h, "n_spins": n_spins,
                        "disorders": disorders, "chain": r.chain,
                    });
                    with_manifest("mc", r.seed, &config, path, || {
                        emit_rows(&rows, Some(path.as_path()), r.format)?;
                        Ok(vec![path.clone()])
                    })?;
                }
                None => emit_rows(&rows, None, r.format)?,
            }
            Ok(())
        }
        Command::CltScan {
            common,
            chain,
            sizes,
            disorders,
        } => {
            let r = resolve(&common, Some(&chain), &file);
            let config = scan_config(&r, sizes, disorders, &file);
            let run_all = || -> Result<(Vec<ScanRow>, serde_json::Value)> {
                let theory = theory_at(config.beta, config.h)?;
                let mut rows = Vec::new();
                for &n in &config.sizes {
                    let size = run_size_with(&config, n, config.n_disorders)?;
                    rows.push(skfluct::experiments::analyze_size(&config, &theory, &size)?);
                    eprintln!("n = {n} done");
                }
                let w1 = w1_scaling(&rows)?;
                let overlap = overlap_scaling(&rows)?;
                let fits = json!({"w1_annealed": w1, "overlap_sq": overlap});
                Ok((rows, fits))
            };
            match &r.out {
                Some(path) => {
                    let fits_path = sibling(path, "scaling.json");
                    let path2 = fits_path.clone();
                    with_manifest("clt-scan", r.seed, &config, path, || {
                        let (rows, fits) = run_all()?;
                        emit_rows(&rows, Some(path.as_path()), r.format)?;
                        std::fs::write(&path2, serde_json::to_string_pretty(&fits)? + "\n")?;
                        Ok(vec![path.clone(), path2.clone()])
                    })?;
                }
                None => {
                    let (rows, fits) = run_all()?;
                    emit_rows(&rows, None, r.format)?;
                    eprintln!("{}", serde_json::to_string_pretty(&fits)?);
                }
            }
            Ok(())
        }
        Command::QuenchedScan {
            common,
            chain,
            sizes,
            disorders,
        } => {
            let r = resolve(&common, Some(&chain), &file);
            let config = scan_config(&r, sizes, disorders, &file);
            let run_all = || -> Result<(Vec<QuenchedDisorderRow>, Vec<ScanRow>)> {
                let theory = theory_at(config.beta, config.h)?;
                let mut detail = Vec::new();
                let mut summary = Vec::new();
                for &n in &config.sizes {
                    let size = run_size_with(&config, n, config.n_disorders)?;
                    let row = skfluct::experiments::analyze_size(&config, &theory, &size)?;
                    detail.extend(quenched_disorder_rows(&size, row.sigma_q2_sim)?);
                    summary.push(row);
                    eprintln!("n = {n} done");
                }
                Ok((detail, summary))
            };
            match &r.out {
                Some(path) => {
                    let summary_path = sibling(path, "summary.csv");
                    let path2 = summary_path.clone();
                    with_manifest("quenched-scan", r.seed, &config, path, || {
                        let (detail, summary) = run_all()?;
                        emit_rows(&detail, Some(path.as_path()), r.format)?;
                        write_csv(&path2, &summary)?;
                        Ok(vec![path.clone(), path2.clone()])
                    })?;
                }
                None => {
                    let (detail, summary) = run_all()?;
                    emit_rows(&detail, None, r.format)?;
                    let mut text = Vec::new();
                    write_csv_to(&mut text, &summary)?;
                    eprintln!("{}", String::from_utf8_lossy(&text));
                }
            }
            Ok(())
        }
        Command::QuenchedMean {
            common,
            chain,
            sizes,
            disorders,
        } => {
            let r = resolve(&common, Some(&chain), &file);
            let config = scan_config(&r, sizes, disorders, &file);
            let t_grid: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
            let run_all = || -> Result<(Vec<QuenchedMeanRow>, Vec<CfRow>)> {
                let theory = theory_at(config.beta, config.h)?;
                let mut rows = Vec::new();
                let mut cf = Vec::new();
                for &n in &config.sizes {
                    let size = run_size_with(&config, n, config.n_disorders)?;
                    let row = quenched_mean_row(&config, &theory, &size)?;
                    cf.extend(cf_rows(&size, row.variance_gap, &t_grid)?);
                    rows.push(row);
                    eprintln!("n = {n} done");
                }
                Ok((rows, cf))
            };
            match &r.out {
                Some(path) => {
                    let cf_path = sibling(path, "cf.csv");
                    let path2 = cf_path.clone();
                    with_manifest("quenched-mean", r.seed, &config, path, || {
                        let (rows, cf) = run_all()?;
                        emit_rows(&rows, Some(path.as_path()), r.format)?;
                        write_csv(&path2, &cf)?;
                        Ok(vec![path.clone(), path2.clone()])
                    })?;
                }
                None => {
                    let (rows, cf) = run_all()?;
                    emit_rows(&rows, None, r.format)?;
                    let mut text = Vec::new();
                    write_csv_to(&mut text, &cf)?;
                    eprintln!("{}", String::from_utf8_lossy(&text));
                }
            }
            Ok(())
        }
        Command::SteinCheck { common, sigma } => {
            let r = resolve(&common, None, &file);
            let sigma = sigma.or(file.sigma).unwrap_or(1.0);
            stein_check(sigma, r.seed, r.out.as_deref())
        }
    }
}

fn scan_config(
    r: &Resolved,
    sizes: Option<Vec<u32>>,
    disorders: Option<usize>,
    file: &FileConfig,
) -> ScanConfig {
    let defaults = ScanConfig::default();
    ScanConfig {
        beta: r.beta,
        h: r.h,
        sizes: sizes.or(file.sizes.clone()).unwrap_or(defaults.sizes),
        n_disorders: disorders.or(file.disorders).unwrap_or(defaults.n_disorders),
        chain: r.chain,
        master_seed: r.seed,
    }
}

/// Profile row for one Stein solution sample point.
struct ProfileRow {
    function: String,
    x: f64,
    f: f64,
    f_prime: f64,
}

impl CsvRow for ProfileRow {
    fn header() -> Vec<&'static str> {
        vec!["function", "x", "f", "f_prime"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.function.clone(),
            skfluct::experiments::fmt_f64(self.x),
            skfluct::experiments::fmt_f64(self.f),
            skfluct::experiments::fmt_f64(self.f_prime),
        ]
    }
}

/// Solve the battery at `sigma`, dump profiles, and gate the synthetic
/// nulls at three standard errors.
fn stein_check(sigma: f64, seed: u64, out: Option<&Path>) -> Result<()> {
    let battery = test_function_battery(sigma)?;
    let mut profile = Vec::new();
    let mut bounds = Vec::new();
    for f in &battery {
        for (x, fx, fpx) in f.profile() {
            profile.push(ProfileRow {
                function: f.label().to_string(),
                x,
                f: fx,
                f_prime: fpx,
            });
        }
        let caps = f.bound_caps();
        let observed = f.observed_norms();
        bounds.push(json!({
            "function": f.label(),
            "sup_f_cap": caps.0, "sup_f": observed.0,
            "sup_f_prime_cap": caps.1, "sup_f_prime": observed.1,
            "lip_f_prime_cap": caps.2, "lip_f_prime": observed.2,
        }));
    }

    // Independent Gaussian draws: the annealed residual of each battery
    // member should vanish within errors.
    let normal = rand_distr::Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = skfluct::rng::stream(seed, skfluct::rng::Domain::Synthetic, 0, 0);
    let draws: Vec<f64> = (0..30_000)
        .map(|_| rand::Rng::sample(&mut rng, normal))
        .collect();
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for f in &battery {
        let res = annealed_stein_residual(&draws, sigma * sigma, f, 20)?;
        let z = res.residual / res.standard_error;
        if z > 3.0 {
            failures.push(format!("annealed {}: |residual| = {z:.2} se", f.label()));
        }
        checks.push(json!({
            "check": format!("annealed_null_{}", f.label()),
            "residual": res.residual, "se": res.standard_error, "z": z,
        }));
    }

    // Conditionally Gaussian synthetic disorders: the split-chain quenched
    // residual and the variance concentration check should vanish too.
    let synthetic = skfluct::stats::synthetic_conditionally_gaussian(
        60,
        4,
        300,
        0.8 * sigma,
        sigma,
        seed,
    );
    let views = chain_views(&synthetic);
    let f = stein_solve(|x: f64| x.tanh(), 1.0, sigma)?;
    let split = quenched_stein_residual(&views, sigma * sigma, &f)?;
    let zq = split.estimate.abs() / split.standard_error;
    if zq > 3.0 {
        failures.push(format!("quenched tanh: |estimate| = {zq:.2} se"));
    }
    checks.push(json!({
        "check": "quenched_null_tanh",
        "estimate": split.estimate, "se": split.standard_error,
        "naive": split.naive_estimate, "z": zq,
    }));
    let conc = variance_concentration(&views, sigma * sigma)?;
    let zc = conc.estimate.abs() / conc.standard_error;
    if zc > 3.0 {
        failures.push(format!("variance concentration: |estimate| = {zc:.2} se"));
    }
    checks.push(json!({
        "check": "variance_concentration_null",
        "estimate": conc.estimate, "se": conc.standard_error,
        "naive": conc.naive_estimate, "z": zc,
    }));

    let summary = json!({"sigma": sigma, "bounds": bounds, "checks": checks});
    match out {
        Some(path) => {
            let config = json!({"sigma": sigma});
            with_manifest("stein-check", seed, &config, path, || {
                write_csv(path, &profile)?;
                Ok(vec![path.to_path_buf()])
            })?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?)?;
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(failures.join("; ")))
    }
}
