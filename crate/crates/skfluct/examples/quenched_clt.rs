//! The quenched central limit theorem: at fixed disorder, the Gibbs law of
//! script_H centered at its own quenched mean approaches a Gaussian whose
//! variance sigma_Q^2 does not depend on the disorder.
//!
//! For each disorder the example measures the Levy distance between the
//! centered sample and N(0, sigma_Q^2), using the disorder-averaged
//! conditional variance as the target; the median over disorders falls
//! with N.

use skfluct::experiments::{analyze_size, quenched_disorder_rows, run_size_with, theory_at, ScanConfig};
use skfluct::mc::ChainConfig;

fn main() -> Result<(), skfluct::Error> {
    let config = ScanConfig {
        sizes: vec![16, 32, 64],
        n_disorders: 48,
        chain: ChainConfig {
            sweeps: 6_000,
            burn_in: 800,
            thin: 3,
            n_chains: 4,
            ..ChainConfig::default()
        },
        ..ScanConfig::default()
    };
    let theory = theory_at(config.beta, config.h)?;

    println!("{:>5} {:>14} {:>14} {:>12}", "N", "sigma_Q^2 (sim)", "median Levy", "se");
    let mut last = f64::INFINITY;
    for &n in &config.sizes {
        let size = run_size_with(&config, n, config.n_disorders)?;
        let row = analyze_size(&config, &theory, &size)?;
        println!(
            "{:>5} {:>14.6} {:>14.5} {:>12.5}",
            n, row.sigma_q2_sim, row.levy_quenched_median, row.levy_quenched_median_se
        );
        assert!(row.levy_quenched_median < last);
        last = row.levy_quenched_median;
    }

    // the distances concentrate: show the spread across disorders at the top size
    let size = run_size_with(&config, 64, config.n_disorders)?;
    let row = analyze_size(&config, &theory, &size)?;
    let mut detail = quenched_disorder_rows(&size, row.sigma_q2_sim)?;
    detail.sort_by(|a, b| a.levy_centered.total_cmp(&b.levy_centered));
    let lo = &detail[0];
    let hi = &detail[detail.len() - 1];
    println!(
        "\nN = 64 per-disorder Levy range: {:.4} (seed {}) to {:.4} (seed {})",
        lo.levy_centered, lo.disorder_seed, hi.levy_centered, hi.disorder_seed
    );
    println!("closed-form variance candidates: {:.6} / {:.6}", theory.sigma_q2_variant_a, theory.sigma_q2_variant_b);
    Ok(())
}
