//! A numerical laboratory for the Sherrington-Kirkpatrick model in its high
//! temperature phase.
//!
//! The crate has three layers:
//!
//! * `theory` evaluates the replica-symmetric predictions: the overlap fixed
//!   point, tanh moments, the replica overlap matrix, the limiting covariance
//!   of the normalized energy and magnetization, and the closed-form variance
//!   candidates for the quenched central limit theorem.
//! * `gibbs` and `mc` produce data: exact enumeration of the Gibbs measure up
//!   to 20 spins, and a seeded Metropolis sampler with reproducible disorder
//!   ensembles for larger systems.
//! * `stats` measures the distance between the two: Wasserstein-1 and Levy
//!   distances to Gaussian targets, Stein residuals, moment generating
//!   functions, and power-law fits of concentration rates.
//!
//! The `experiments` module wires the layers into the canonical experiment
//! set; the `skfluct` binary exposes those as subcommands. Each major
//! capability also has a runnable example:
//!
//! ```text
//! cargo run --release --example theory_report
//! cargo run --release --example enumerate_exact
//! cargo run --release --example validate_sampler
//! cargo run --release --example overlap_concentration
//! cargo run --release --example annealed_clt
//! cargo run --release --example quenched_clt
//! cargo run --release --example quenched_mean_clt
//! cargo run --release --example stein_diagnostics
//! ```
//!
//! Model convention used throughout: configurations carry Gibbs weight
//! proportional to `exp(beta * E_N(sigma) + h * sum_i sigma_i)` where
//! `E_N(sigma) = sum_{i<j} g_ij sigma_i sigma_j / sqrt(N)` and the couplings
//! `g_ij` are independent standard Gaussians. The external field enters the
//! exponent unscaled by `beta`; all fixed-point equations, limiting variances
//! and samplers in this crate share that convention, so theory and simulation
//! are directly comparable at identical `(beta, h)`.

pub mod error;
pub mod experiments;
pub mod gibbs;
pub mod linalg;
pub mod mc;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::Error;
pub use params::ModelParams;
