//! Replica-symmetric theory of the high temperature SK model.
//!
//! Everything in this module is a deterministic function of `(beta, h)`:
//! the overlap fixed point `q2`, the tanh moments `q_p`, the scalar
//! constants entering the limiting variances, the replica overlap matrix,
//! the limiting covariance of normalized energies and magnetizations, and
//! the closed-form candidates for the quenched variance.

mod covariance;
mod moments;
mod replica;
mod report;
mod sigma_q;
mod vectors;

pub use covariance::{assemble, build_covariance, sigma_a2_h, CovarianceMatrix, RawAssembly};
pub use moments::{nu0_moment, solve_q2, FixedPoint, OverlapMoments};
pub use replica::{build_replica_matrix, check_invertibility, PairIndex, ReplicaMatrix};
pub use report::{theory_report, TheoryReport};
pub use sigma_q::{sigma_q2_closed, SigmaQ2Closed};
pub use vectors::{
    a_coefficient, b_coefficient, build_vector_families, build_vector_families_with, cyclic_shift,
    BCoefficientForm, V3Form, VectorFamilies,
};

/// Scalar constants `a`, `b`, `c` built from the overlap moments:
/// `a = (1 - q2)^2`, `b = 2 q2 + q2^2 - 3 q4`, `c = 1 - 6 q2 - q2^2 + 6 q4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn abc_constants(q2: f64, q4: f64) -> TheoryConstants {
    TheoryConstants {
        a: (1.0 - q2) * (1.0 - q2),
        b: 2.0 * q2 + q2 * q2 - 3.0 * q4,
        c: 1.0 - 6.0 * q2 - q2 * q2 + 6.0 * q4,
    }
}

/// Annealed variance of the normalized energy, evaluated from the closed
/// formula
///
/// ```text
/// 1/2 - beta^2 q2^2 (a - beta^2 (b^2 + a c))
///       / ((1 - beta^2 a)(1 - beta^2 c) + beta^4 b^2)
/// ```
///
/// The sign and the `q2^2` power of the correction are pinned down two
/// independent ways: the value agrees with the energy diagonal of the
/// assembled limiting covariance at every `(beta, h)`, and its small-beta
/// expansion reproduces the directly computed weak-coupling limit of the
/// annealed variance, `1/2 - beta^2 t^4 (1 - t^2)^2 + O(beta^4)` with
/// `t = tanh(h)`.
///
/// At `h = 0` the fixed point is `q2 = 0`, the correction vanishes exactly
/// and the value is `0.5` bit for bit.
pub fn sigma_a2_energy(moments: &OverlapMoments) -> f64 {
    let beta = moments.beta;
    let q2 = moments.q(2);
    let TheoryConstants { a, b, c } = abc_constants(q2, moments.q(4));
    let b2 = beta * beta;
    let den = (1.0 - b2 * a) * (1.0 - b2 * c) + b2 * b2 * b * b;
    0.5 - b2 * q2 * q2 * (a - b2 * (b * b + a * c)) / den
}
