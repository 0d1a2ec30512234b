//! Closed-form candidates for the quenched variance of `H`.
//!
//! The defining display contracts pair-indexed vectors `v^e, v^m` with a
//! resolvent `[I - beta^2 M]^{-1}` and reads off "component (1,3)", but the
//! dimensions of `M` are ambiguous: the pair vectors live on the
//! `(n+2 choose 2)`-dimensional pair space while the covariance is `2n`
//! dimensional. Both readings are evaluated and reported side by side; the
//! simulation limit is the authoritative number and no agreement is asserted
//! anywhere in the test suite.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg;
use crate::theory::vectors::build_vector_families;
use crate::theory::{build_covariance, build_replica_matrix, OverlapMoments, PairIndex};

#[derive(Debug, Clone, Copy)]
pub struct SigmaQ2Closed {
    /// Resolvent taken over the pair space: `M` is the replica overlap
    /// matrix built for four observed replicas (15 pairs), and `(1,3)` is
    /// the lexicographic position of that pair.
    pub variant_a: f64,
    /// Resolvent taken over the observable space: `M` is the `n = 2`
    /// covariance (4x4), the pair vectors are embedded as symmetric
    /// matrices with zero diagonal, and `(1,3)` is a matrix entry.
    pub variant_b: f64,
}

/// Difference of the first two field-coupling coordinates of `w_{k,k'}`,
/// i.e. `B(k,k',1) - B(k,k',2)`, for every pair in lexicographic order.
fn pairwise_b_difference(w: &[Vec<f64>]) -> Vec<f64> {
    w.iter().map(|row| row[0] - row[1]).collect()
}

/// `A(k,k',1) - A(k,k',2)` for every pair in lexicographic order.
fn pairwise_a_difference(w: &[Vec<f64>], n: usize) -> Vec<f64> {
    w.iter().map(|row| row[n] - row[n + 1]).collect()
}

pub fn sigma_q2_closed(moments: &OverlapMoments) -> Result<SigmaQ2Closed> {
    let beta = moments.beta;
    let (q1, q2, q3) = (moments.q(1), moments.q(2), moments.q(3));
    let base = 1.0 - q2 * q2 + 2.0 * beta * q2 * (q3 - q1);
    let kappa = beta * beta * q1 * (1.0 - q2) + beta * beta * (q3 - q1 * q2) - 2.0 * beta * q2;

    // variant A: four observed replicas, resolvent on the 15-dim pair space
    let variant_a = {
        let n = 4;
        let fam = build_vector_families(n, moments);
        let replica = build_replica_matrix(n, moments);
        let ve = pairwise_b_difference(&fam.w);
        let vm = pairwise_a_difference(&fam.w, n);
        let ue = replica.resolvent_solve(beta, &ve)?;
        let um = replica.resolvent_solve(beta, &vm)?;
        let at = fam.pairs.index(1, 3);
        base - 2.0 * beta * q2 * ue[at] - 2.0 * kappa * um[at]
    };

    // variant B: two observed replicas, resolvent on the 4-dim observable
    // space, pair vectors spread over a symmetric zero-diagonal matrix
    let variant_b = {
        let n = 2;
        let fam = build_vector_families(n, moments);
        let cov = build_covariance(n, moments)?;
        let ve = pairwise_b_difference(&fam.w);
        let vm = pairwise_a_difference(&fam.w, n);
        let embed = |v: &[f64]| {
            let pairs = PairIndex::new(n + 2);
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            for (idx, (k, kp)) in pairs.pairs().enumerate() {
                m[(k - 1, kp - 1)] = v[idx];
                m[(kp - 1, k - 1)] = v[idx];
            }
            m
        };
        let dim = 2 * n;
        let sys = DMatrix::identity(dim, dim) - cov.entries.clone() * (beta * beta);
        let ue = linalg::solve_matrix(&sys, &embed(&ve))?;
        let um = linalg::solve_matrix(&sys, &embed(&vm))?;
        base - 2.0 * beta * q2 * ue[(0, 2)] - 2.0 * kappa * um[(0, 2)]
    };

    Ok(SigmaQ2Closed { variant_a, variant_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_field_reduces_to_one() {
        // every q vanishes, so the formula as written collapses to 1 - q2^2;
        // this pins the formula's value, not the true quenched variance
        let m = OverlapMoments::compute(0.25, 0.0).unwrap();
        let s = sigma_q2_closed(&m).unwrap();
        assert_abs_diff_eq!(s.variant_a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.variant_b, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn small_beta_expansion() {
        // both variants approach 1 - q2^2 + 2 beta q2 (q1 - q3): the v^e
        // contraction is O(beta) and is hit by another beta, while the
        // kappa v^m term contributes 4 beta q2 (q1 - q3) against the
        // -2 beta q2 (q1 - q3) already in the base; residual is O(beta^2)
        let series = |beta: f64| {
            let m = OverlapMoments::compute(beta, 0.3).unwrap();
            let (q1, q2, q3) = (m.q(1), m.q(2), m.q(3));
            1.0 - q2 * q2 + 2.0 * beta * q2 * (q1 - q3)
        };
        let residuals = |beta: f64| {
            let m = OverlapMoments::compute(beta, 0.3).unwrap();
            let s = sigma_q2_closed(&m).unwrap();
            let want = series(beta);
            ((s.variant_a - want).abs(), (s.variant_b - want).abs())
        };
        let (a1, b1) = residuals(0.01);
        let (a2, b2) = residuals(0.02);
        for (small, big) in [(a1, a2), (b1, b2)] {
            assert!(small < 1e-4, "residual {small} too large at beta=0.01");
            let ratio = big / small;
            assert!((3.3..=4.7).contains(&ratio), "expected quadratic decay, ratio {ratio}");
        }
    }

    #[test]
    fn finite_and_positive_in_regime() {
        let m = OverlapMoments::compute(0.25, 0.3).unwrap();
        let s = sigma_q2_closed(&m).unwrap();
        for v in [s.variant_a, s.variant_b] {
            assert!(v.is_finite() && v > 0.0, "value {v}");
        }
    }
}
