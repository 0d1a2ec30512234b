//! One-stop JSON summary of every theoretical quantity at a parameter point.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::theory::{
    abc_constants, build_covariance, build_replica_matrix, check_invertibility, sigma_a2_energy,
    sigma_a2_h, sigma_q2_closed, OverlapMoments,
};

/// Serialized with stable key names; matrices are row-major nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryReport {
    pub beta: f64,
    pub h: f64,
    pub n: usize,
    /// `[q1, q2, q3, q4, q5, q6]`
    pub q: [f64; 6],
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "A_matrix")]
    pub a_matrix: Vec<Vec<f64>>,
    /// One-norm condition estimate of `Id - beta^2 A`.
    pub condition: f64,
    pub covariance: Vec<Vec<f64>>,
    pub sigma_a2_energy: f64,
    #[serde(rename = "sigma_A2_H")]
    pub sigma_a2_h: f64,
    #[serde(rename = "sigma_Q2_variant_A")]
    pub sigma_q2_variant_a: f64,
    #[serde(rename = "sigma_Q2_variant_B")]
    pub sigma_q2_variant_b: f64,
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn theory_report(beta: f64, h: f64, n: usize) -> Result<TheoryReport> {
    let moments = OverlapMoments::compute(beta, h)?;
    let constants = abc_constants(moments.q(2), moments.q(4));
    let replica = build_replica_matrix(n, &moments);
    let conditioning = check_invertibility(n, beta, &moments);
    let covariance = build_covariance(n, &moments)?;
    let sq = sigma_q2_closed(&moments)?;
    Ok(TheoryReport {
        beta,
        h,
        n,
        q: [
            moments.q(1),
            moments.q(2),
            moments.q(3),
            moments.q(4),
            moments.q(5),
            moments.q(6),
        ],
        a: constants.a,
        b: constants.b,
        c: constants.c,
        a_matrix: rows(&replica.matrix),
        condition: conditioning.condition,
        covariance: rows(&covariance.entries),
        sigma_a2_energy: sigma_a2_energy(&moments),
        sigma_a2_h: sigma_a2_h(&moments)?,
        sigma_q2_variant_a: sq.variant_a,
        sigma_q2_variant_b: sq.variant_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_with_stable_keys() {
        let r = theory_report(0.25, 0.3, 2).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        for key in [
            "\"beta\"",
            "\"h\"",
            "\"n\"",
            "\"q\"",
            "\"a\"",
            "\"b\"",
            "\"c\"",
            "\"A_matrix\"",
            "\"condition\"",
            "\"covariance\"",
            "\"sigma_a2_energy\"",
            "\"sigma_A2_H\"",
            "\"sigma_Q2_variant_A\"",
            "\"sigma_Q2_variant_B\"",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let back: TheoryReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.q, r.q);
        assert_eq!(back.a_matrix, r.a_matrix);
    }

    #[test]
    fn matrix_dimensions_follow_n() {
        let r = theory_report(0.2, 0.4, 3).unwrap();
        assert_eq!(r.a_matrix.len(), 10); // pairs of [5]
        assert!(r.a_matrix.iter().all(|row| row.len() == 10));
        assert_eq!(r.covariance.len(), 6); // 2n
        assert!(r.condition.is_finite() && r.condition >= 1.0);
    }
}
