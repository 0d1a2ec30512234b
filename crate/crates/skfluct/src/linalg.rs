//! Small dense linear solves with an explicit conditioning verdict.
//!
//! Every system in this crate is tiny (at most 28 x 28), so we use LU with
//! partial pivoting and report the 1-norm condition number computed from an
//! explicit inverse. A system counts as invertible when the condition
//! number stays below [`CONDITION_LIMIT`].

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Condition numbers above this are treated as effectively singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioning {
    pub condition: f64,
    pub invertible: bool,
}

/// 1-norm condition estimate of `m`. Returns `condition = INFINITY` when LU
/// factorization fails outright.
pub fn conditioning(m: &DMatrix<f64>) -> Conditioning {
    let norm = one_norm(m);
    match m.clone().lu().try_inverse() {
        Some(inv) => {
            let condition = norm * one_norm(&inv);
            Conditioning {
                condition,
                invertible: condition.is_finite() && condition < CONDITION_LIMIT,
            }
        }
        None => Conditioning {
            condition: f64::INFINITY,
            invertible: false,
        },
    }
}

/// Solve `m x = rhs` by partial-pivot LU, refusing ill-conditioned systems.
pub fn solve(m: &DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let cond = conditioning(m);
    if !cond.invertible {
        return Err(Error::Regime(format!(
            "linear system is numerically singular (condition {:.3e}); \
             a smaller beta keeps the replica resolvent invertible",
            cond.condition
        )));
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    let x = m
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Regime("LU solve failed".into()))?;
    Ok(x.iter().copied().collect())
}

/// Like [`solve`] but with a full matrix of right-hand sides.
pub fn solve_matrix(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cond = conditioning(m);
    if !cond.invertible {
        return Err(Error::Regime(format!(
            "linear system is numerically singular (condition {:.3e}); \
             a smaller beta keeps the replica resolvent invertible",
            cond.condition
        )));
    }
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Regime("LU solve failed".into()))
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
