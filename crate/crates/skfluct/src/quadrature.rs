//! Gauss-Hermite quadrature against the standard normal weight.
//!
//! Nodes and weights come from the Golub-Welsch algorithm: the roots of the
//! physicists' Hermite polynomial `H_n` are the eigenvalues of a symmetric
//! tridiagonal Jacobi matrix with off-diagonal entries `sqrt(k/2)`, and the
//! weight attached to each root is `sqrt(pi)` times the squared first
//! component of the corresponding normalized eigenvector. A change of
//! variables `z = sqrt(2) x` converts the classical weight `exp(-x^2)` into
//! the standard normal density, so a rule of `m` nodes integrates
//! polynomials in `z` exactly up to degree `2m - 1`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// A fixed Gauss-Hermite rule, stored in standard-normal coordinates:
/// `E[phi(Z)] ~ sum_i weights[i] * phi(nodes[i])` for `Z ~ N(0,1)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Default node count. 61 nodes integrate bounded analytic integrands such
/// as powers of `tanh` to well below 1e-13 over the parameter ranges used
/// in this crate.
pub const DEFAULT_NODES: usize = 61;

impl GaussHermite {
    /// Build a rule with `m` nodes. `m` must be at least 2.
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least 2 nodes, got {m}"
            )));
        }
        let mut jacobi = DMatrix::<f64>::zeros(m, m);
        for k in 1..m {
            let off = (k as f64 / 2.0).sqrt();
            jacobi[(k - 1, k)] = off;
            jacobi[(k, k - 1)] = off;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let x = eig.eigenvalues[i];
                let v0 = eig.eigenvectors[(0, i)];
                // total mass of exp(-x^2) is sqrt(pi); the sqrt(2) node
                // rescaling keeps normal-weighted weights summing to 1
                (x * std::f64::consts::SQRT_2, v0 * v0)
            })
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        // symmetrize: pair up mirrored nodes so the rule is odd-exact to
        // machine precision even after the eigensolve
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expectation of `phi` under the standard normal law.
    pub fn expect<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * phi(z))
            .sum()
    }

    /// Visits every `(node, weight)` pair once, for callers accumulating
    /// several expectations in a single pass.
    pub fn fold<F: FnMut(f64, f64)>(&self, mut visit: F) {
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            visit(z, w);
        }
    }
}

/// One-shot convenience wrapper around [`GaussHermite::expect`].
pub fn gauss_expect<F: Fn(f64) -> f64>(phi: F, m: usize) -> Result<f64> {
    Ok(GaussHermite::new(m)?.expect(phi))
}

/// A Gauss-Legendre rule on `[-1, 1]`, built the same way from the Legendre
/// Jacobi matrix (off-diagonals `k / sqrt(4k^2 - 1)`, total mass 2).
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least 2 nodes, got {m}"
            )));
        }
        let mut jacobi = DMatrix::<f64>::zeros(m, m);
        for k in 1..m {
            let kf = k as f64;
            let off = kf / (4.0 * kf * kf - 1.0).sqrt();
            jacobi[(k - 1, k)] = off;
            jacobi[(k, k - 1)] = off;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], 2.0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// `int_a^b f` on a single interval.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// `int_a^b f` split into `panels` equal panels, for integrands with
    /// localized structure.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * width;
                self.integrate(lo, lo + width, &f)
            })
            .sum()
    }
}
