//! The overlap fixed point and the tanh moments built on it.

use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

const RESIDUAL_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 10_000;
const MAX_MOMENT: usize = 16;

/// Solution of `q2 = E[tanh^2(beta sqrt(q2) z + h)]` together with the
/// residual actually achieved.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub q2: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn tanh2_expectation(rule: &GaussHermite, beta: f64, h: f64, q2: f64) -> f64 {
    let scale = beta * q2.max(0.0).sqrt();
    rule.expect(|z| {
        let t = (scale * z + h).tanh();
        t * t
    })
}

/// Solves the self-consistency equation by damped fixed-point iteration,
/// falling back to bisection if the iteration stalls.
///
/// At `h = 0` the map's only fixed point in the high temperature regime is
/// `q2 = 0` and we return it exactly; for `h != 0` the iteration starts from
/// `tanh^2(h)` and is damped to tame the oscillatory approach near large
/// `beta`.
pub fn solve_q2(rule: &GaussHermite, beta: f64, h: f64) -> Result<FixedPoint> {
    if h == 0.0 {
        return Ok(FixedPoint { q2: 0.0, residual: 0.0, iterations: 0 });
    }
    // positive-field form; tanh^2 is even in the sign of h
    let h = h.abs();

    let mut q = h.tanh().powi(2);
    let mut damping = 0.5;
    for iteration in 1..=MAX_ITERATIONS {
        let image = tanh2_expectation(rule, beta, h, q);
        let residual = (image - q).abs();
        if residual < RESIDUAL_TOL {
            return Ok(FixedPoint { q2: image, residual, iterations: iteration });
        }
        q += damping * (image - q);
        if iteration % 1000 == 0 {
            damping *= 0.5; // progressively heavier damping if still circling
        }
    }

    bisect_q2(rule, beta, h)
}

/// Bisection fallback on `[0, 1 - 1e-9]` for `g(q) = E tanh^2 - q`, which is
/// positive at 0 (for `h != 0`) and negative at the right end.
fn bisect_q2(rule: &GaussHermite, beta: f64, h: f64) -> Result<FixedPoint> {
    let g = |q: f64| tanh2_expectation(rule, beta, h, q) - q;
    let (mut lo, mut hi) = (0.0_f64, 1.0 - 1e-9);
    if g(lo) < 0.0 || g(hi) > 0.0 {
        return Err(Error::NonConvergence { residual: g(lo).abs().max(g(hi).abs()), iterations: MAX_ITERATIONS });
    }
    let mut iterations = MAX_ITERATIONS;
    for _ in 0..200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let q2 = 0.5 * (lo + hi);
    let residual = g(q2).abs();
    if residual < 1e-10 {
        Ok(FixedPoint { q2, residual, iterations })
    } else {
        Err(Error::NonConvergence { residual, iterations })
    }
}

/// The fixed point `q2` plus the moments `q_p = E[tanh^p(beta sqrt(q2) z + h)]`
/// for `p = 1..=16`, precomputed on one quadrature pass.
///
/// `q_0 = 1` by convention. Negative `h` is handled by symmetry: the even
/// moments are unchanged and the odd moments flip sign.
#[derive(Debug, Clone)]
pub struct OverlapMoments {
    pub beta: f64,
    pub h: f64,
    pub fixed_point: FixedPoint,
    q: [f64; MAX_MOMENT + 1],
}

impl OverlapMoments {
    pub fn compute(beta: f64, h: f64) -> Result<Self> {
        let rule = GaussHermite::new(crate::quadrature::DEFAULT_NODES)?;
        Self::compute_with(&rule, beta, h)
    }

    pub fn compute_with(rule: &GaussHermite, beta: f64, h: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidArgument(format!("beta must be finite and >= 0, got {beta}")));
        }
        if !h.is_finite() {
            return Err(Error::InvalidArgument(format!("h must be finite, got {h}")));
        }
        let sign = if h < 0.0 { -1.0 } else { 1.0 };
        let h_abs = h.abs();
        let fixed_point = solve_q2(rule, beta, h_abs)?;
        let scale = beta * fixed_point.q2.sqrt();

        let mut q = [0.0; MAX_MOMENT + 1];
        q[0] = 1.0;
        if h_abs != 0.0 || scale != 0.0 {
            let mut acc = [0.0; MAX_MOMENT + 1];
            rule.fold(|z, w| {
                let t = (scale * z + h_abs).tanh();
                let mut tp = 1.0;
                for a in acc.iter_mut().skip(1) {
                    tp *= t;
                    *a += w * tp;
                }
            });
            q[1..].copy_from_slice(&acc[1..]);
            // pin the solved moment to the fixed point itself
            q[2] = fixed_point.q2;
            for (p, qp) in q.iter_mut().enumerate() {
                if p % 2 == 1 {
                    *qp *= sign;
                }
            }
        }
        Ok(OverlapMoments { beta, h, fixed_point, q })
    }

    /// `q_p` for `0 <= p <= 16`.
    pub fn q(&self, p: usize) -> f64 {
        assert!(p <= MAX_MOMENT, "moment order {p} out of range");
        self.q[p]
    }

    /// The centring constants samplers need: `(q1, q2)`.
    pub fn normalization(&self) -> crate::params::Normalization {
        crate::params::Normalization::new(self.q(1), self.q(2))
    }
}

/// Expectation under the single-Gaussian replica measure of a product of
/// spin coordinates `eps_{r_1} ... eps_{r_k}` from replicas `r_i`.
///
/// Conditionally on the shared Gaussian the replicas are iid with mean
/// `m(z) = tanh(beta sqrt(q2) z + h)`, so the product reduces to
/// `E[m(z)^d] = q_d` where `d` is the number of replica indices appearing an
/// odd number of times.
pub fn nu0_moment(moments: &OverlapMoments, replica_indices: &[usize]) -> f64 {
    let mut counts = std::collections::HashMap::new();
    for &r in replica_indices {
        *counts.entry(r).or_insert(0usize) += 1;
    }
    let odd = counts.values().filter(|&&c| c % 2 == 1).count();
    moments.q(odd)
}
