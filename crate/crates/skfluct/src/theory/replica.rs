//! The pair-indexed overlap matrix driving every resolvent computation.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::{self, Conditioning};
use crate::theory::OverlapMoments;

/// Lexicographic enumeration of unordered pairs `(k, k')` with
/// `1 <= k < k' <= m`, mapping them onto `0..m(m-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    replicas: usize,
}

impl PairIndex {
    pub fn new(replicas: usize) -> Self {
        assert!(replicas >= 2, "need at least two replicas to form a pair");
        PairIndex { replicas }
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn count(&self) -> usize {
        self.replicas * (self.replicas - 1) / 2
    }

    /// Index of the pair `(k, k')`, `1`-based replica labels, `k < k'`.
    pub fn index(&self, k: usize, kp: usize) -> usize {
        let m = self.replicas;
        assert!(1 <= k && k < kp && kp <= m, "bad pair ({k}, {kp}) for {m} replicas");
        (k - 1) * m - k * (k - 1) / 2 + (kp - k - 1)
    }

    /// Inverse of [`PairIndex::index`].
    pub fn pair(&self, idx: usize) -> (usize, usize) {
        let m = self.replicas;
        assert!(idx < self.count(), "pair index {idx} out of range");
        let mut k = 1;
        let mut base = 0;
        while base + (m - k) <= idx {
            base += m - k;
            k += 1;
        }
        (k, k + 1 + (idx - base))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.count()).map(move |i| self.pair(i))
    }
}

/// Base pair-pair covariance under the decoupled cavity measure:
/// `nu0((e^k e^k' - q2)(e^r e^r' - q2))`, which depends only on how many
/// indices the two pairs share.
fn tilde(q: &TildeValues, pair_a: (usize, usize), pair_b: (usize, usize)) -> f64 {
    let (k, kp) = pair_a;
    let (r, rp) = pair_b;
    let shared = [r, rp].iter().filter(|&&x| x == k || x == kp).count();
    match shared {
        2 => q.same,
        1 => q.share,
        _ => q.disjoint,
    }
}

struct TildeValues {
    same: f64,     // 1 - q2^2
    share: f64,    // q2 - q2^2
    disjoint: f64, // q4 - q2^2
}

/// The `(n+2 choose 2)`-dimensional interaction matrix for `n` observed
/// replicas plus the two bookkeeping replicas introduced by cavitation.
#[derive(Debug, Clone)]
pub struct ReplicaMatrix {
    pub n: usize,
    pub pairs: PairIndex,
    pub matrix: DMatrix<f64>,
}

/// Fills the full case table. Row `(k, k')` collects the cavitation
/// coefficients hitting each column pair `(r, r')`:
///
/// * sources with `k' <= n`: plain base values on columns inside `[n]`,
///   `-n` times the base value on columns `(r, n+1)`, a `C(n+1, 2)` multiple
///   of the disjoint value on column `(n+1, n+2)`;
/// * sources `(k, n+1)`: plain base values inside `[n]`, the combination
///   `tilde(r, n+1) - (n+1) tilde(r, n+2)` on columns `(r, n+1)`, and
///   `-(n+1)(q2 - q2^2) + C(n+2, 2)(q4 - q2^2)` on column `(n+1, n+2)`;
/// * sources `(k, n+2)`: identical to `(k, n+1)`, since the two bookkeeping
///   replicas are exchangeable (the worked two-replica system repeats its
///   first row for exactly this reason);
/// * source `(n+1, n+2)`: disjoint values inside `[n]`,
///   `2(q2 - q2^2) - (n+2)(q4 - q2^2)` on columns `(r, n+1)`, and
///   `1 - q2^2 - 2(n+2)(q2 - q2^2) + C(n+3, 2)(q4 - q2^2)` on the diagonal;
/// * every column `(r, n+2)` with `r <= n` is zero in every row.
pub fn build_replica_matrix(n: usize, moments: &OverlapMoments) -> ReplicaMatrix {
    assert!(n >= 1, "need at least one observed replica");
    let q2 = moments.q(2);
    let q4 = moments.q(4);
    let tv = TildeValues {
        same: 1.0 - q2 * q2,
        share: q2 - q2 * q2,
        disjoint: q4 - q2 * q2,
    };
    let pairs = PairIndex::new(n + 2);
    let m = pairs.count();
    let mut matrix = DMatrix::zeros(m, m);

    let choose2 = |x: usize| (x * (x - 1) / 2) as f64;

    for (row, (k, kp)) in pairs.pairs().enumerate() {
        // the two bookkeeping replicas are interchangeable as a partner of
        // an observed one, so rows (k, n+2) repeat rows (k, n+1)
        let source = if kp == n + 2 && k <= n { (k, n + 1) } else { (k, kp) };
        for (col, (r, rp)) in pairs.pairs().enumerate() {
            matrix[(row, col)] = if source == (n + 1, n + 2) {
                if rp <= n {
                    tv.disjoint
                } else if rp == n + 1 {
                    2.0 * tv.share - (n as f64 + 2.0) * tv.disjoint
                } else if r == n + 1 {
                    tv.same - 2.0 * (n as f64 + 2.0) * tv.share + choose2(n + 3) * tv.disjoint
                } else {
                    0.0
                }
            } else if source.1 <= n {
                if rp <= n {
                    tilde(&tv, source, (r, rp))
                } else if rp == n + 1 {
                    -(n as f64) * tilde(&tv, source, (r, rp))
                } else if r == n + 1 {
                    choose2(n + 1) * tv.disjoint
                } else {
                    0.0
                }
            } else {
                // source = (k, n+1)
                if rp <= n {
                    tilde(&tv, source, (r, rp))
                } else if rp == n + 1 {
                    tilde(&tv, source, (r, n + 1)) - (n as f64 + 1.0) * tilde(&tv, source, (r, n + 2))
                } else if r == n + 1 {
                    -(n as f64 + 1.0) * tv.share + choose2(n + 2) * tv.disjoint
                } else {
                    0.0
                }
            };
        }
    }

    ReplicaMatrix { n, pairs, matrix }
}

impl ReplicaMatrix {
    /// `Id - beta^2 A`, the system matrix every resolvent call inverts.
    pub fn system_matrix(&self, beta: f64) -> DMatrix<f64> {
        let m = self.pairs.count();
        DMatrix::identity(m, m) - self.matrix.clone() * (beta * beta)
    }

    /// Solves `(Id - beta^2 A)^T x = rhs`, the transposed system used when a
    /// row functional is pushed through the resolvent.
    pub fn resolvent_transpose_solve(&self, beta: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let sys = self.system_matrix(beta).transpose();
        linalg::solve(&sys, rhs)
    }

    /// Solves `(Id - beta^2 A) x = rhs`.
    pub fn resolvent_solve(&self, beta: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let sys = self.system_matrix(beta);
        linalg::solve(&sys, rhs)
    }
}

/// Conditioning report for `Id - beta^2 A`. Non-invertibility is a result,
/// not an error: callers that need the inverse fail later with a regime
/// error of their own.
pub fn check_invertibility(n: usize, beta: f64, moments: &OverlapMoments) -> Conditioning {
    let a = build_replica_matrix(n, moments);
    linalg::conditioning(&a.system_matrix(beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{abc_constants, nu0_moment};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pair_index_roundtrip() {
        for m in 2..=8 {
            let idx = PairIndex::new(m);
            let mut seen = 0;
            for k in 1..m {
                for kp in (k + 1)..=m {
                    let i = idx.index(k, kp);
                    assert_eq!(idx.pair(i), (k, kp));
                    assert_eq!(i, seen, "lexicographic order broken at ({k},{kp})");
                    seen += 1;
                }
            }
            assert_eq!(seen, idx.count());
        }
    }

    #[test]
    fn single_replica_system_reproduces_two_replica_rows() {
        // the worked 3x3 system: rows (a, 0, -b), (a, 0, -b), (b, 0, c)
        let m = OverlapMoments::compute(0.25, 0.3).unwrap();
        let k = abc_constants(m.q(2), m.q(4));
        let a = build_replica_matrix(1, &m);
        let want = [
            [k.a, 0.0, -k.b],
            [k.a, 0.0, -k.b],
            [k.b, 0.0, k.c],
        ];
        for r in 0..3 {
            for c in 0..3 {
                assert_abs_diff_eq!(a.matrix[(r, c)], want[r][c], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn zero_field_bookkeeping_diagonal_is_one() {
        for n in 1..=4 {
            let m = OverlapMoments::compute(0.35, 0.0).unwrap();
            let a = build_replica_matrix(n, &m);
            let last = a.pairs.index(n + 1, n + 2);
            assert_eq!(a.matrix[(last, last)], 1.0);
        }
    }

    #[test]
    fn fresh_pair_columns_vanish() {
        let m = OverlapMoments::compute(0.3, 0.6).unwrap();
        for n in 1..=4 {
            let a = build_replica_matrix(n, &m);
            for row in 0..a.pairs.count() {
                for r in 1..=n {
                    let col = a.pairs.index(r, n + 2);
                    assert_eq!(a.matrix[(row, col)], 0.0, "row {row}, col ({r},{})", n + 2);
                }
            }
        }
    }

    /// Re-derives every entry from `nu0_moment` and the case table through a
    /// separate code path, then compares entrywise.
    fn case_table_oracle(n: usize, m: &OverlapMoments) -> DMatrix<f64> {
        let pairs = PairIndex::new(n + 2);
        let mut out = DMatrix::zeros(pairs.count(), pairs.count());
        for (row, (k0, kp0)) in pairs.pairs().enumerate() {
            let source = if kp0 == n + 2 && k0 <= n { (k0, n + 1) } else { (k0, kp0) };
            for (col, colpair) in pairs.pairs().enumerate() {
                out[(row, col)] = oracle_entry(n, m, source, colpair);
            }
        }
        out
    }

    fn oracle_entry(n: usize, m: &OverlapMoments, source: (usize, usize), col: (usize, usize)) -> f64 {
        let q2 = m.q(2);
        let base = |p: (usize, usize), q: (usize, usize)| {
            nu0_moment(m, &[p.0, p.1, q.0, q.1]) - q2 * q2
        };
        let c2 = |x: usize| (x * (x - 1) / 2) as f64;
        let (k, kp) = source;
        let (r, rp) = col;
        if (k, kp) == (n + 1, n + 2) {
            if rp <= n {
                // disjoint from the bookkeeping pair by construction
                base((n + 1, n + 2), (r, rp))
            } else if rp == n + 1 {
                2.0 * base((n + 1, n + 2), (r, n + 1)) - (n as f64 + 2.0) * base((1, 2), (3, 4))
            } else if r == n + 1 {
                base((n + 1, n + 2), (n + 1, n + 2)) - 2.0 * (n as f64 + 2.0) * base((1, 2), (2, 3))
                    + c2(n + 3) * base((1, 2), (3, 4))
            } else {
                0.0
            }
        } else if kp <= n {
            if rp <= n {
                base((k, kp), (r, rp))
            } else if rp == n + 1 {
                -(n as f64) * base((k, kp), (r, n + 1))
            } else if r == n + 1 {
                c2(n + 1) * base((1, 2), (3, 4))
            } else {
                0.0
            }
        } else {
            // source (k, n+1)
            if rp <= n {
                base((k, n + 1), (r, rp))
            } else if rp == n + 1 {
                base((k, n + 1), (r, n + 1)) - (n as f64 + 1.0) * base((k, n + 1), (r, n + 2))
            } else if r == n + 1 {
                -(n as f64 + 1.0) * base((1, 2), (2, 3)) + c2(n + 2) * base((1, 2), (3, 4))
            } else {
                0.0
            }
        }
    }

    #[test]
    fn matches_case_table_oracle_on_n2() {
        let m = OverlapMoments::compute(0.25, 0.3).unwrap();
        let a = build_replica_matrix(2, &m);
        let oracle = case_table_oracle(2, &m);
        assert_eq!(a.matrix.nrows(), 6);
        for r in 0..6 {
            for c in 0..6 {
                assert_abs_diff_eq!(a.matrix[(r, c)], oracle[(r, c)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn matches_case_table_oracle_on_random_parameters() {
        // 20 deterministic (beta, h, n) triples spread over the regime
        let mut triples = Vec::new();
        for i in 0..20u32 {
            let beta = 0.05 + 0.02 * f64::from(i);
            let h = 0.1 + 0.045 * f64::from((i * 7) % 20);
            let n = 1 + (i as usize % 4);
            triples.push((beta, h, n));
        }
        for (beta, h, n) in triples {
            let m = OverlapMoments::compute(beta, h).unwrap();
            let a = build_replica_matrix(n, &m);
            let oracle = case_table_oracle(n, &m);
            for r in 0..a.pairs.count() {
                for c in 0..a.pairs.count() {
                    assert_abs_diff_eq!(a.matrix[(r, c)], oracle[(r, c)], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn observed_replica_relabeling_leaves_matrix_invariant() {
        // swapping two observed replicas permutes rows and columns jointly
        let m = OverlapMoments::compute(0.3, 0.5).unwrap();
        let n = 3;
        let a = build_replica_matrix(n, &m);
        let swap = |x: usize| match x {
            1 => 2,
            2 => 1,
            other => other,
        };
        for (row, (k, kp)) in a.pairs.pairs().enumerate() {
            let (sk, skp) = (swap(k).min(swap(kp)), swap(k).max(swap(kp)));
            let srow = a.pairs.index(sk, skp);
            for (col, (r, rp)) in a.pairs.pairs().enumerate() {
                let (sr, srp) = (swap(r).min(swap(rp)), swap(r).max(swap(rp)));
                let scol = a.pairs.index(sr, srp);
                assert_abs_diff_eq!(a.matrix[(row, col)], a.matrix[(srow, scol)], epsilon = 0.0);
            }
        }
    }

    #[test]
    fn invertibility_reports() {
        let m0 = OverlapMoments::compute(0.0, 0.4).unwrap();
        let c = check_invertibility(2, 0.0, &m0);
        assert!(c.invertible);
        assert_abs_diff_eq!(c.condition, 1.0, epsilon = 1e-12);

        // h = 0, beta = 0.5, n = 1: system is [[0.75,0,0],[-0.25,1,0],[0,0,0.75]];
        // hand inverse gives one-norm condition (1.0)(5/3)
        let mh = OverlapMoments::compute(0.5, 0.0).unwrap();
        let c = check_invertibility(1, 0.5, &mh);
        assert!(c.invertible);
        assert_abs_diff_eq!(c.condition, 5.0 / 3.0, epsilon = 1e-12);

        // beta = 1 drives the h = 0 diagonal entries of Id - beta^2 A to zero
        let c = check_invertibility(1, 1.0, &mh);
        assert!(!c.invertible);
    }
}
