//! Vector families feeding the covariance assembly: the gradient-row seeds
//! `v1, v2, v3`, the overlap-row functionals `r^e, r^m`, and the per-pair
//! differential coefficients `A`, `B`, `w`.

use crate::theory::{OverlapMoments, PairIndex, TheoryConstants};

/// Which magnetization seed vector to build.
///
/// The corrected form puts the variance content `1 - q1^2` (own replica) and
/// `q2 - q1^2` (other replicas) in the magnetization block. The printed form,
/// kept for comparison, repeats `v1` verbatim; it makes the assembled matrix
/// asymmetric and is not used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum V3Form {
    #[default]
    Corrected,
    Printed,
}

/// Which field-coupling coefficient `B(k, k', r)` to build.
///
/// The corrected form is `beta q2 a` when `r` lies in the pair and
/// `beta q2 b` otherwise; matching the two branches in the `q2` factor is
/// exactly what makes the assembled covariance symmetric (verified
/// symbolically at `n = 1`: the cubic terms cancel only with the shared
/// `q2`). The printed form drops the `q2` from the matching branch and is
/// kept for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BCoefficientForm {
    #[default]
    Corrected,
    Printed,
}

/// `A(k, k', r)`: the decoupled-measure moment of `(e^k e^k' - q2) e^r`.
pub fn a_coefficient(moments: &OverlapMoments, k: usize, kp: usize, r: usize) -> f64 {
    let (q1, q2, q3) = (moments.q(1), moments.q(2), moments.q(3));
    if r == k || r == kp {
        q1 * (1.0 - q2)
    } else {
        q3 - q1 * q2
    }
}

/// `B(k, k', r)`: the coefficient coupling `(e^k e^k' - q2) e^r l^r` back to
/// the gradient, in the requested form.
pub fn b_coefficient(
    moments: &OverlapMoments,
    constants: &TheoryConstants,
    form: BCoefficientForm,
    k: usize,
    kp: usize,
    r: usize,
) -> f64 {
    let beta = moments.beta;
    let q2 = moments.q(2);
    if r == k || r == kp {
        match form {
            BCoefficientForm::Corrected => beta * q2 * constants.a,
            BCoefficientForm::Printed => beta * constants.a,
        }
    } else {
        beta * q2 * constants.b
    }
}

/// All vectors are laid out as `2n` coordinates: energy block first
/// (replicas `1..n`), magnetization block second.
#[derive(Debug, Clone)]
pub struct VectorFamilies {
    pub n: usize,
    pub pairs: PairIndex,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub v3: Vec<f64>,
    pub r_e: Vec<f64>,
    pub r_m: Vec<f64>,
    /// Rows `w_{k,k'}` for every pair of `[n+2]`, each of length `2n`,
    /// in lexicographic pair order.
    pub w: Vec<Vec<f64>>,
}

impl VectorFamilies {
    /// `e^1 = v1`.
    pub fn e1(&self) -> Vec<f64> {
        self.v1.clone()
    }

    /// `m^1 = v2 + v3`.
    pub fn m1(&self) -> Vec<f64> {
        self.v2.iter().zip(&self.v3).map(|(a, b)| a + b).collect()
    }
}

/// Applies the blockwise cyclic shift `(pi + pi)^s` to a `2n`-vector:
/// each block is rotated so that the distinguished replica moves from
/// position `1` to position `1 + s`.
pub fn cyclic_shift(v: &[f64], n: usize, s: usize) -> Vec<f64> {
    assert_eq!(v.len(), 2 * n);
    let mut out = vec![0.0; 2 * n];
    for block in 0..2 {
        for j in 0..n {
            let src = (j + n - s % n) % n;
            out[block * n + j] = v[block * n + src];
        }
    }
    out
}

pub fn build_vector_families(n: usize, moments: &OverlapMoments) -> VectorFamilies {
    build_vector_families_with(n, moments, V3Form::Corrected, BCoefficientForm::Corrected)
}

pub fn build_vector_families_with(
    n: usize,
    moments: &OverlapMoments,
    v3_form: V3Form,
    b_form: BCoefficientForm,
) -> VectorFamilies {
    assert!(n >= 1);
    let (q1, q2, q3) = (moments.q(1), moments.q(2), moments.q(3));
    let beta = moments.beta;
    let constants = crate::theory::abc_constants(q2, moments.q(4));
    let pairs = PairIndex::new(n + 2);

    let mut v1 = vec![0.0; 2 * n];
    v1[0] = 0.5;
    for x in v1.iter_mut().take(n).skip(1) {
        *x = 0.5 * q2 * q2;
    }

    // energy-block content: the magnetization observable couples to the
    // energies at first order in beta, so the content cannot sit in the
    // magnetization block (it would leave the assembled matrix asymmetric
    // at that same order)
    let mut v2 = vec![0.0; 2 * n];
    v2[0] = beta * q2 * (-q1 * (1.0 - q2));
    for x in v2.iter_mut().take(n).skip(1) {
        *x = beta * q2 * (q1 + q1 * q2 - 2.0 * q3);
    }

    let v3 = match v3_form {
        V3Form::Corrected => {
            let mut v = vec![0.0; 2 * n];
            v[n] = 1.0 - q1 * q1;
            for x in v.iter_mut().skip(n + 1) {
                *x = q2 - q1 * q1;
            }
            v
        }
        V3Form::Printed => v1.clone(),
    };

    let mut r_e = vec![0.0; pairs.count()];
    let mut r_m = vec![0.0; pairs.count()];
    for (idx, (k, kp)) in pairs.pairs().enumerate() {
        r_e[idx] = match (k, kp) {
            (1, kp) if kp <= n => 1.0,
            (1, kp) if kp == n + 1 => -(n as f64),
            _ => 0.0,
        };
        r_m[idx] = if k == 1 && kp <= n {
            q1 * (1.0 - q2)
        } else if k == 1 && kp == n + 1 {
            -(n as f64) * q1 * (1.0 - q2)
        } else if k > 1 && kp <= n {
            q3 - q1 * q2
        } else if k > 1 && k <= n && kp == n + 1 {
            -(n as f64) * (q3 - q1 * q2)
        } else if (k, kp) == (n + 1, n + 2) {
            ((n + 1) * n / 2) as f64 * (q3 - q1 * q2)
        } else {
            0.0
        };
    }

    let w = pairs
        .pairs()
        .map(|(k, kp)| {
            let mut row = Vec::with_capacity(2 * n);
            for r in 1..=n {
                row.push(b_coefficient(moments, &constants, b_form, k, kp, r));
            }
            for r in 1..=n {
                row.push(a_coefficient(moments, k, kp, r));
            }
            row
        })
        .collect();

    VectorFamilies { n, pairs, v1, v2, v3, r_e, r_m, w }
}
