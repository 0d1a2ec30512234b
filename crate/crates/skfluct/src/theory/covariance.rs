//! Assembly of the limiting covariance of the normalized observable vector
//! `(E^1..E^n, M^1..M^n)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::theory::vectors::{build_vector_families_with, cyclic_shift, BCoefficientForm, V3Form};
use crate::theory::{build_replica_matrix, OverlapMoments};

const SYMMETRY_TOL: f64 = 1e-10;
const DISTINCT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    pub n: usize,
    pub entries: DMatrix<f64>,
    /// Number of distinct entry values after clustering at 1e-10. Replica
    /// exchangeability caps this at 6.
    pub distinct_values: usize,
    /// Smallest eigenvalue of the matrix; reported, never clipped.
    pub min_eigenvalue: f64,
}

/// Raw assembly output, available for any seed/coefficient form so the
/// defective printed forms can be inspected.
#[derive(Debug, Clone)]
pub struct RawAssembly {
    pub n: usize,
    pub entries: DMatrix<f64>,
    /// `max |C - C^T|` over all entries.
    pub symmetry_defect: f64,
}

pub fn assemble(
    n: usize,
    moments: &OverlapMoments,
    v3_form: V3Form,
    b_form: BCoefficientForm,
) -> Result<RawAssembly> {
    let beta = moments.beta;
    let q2 = moments.q(2);
    let fam = build_vector_families_with(n, moments, v3_form, b_form);
    let replica = build_replica_matrix(n, moments);

    let ue = replica.resolvent_transpose_solve(beta, &fam.r_e)?;
    let um = replica.resolvent_transpose_solve(beta, &fam.r_m)?;

    // contract the resolvent-pushed row functionals with the W rows
    let push = |u: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; 2 * n];
        for (coef, row) in u.iter().zip(&fam.w) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += coef * w;
            }
        }
        out
    };
    let pushed_e = push(&ue);
    let pushed_m = push(&um);

    let e_row: Vec<f64> = fam
        .e1()
        .iter()
        .zip(&pushed_e)
        .map(|(seed, corr)| seed + beta * q2 * corr)
        .collect();
    let m_row: Vec<f64> = fam
        .m1()
        .iter()
        .zip(&pushed_m)
        .map(|(seed, corr)| seed + beta * beta * corr)
        .collect();

    let mut entries = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let re = cyclic_shift(&e_row, n, i);
        let rm = cyclic_shift(&m_row, n, i);
        for j in 0..2 * n {
            entries[(i, j)] = re[j];
            entries[(n + i, j)] = rm[j];
        }
    }

    let mut symmetry_defect = 0.0f64;
    for i in 0..2 * n {
        for j in (i + 1)..2 * n {
            symmetry_defect = symmetry_defect.max((entries[(i, j)] - entries[(j, i)]).abs());
        }
    }

    Ok(RawAssembly { n, entries, symmetry_defect })
}

fn count_distinct(entries: &DMatrix<f64>, tol: f64) -> usize {
    let mut values: Vec<f64> = entries.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let mut clusters = 0;
    let mut last = f64::NEG_INFINITY;
    for v in values {
        if clusters == 0 || (v - last).abs() > tol {
            clusters += 1;
            last = v;
        }
    }
    clusters
}

pub fn build_covariance(n: usize, moments: &OverlapMoments) -> Result<CovarianceMatrix> {
    let raw = assemble(n, moments, V3Form::Corrected, BCoefficientForm::Corrected)?;
    if raw.symmetry_defect > SYMMETRY_TOL {
        return Err(Error::InternalConsistency(format!(
            "covariance assembly asymmetric: max defect {:.3e} at n={n}, beta={}, h={}",
            raw.symmetry_defect, moments.beta, moments.h
        )));
    }
    let distinct_values = count_distinct(&raw.entries, DISTINCT_TOL);
    let sym = (&raw.entries + raw.entries.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CovarianceMatrix { n, entries: raw.entries, distinct_values, min_eigenvalue })
}

impl CovarianceMatrix {
    /// Variance of the linear functional `w . X` under the limit law.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), 2 * self.n);
        let mut s = 0.0;
        for i in 0..2 * self.n {
            for j in 0..2 * self.n {
                s += w[i] * self.entries[(i, j)] * w[j];
            }
        }
        s
    }
}

/// Limiting variance of `H = E + M` for a single replica: the full quadratic
/// form of the `n = 1` covariance with weights `(1, 1)`.
pub fn sigma_a2_h(moments: &OverlapMoments) -> Result<f64> {
    let c = build_covariance(1, moments)?;
    Ok(c.quadratic_form(&[1.0, 1.0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_field_single_replica_is_diagonal() {
        let m = OverlapMoments::compute(0.25, 0.0).unwrap();
        let c = build_covariance(1, &m).unwrap();
        assert_abs_diff_eq!(c.entries[(0, 0)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.entries[(1, 1)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.entries[(0, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.entries[(1, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sigma_a2_h(&m).unwrap(), 1.5, epsilon = 1e-14);
    }

    #[test]
    fn beta_zero_magnetization_variance_is_sech_squared() {
        let m = OverlapMoments::compute(0.0, 0.3).unwrap();
        let c = build_covariance(1, &m).unwrap();
        assert_abs_diff_eq!(c.entries[(0, 0)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.entries[(1, 1)], 1.0 - 0.3f64.tanh().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(c.entries[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_and_few_valued_across_grid() {
        for &beta in &[0.15, 0.35] {
            for &h in &[0.2, 0.8] {
                let m = OverlapMoments::compute(beta, h).unwrap();
                for n in 1..=4 {
                    let c = build_covariance(n, &m).unwrap();
                    assert!(
                        c.distinct_values <= 6,
                        "{} distinct values at beta={beta} h={h} n={n}",
                        c.distinct_values
                    );
                    assert!(
                        c.min_eigenvalue >= -1e-8,
                        "min eigenvalue {} at beta={beta} h={h} n={n}",
                        c.min_eigenvalue
                    );
                }
            }
        }
    }

    #[test]
    fn printed_forms_break_symmetry() {
        // the defect is what forces the corrected B and v3: with either
        // printed form the assembled matrix fails the symmetry invariant by
        // many orders of magnitude
        let m = OverlapMoments::compute(0.25, 0.3).unwrap();
        let good = assemble(2, &m, V3Form::Corrected, BCoefficientForm::Corrected).unwrap();
        assert!(good.symmetry_defect < 1e-12, "defect {}", good.symmetry_defect);

        let bad_b = assemble(2, &m, V3Form::Corrected, BCoefficientForm::Printed).unwrap();
        assert!(bad_b.symmetry_defect > 1e-4, "defect {}", bad_b.symmetry_defect);

        let bad_v3 = assemble(2, &m, V3Form::Printed, BCoefficientForm::Corrected).unwrap();
        assert!(bad_v3.symmetry_defect > 1e-2, "defect {}", bad_v3.symmetry_defect);
    }

    #[test]
    fn energy_diagonal_tracks_independent_two_replica_solve() {
        // hand-solved 3x3 resolvent at n = 1 gives
        // C_00 = 1/2 - b^2 q2^2 [a(1 - b^2 c) - b^2 b^2] / det
        // with b^2 = beta^2 and det = (1-b^2 a)(1-b^2 c) + b^4 b^2
        let m = OverlapMoments::compute(0.25, 0.3).unwrap();
        let k = crate::theory::abc_constants(m.q(2), m.q(4));
        let (b2, q2) = (0.25f64 * 0.25, m.q(2));
        let det = (1.0 - b2 * k.a) * (1.0 - b2 * k.c) + b2 * b2 * k.b * k.b;
        let want = 0.5 - b2 * q2 * q2 * (k.a * (1.0 - b2 * k.c) - b2 * k.b * k.b) / det;
        let c = build_covariance(1, &m).unwrap();
        assert_abs_diff_eq!(c.entries[(0, 0)], want, epsilon = 1e-13);
    }

    #[test]
    fn rows_are_cyclic_shifts() {
        let m = OverlapMoments::compute(0.3, 0.5).unwrap();
        let c = build_covariance(3, &m).unwrap();
        let row = |i: usize| (0..6).map(|j| c.entries[(i, j)]).collect::<Vec<_>>();
        assert_eq!(cyclic_shift(&row(0), 3, 1), row(1));
        assert_eq!(cyclic_shift(&row(0), 3, 2), row(2));
        assert_eq!(cyclic_shift(&row(3), 3, 1), row(4));
        assert_eq!(cyclic_shift(&row(3), 3, 2), row(5));
    }

    #[test]
    fn quadratic_form_is_positive_in_regime() {
        for &(beta, h) in &[(0.25, 0.3), (0.1, 0.5), (0.4, 0.1)] {
            let m = OverlapMoments::compute(beta, h).unwrap();
            let s = sigma_a2_h(&m).unwrap();
            assert!(s > 0.0 && s.is_finite(), "sigma_A2_H = {s} at beta={beta} h={h}");
        }
    }
}
