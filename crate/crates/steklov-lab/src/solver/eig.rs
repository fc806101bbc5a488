//! Dense generalized Hermitian eigensolver: S f = lambda M f with M real
//! symmetric positive definite, reduced to a standard Hermitian problem by
//! Cholesky congruence.

use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

pub struct GeneralizedEig {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Columns are M-orthonormal eigenvectors matching `values`.
    pub vectors: DMatrix<Complex64>,
}

/// Solves S f = lambda M f for Hermitian S and SPD M. The congruence
/// C = L^-1 S L^-H with M = L L^T leaves a standard Hermitian problem; the
/// eigenvectors are mapped back by f = L^-T g, which makes them
/// M-orthonormal.
pub fn generalized_hermitian_eig(s: &DMatrix<Complex64>, m: &DMatrix<f64>) -> Result<GeneralizedEig> {
    let n = s.nrows();
    assert_eq!(s.ncols(), n);
    assert_eq!(m.nrows(), n);
    assert_eq!(m.ncols(), n);

    let chol: Cholesky<f64, Dyn> = Cholesky::new(m.clone()).ok_or(Error::MassNotPositiveDefinite)?;
    let l = chol.l();
    let lc: DMatrix<Complex64> = l.map(|x| Complex64::new(x, 0.0));

    // C = L^-1 S L^-H via two triangular solves.
    let y = lc.clone().solve_lower_triangular(s).ok_or(Error::EigNotConverged)?;
    let z = lc.clone().solve_lower_triangular(&y.adjoint()).ok_or(Error::EigNotConverged)?;
    let mut c = z.adjoint();
    // Kill roundoff asymmetry before the Hermitian solver.
    let ct = c.adjoint();
    c = (c + ct) * Complex64::new(0.5, 0.0);

    let se = c.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));

    let mut values = Vec::with_capacity(n);
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        values.push(se.eigenvalues[i]);
        g.set_column(k, &se.eigenvectors.column(i));
    }
    // f = L^-H g (adjoint solve maps back and preserves M-orthonormality).
    let lh = lc.adjoint();
    let vectors = lh.solve_upper_triangular(&g).ok_or(Error::EigNotConverged)?;
    Ok(GeneralizedEig { values, vectors })
}

/// Relative residual ||S f - lambda M f|| / ||f|| for one pair.
pub fn pair_residual(s: &DMatrix<Complex64>, m: &DMatrix<f64>, lambda: f64, f: &DVector<Complex64>) -> f64 {
    let mc: DMatrix<Complex64> = m.map(|x| Complex64::new(x, 0.0));
    let r = s * f - (&mc * f) * Complex64::new(lambda, 0.0);
    r.norm() / f.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_a_hand_checked_pencil() {
        // S = diag(1, 2) in a rotated complex basis, M = diag(1, 4).
        let s = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.5, 0.0),
                Complex64::new(0.0, -0.5),
                Complex64::new(0.0, 0.5),
                Complex64::new(1.5, 0.0),
            ],
        );
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let eig = generalized_hermitian_eig(&s, &m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 2.0).abs() < 1e-12);

        let m2 = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let eig2 = generalized_hermitian_eig(&s, &m2).unwrap();
        assert!((eig2.values[0] - 0.5).abs() < 1e-12);
        assert!((eig2.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vectors_are_m_orthonormal() {
        let s = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.3, 0.1),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.3, -0.1),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.2, -0.4),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.2, 0.4),
                Complex64::new(3.0, 0.0),
            ],
        );
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let eig = generalized_hermitian_eig(&s, &m).unwrap();
        let mc: DMatrix<Complex64> = m.map(|x| Complex64::new(x, 0.0));
        let gram = eig.vectors.adjoint() * &mc * &eig.vectors;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        for i in 0..3 {
            let f = DVector::from_column_slice(eig.vectors.column(i).as_slice());
            assert!(pair_residual(&s, &m, eig.values[i], &f) < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite_mass() {
        let s = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let m = DMatrix::from_element(1, 1, -1.0);
        assert!(matches!(generalized_hermitian_eig(&s, &m), Err(Error::MassNotPositiveDefinite)));
    }
}
