//! Compressed sparse row storage for the complex Hermitian stiffness matrix.
//! Both triangles of the Hermitian pattern are stored so rows double as
//! columns via conjugation.

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<Complex64>,
}

impl CsrMatrix {
    /// Builds from triplets, summing duplicates. Triplets are consumed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> CsrMatrix {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut col = Vec::with_capacity(triplets.len());
        let mut val: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut per_row = vec![0usize; n];
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            let mut j = i + 1;
            while j < triplets.len() && triplets[j].0 == r && triplets[j].1 == c {
                v += triplets[j].2;
                j += 1;
            }
            col.push(c);
            val.push(v);
            per_row[r] += 1;
            i = j;
        }
        let mut row_ptr = vec![0usize; n + 1];
        for r in 0..n {
            row_ptr[r + 1] = row_ptr[r] + per_row[r];
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (self.col[i], self.val[i]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col[lo..hi].binary_search(&c) {
            Ok(i) => self.val[lo + i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// x^H (A x), the quadratic form value. Real part returned; the
    /// imaginary part of a Hermitian form is roundoff.
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        let ax = self.matvec(x);
        x.iter().zip(&ax).map(|(xi, yi)| (xi.conj() * yi).re).sum()
    }

    /// Largest |A[i,j] - conj(A[j,i])| over stored entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                dev = dev.max((v - self.get(c, r).conj()).norm());
            }
        }
        dev
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplet_assembly_sums_duplicates() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![(0, 0, c(1.0, 0.0)), (0, 0, c(2.0, 0.0)), (1, 0, c(0.0, 1.0)), (0, 1, c(0.0, -1.0))],
        );
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), c(3.0, 0.0));
        assert_eq!(m.get(0, 1), c(0.0, -1.0));
        assert_eq!(m.get(1, 0), c(0.0, 1.0));
        assert_eq!(m.get(1, 1), c(0.0, 0.0));
        assert!(m.hermitian_deviation() < 1e-15);
    }

    #[test]
    fn matvec_matches_dense() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![(0, 0, c(2.0, 0.0)), (0, 1, c(1.0, 1.0)), (1, 0, c(1.0, -1.0)), (1, 1, c(3.0, 0.0))],
        );
        let x = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let y = m.matvec(&x);
        assert!((y[0] - c(1.0, 1.0)).norm() < 1e-15);
        assert!((y[1] - (c(1.0, -1.0) + c(0.0, 3.0))).norm() < 1e-15);
        // Hermitian quadratic form is real.
        let q = m.quadratic_form(&x);
        assert!(q.is_finite());
    }
}
