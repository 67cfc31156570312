//! Small dense complex linear algebra.
//!
//! Every matrix handled here is at most 16×16, so the largest eigenvalue of a
//! Hermitian matrix is obtained by full cyclic Jacobi diagonalization of its
//! real symmetric embedding
//!
//! ```text
//! [ Re H  -Im H ]
//! [ Im H   Re H ]
//! ```
//!
//! whose spectrum is the spectrum of `H` with every eigenvalue doubled.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::OrthonormalBasis;

/// Largest supported dimension for the eigensolver.
pub const MAX_DIM: usize = 16;

/// Tolerance on `|M_jk - conj(M_kj)|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix with real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Rank-1 outer product `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows).map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum()).collect())
    }

    pub fn add_assign(&mut self, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: rhs.rows * rhs.cols });
        }
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.data {
            *a *= factor;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `max_jk |M_jk - conj(M_kj)|`, or infinity for a non-square matrix.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Returns `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// Permutes rows and columns: `out[(i, j)] = self[(rows[i], cols[j])]`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    /// Submatrix with the given row and column indices.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::IndexOutOfRange { index: r, dim: self.rows });
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::IndexOutOfRange { index: c, dim: self.cols });
        }
        Ok(self.permuted(rows, cols))
    }

    /// Largest `|entry|` of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Largest eigenvalue together with a unit eigenvector.
#[derive(Debug, Clone)]
pub struct EigPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
}

fn check_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix(format!("{}x{} is not square", m.rows, m.cols)));
    }
    if m.rows == 0 || m.rows > MAX_DIM {
        return Err(Error::InvalidMatrix(format!("dimension {} outside 1..={MAX_DIM}", m.rows)));
    }
    let dev = m.hermitian_deviation();
    if dev.is_nan() || dev > HERMITIAN_TOL {
        return Err(Error::InvalidMatrix(format!("not Hermitian (deviation {dev:.3e})")));
    }
    Ok(m.hermitian_part())
}

/// Largest eigenvalue of a Hermitian matrix of dimension at most 16.
pub fn hermitian_eigmax(m: &ComplexMatrix) -> Result<f64> {
    hermitian_eigmax_vector(m).map(|p| p.value)
}

/// Largest eigenvalue of a Hermitian matrix and an eigenvector achieving it.
pub fn hermitian_eigmax_vector(m: &ComplexMatrix) -> Result<EigPair> {
    let h = check_hermitian(m)?;
    let n = h.rows;
    let size = 2 * n;
    let mut a = vec![0.0; size * size];
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            a[r * size + c] = z.re;
            a[(r + n) * size + (c + n)] = z.re;
            a[r * size + (c + n)] = -z.im;
            a[(r + n) * size + c] = z.im;
        }
    }
    let (values, vectors) = jacobi_symmetric(&mut a, size);
    let mut best = 0;
    for i in 1..size {
        if values[i] > values[best] {
            best = i;
        }
    }
    let mut vector: Vec<Complex64> =
        (0..n).map(|r| Complex64::new(vectors[r * size + best], vectors[(r + n) * size + best])).collect();
    let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut vector {
        *z /= norm;
    }
    Ok(EigPair { value: values[best], vector })
}

/// Cyclic Jacobi on a dense real symmetric `n×n` matrix stored row-major.
/// Returns the eigenvalues and the eigenvector matrix (eigenvectors as columns).
fn jacobi_symmetric(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// `sigma_max(M) = sqrt(lambda_max(M† M))`.
pub fn largest_singular_value(m: &ComplexMatrix) -> Result<f64> {
    if m.rows == 0 || m.cols == 0 {
        return Err(Error::InvalidMatrix("empty matrix".into()));
    }
    // Gram matrix on the smaller side keeps the eigenproblem within MAX_DIM.
    let gram = if m.cols <= m.rows { m.adjoint().matmul(m)? } else { m.matmul(&m.adjoint())? };
    let lambda = hermitian_eigmax(&gram.hermitian_part())?;
    Ok(lambda.max(0.0).sqrt())
}

/// Sum of the rank-1 projectors `|v_j><v_j|` of `bases[l]` over `j` in `selections[l]`.
pub fn projector_sum(bases: &[&OrthonormalBasis], selections: &[Vec<usize>]) -> Result<ComplexMatrix> {
    if bases.len() != selections.len() {
        return Err(Error::Arity(format!("{} bases but {} index sets", bases.len(), selections.len())));
    }
    let Some(first) = bases.first() else {
        return Err(Error::EmptyInput("projector_sum needs at least one basis"));
    };
    let d = first.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for (basis, sel) in bases.iter().zip(selections) {
        if basis.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: basis.dim() });
        }
        for &j in sel {
            if j >= d {
                return Err(Error::IndexOutOfRange { index: j, dim: d });
            }
            let v = basis.vector(j);
            for r in 0..d {
                for c in 0..d {
                    out[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
    }
    Ok(out.hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{builtin_basis, random_unitary, BuiltinBasis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_has_unit_eigmax() {
        assert!((hermitian_eigmax(&ComplexMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_projectors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        let plus = [c(s, 0.0), c(s, 0.0)];
        let mut m = ComplexMatrix::outer(&zero, &zero);
        m.add_assign(&ComplexMatrix::outer(&plus, &plus)).unwrap();
        let lambda = hermitian_eigmax(&m).unwrap();
        assert!((lambda - (1.0 + s)).abs() < 1e-12, "{lambda}");
    }

    #[test]
    fn construct_then_recover() {
        let q = random_unitary(3, 11);
        let m = q.matmul(&ComplexMatrix::diagonal(&[3.0, 1.0, -2.0])).unwrap().matmul(&q.adjoint()).unwrap();
        let pair = hermitian_eigmax_vector(&m.hermitian_part()).unwrap();
        assert!((pair.value - 3.0).abs() < 1e-10);
        // The eigenvector is the first column of q up to phase.
        let col = q.column(0);
        let overlap: Complex64 = col.iter().zip(&pair.vector).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eigmax(&rect), Err(Error::InvalidMatrix(_))));
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(hermitian_eigmax(&m), Err(Error::InvalidMatrix(_))));
        assert!(hermitian_eigmax(&ComplexMatrix::identity(17)).is_err());
        assert!(largest_singular_value(&ComplexMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn singular_values() {
        let one = ComplexMatrix::from_row_major(1, 1, vec![c(0.5, 0.0)]).unwrap();
        assert!((largest_singular_value(&one).unwrap() - 0.5).abs() < 1e-12);
        let col = ComplexMatrix::from_row_major(2, 1, vec![c(0.5, 0.0), c(0.0, 0.5)]).unwrap();
        assert!((largest_singular_value(&col).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(largest_singular_value(&ComplexMatrix::zeros(3, 2)).unwrap(), 0.0);
    }

    #[test]
    fn projector_sums_of_builtins() {
        let a = builtin_basis(BuiltinBasis::A);
        let b = builtin_basis(BuiltinBasis::B);
        let p = projector_sum(&[&a], &[vec![0]]).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = c(1.0, 0.0);
        assert!(p.max_abs_diff(&expected) < 1e-15);

        let full = projector_sum(&[&a], &[vec![0, 1, 2, 3]]).unwrap();
        assert!(full.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let ab = projector_sum(&[&a, &b], &[vec![0], vec![0]]).unwrap();
        assert!((ab.trace().re - 2.0).abs() < 1e-12);
        assert!((hermitian_eigmax(&ab).unwrap() - 1.5).abs() < 1e-12);

        assert!(matches!(projector_sum(&[&a], &[vec![4]]), Err(Error::IndexOutOfRange { index: 4, dim: 4 })));
        let small = crate::quantum::OrthonormalBasis::computational(2);
        assert!(matches!(projector_sum(&[&a, &small], &[vec![0], vec![0]]), Err(Error::DimensionMismatch { .. })));
    }

    fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
        (0..d).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    fn normalize(v: &mut [Complex64]) {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= n);
    }

    #[test]
    fn two_projector_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10_000 {
            let d = 2 + trial % 7;
            let mut u = random_vector(&mut rng, d);
            let mut v = random_vector(&mut rng, d);
            normalize(&mut u);
            normalize(&mut v);
            let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let mut m = ComplexMatrix::outer(&u, &u);
            m.add_assign(&ComplexMatrix::outer(&v, &v)).unwrap();
            let lambda = hermitian_eigmax(&m.hermitian_part()).unwrap();
            assert!((lambda - 1.0 - overlap.norm()).abs() < 1e-9);
        }
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut h = g.clone();
        h.add_assign(&g.adjoint()).unwrap();
        h.hermitian_part()
    }

    #[test]
    fn unitary_invariance_and_rayleigh_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..200 {
            let d = 1 + trial % 16;
            let h = random_hermitian(&mut rng, d);
            let lambda = hermitian_eigmax(&h).unwrap();
            let u = random_unitary(d, trial as u64);
            let rotated = u.matmul(&h).unwrap().matmul(&u.adjoint()).unwrap().hermitian_part();
            assert!((hermitian_eigmax(&rotated).unwrap() - lambda).abs() < 1e-9);
            for _ in 0..5 {
                let v = random_vector(&mut rng, d);
                let hv = h.mul_vec(&v).unwrap();
                let num: Complex64 = v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
                let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                assert!(lambda >= num.re / den - 1e-12);
            }
        }
    }

    #[test]
    fn singular_value_invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..200u64 {
            let rows = 1 + (trial as usize) % 5;
            let cols = 1 + (trial as usize / 5) % 5;
            let m = ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.random::<f64>(), rng.random::<f64>() - 0.5));
            let sigma = largest_singular_value(&m).unwrap();
            let mut rp: Vec<usize> = (0..rows).rev().collect();
            rp.rotate_left(trial as usize % rows);
            let cp: Vec<usize> = (0..cols).rev().collect();
            assert!((largest_singular_value(&m.permuted(&rp, &cp)).unwrap() - sigma).abs() < 1e-9);
            let u = random_unitary(rows, trial);
            let w = random_unitary(cols, trial + 1000);
            let mixed = u.matmul(&m).unwrap().matmul(&w).unwrap();
            assert!((largest_singular_value(&mixed).unwrap() - sigma).abs() < 1e-9);
        }
    }
}
