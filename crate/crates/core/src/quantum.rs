//! States, projective measurements and Born-rule statistics.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::ComplexMatrix;

/// Orthonormality tolerance `|<v_j|v_k> - delta_jk|`.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Negative probabilities smaller than this in magnitude are roundoff and get clamped.
pub const CLAMP_TOL: f64 = 1e-12;
/// Tolerance on `sum(entries) == weight`.
pub const WEIGHT_TOL: f64 = 1e-9;

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Measurement basis: the columns of a unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    label: String,
    vectors: Vec<Vec<Complex64>>,
}

impl OrthonormalBasis {
    /// Builds a basis from its column vectors, checking orthonormality.
    pub fn new(label: impl Into<String>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let label = label.into();
        let d = vectors.len();
        if d == 0 {
            return Err(Error::EmptyInput("a basis needs at least one vector"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
        let basis = Self { label, vectors };
        let deviation = basis.orthonormality_deviation();
        if deviation.is_nan() || deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { label: basis.label, deviation });
        }
        Ok(basis)
    }

    /// `{|0>, ..., |d-1>}`.
    pub fn computational(dim: usize) -> Self {
        let vectors =
            (0..dim).map(|j| (0..dim).map(|r| Complex64::new(if r == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
        Self { label: format!("Z{dim}"), vectors }
    }

    /// Columns of a unitary matrix.
    pub fn from_unitary(label: impl Into<String>, u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidMatrix("basis matrix must be square".into()));
        }
        Self::new(label, (0..u.cols()).map(|c| u.column(c)).collect())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, j: usize) -> &[Complex64] {
        &self.vectors[j]
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Reorders the basis vectors; `order[i]` is the old index placed at `i`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: order.len() });
        }
        let mut seen = vec![false; self.dim()];
        for &j in order {
            if j >= self.dim() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::IndexOutOfRange { index: j, dim: self.dim() });
            }
        }
        Ok(Self { label: self.label.clone(), vectors: order.iter().map(|&j| self.vectors[j].clone()).collect() })
    }

    /// `max_jk |<v_j|v_k> - delta_jk|`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, u) in self.vectors.iter().enumerate() {
            for (k, v) in self.vectors.iter().enumerate().skip(j) {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((inner(u, v) - target).norm());
            }
        }
        worst
    }

    /// Matrix with the basis vectors as columns.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |r, c| self.vectors[c][r])
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: BasisFile = serde_json::from_str(text)?;
        file.into_basis()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = BasisFile {
            dim: self.dim(),
            vectors: self.vectors.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect(),
            label: self.label.clone(),
        };
        serde_json::to_string_pretty(&file).expect("basis serializes")
    }
}

/// On-disk basis description: `{"dim", "vectors": [[[re, im], ...], ...], "label"}`
/// with one inner array per column vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisFile {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
    pub label: String,
}

impl BasisFile {
    pub fn into_basis(self) -> Result<OrthonormalBasis> {
        if self.vectors.len() != self.dim {
            return Err(Error::Parse(format!("expected {} vectors, found {}", self.dim, self.vectors.len())));
        }
        if let Some(v) = self.vectors.iter().find(|v| v.len() != self.dim) {
            return Err(Error::Parse(format!("vector of length {} in dimension {}", v.len(), self.dim)));
        }
        let vectors =
            self.vectors.into_iter().map(|v| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()).collect();
        OrthonormalBasis::new(self.label, vectors)
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyInput("a state needs at least one amplitude"));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if norm.is_nan() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|z| z / norm).collect() })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes) }
    }
}

/// Mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace. Positivity is checked through the
    /// largest eigenvalue of `-rho`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_hermitian(1e-12) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let mut neg = matrix.hermitian_part();
        neg.scale(-1.0);
        let lambda_min = -crate::numkernel::hermitian_eigmax(&neg)?;
        if lambda_min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {lambda_min}")));
        }
        Ok(Self { matrix: matrix.hermitian_part() })
    }

    /// `sum_i w_i |psi_i><psi_i|` for nonnegative weights summing to one.
    pub fn mixture(states: &[PureState], weights: &[f64]) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::EmptyInput("a mixture needs at least one state"));
        };
        if states.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: weights.len() });
        }
        let d = first.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (s, &w) in states.iter().zip(weights) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
            }
            let mut p = s.to_density().matrix;
            p.scale(w);
            m.add_assign(&p)?;
        }
        Self::new(m.hermitian_part())
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(s: &PureState) -> Self {
        s.to_density()
    }
}

/// Either kind of state accepted by [`born_probabilities`].
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

impl StateRef<'_> {
    pub fn dim(&self) -> usize {
        match self {
            StateRef::Pure(s) => s.dim(),
            StateRef::Mixed(r) => r.dim(),
        }
    }
}

/// Nonnegative vector with a declared total mass. The mass is 1 for a single
/// measurement and `L` for an `L`-fold direct sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    entries: Vec<f64>,
    weight: f64,
}

impl ProbabilityVector {
    /// Clamps roundoff negatives to zero and checks `sum == weight`.
    pub fn new(entries: Vec<f64>, weight: f64) -> Result<Self> {
        let entries = clamp_entries(entries)?;
        let sum: f64 = entries.iter().sum();
        if sum.is_nan() || (sum - weight).abs() > WEIGHT_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}, declared weight {weight}")));
        }
        Ok(Self { entries, weight })
    }

    /// Weight taken from the entries themselves.
    pub fn from_entries(entries: Vec<f64>) -> Result<Self> {
        let entries = clamp_entries(entries)?;
        let weight = entries.iter().sum();
        Ok(Self { entries, weight })
    }

    pub fn uniform(n: usize) -> Self {
        Self { entries: vec![1.0 / n as f64; n], weight: 1.0 }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every entry and the weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { entries: self.entries.iter().map(|x| x * factor).collect(), weight: self.weight * factor }
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }
}

fn clamp_entries(mut entries: Vec<f64>) -> Result<Vec<f64>> {
    for x in &mut entries {
        if !x.is_finite() {
            return Err(Error::InvalidDistribution(format!("non-finite entry {x}")));
        }
        if *x < 0.0 {
            if *x < -CLAMP_TOL {
                return Err(Error::InvalidDistribution(format!("negative entry {x}")));
            }
            *x = 0.0;
        }
    }
    Ok(entries)
}

/// `p_j = <v_j|rho|v_j>`.
pub fn born_probabilities<'a>(state: impl Into<StateRef<'a>>, basis: &OrthonormalBasis) -> Result<ProbabilityVector> {
    let state = state.into();
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: state.dim() });
    }
    let raw: Vec<f64> = match state {
        StateRef::Pure(s) => basis.vectors().iter().map(|v| inner(v, s.amplitudes()).norm_sqr()).collect(),
        StateRef::Mixed(rho) => basis
            .vectors()
            .iter()
            .map(|v| {
                let rv = rho.matrix().mul_vec(v).expect("dimensions checked");
                inner(v, &rv).re
            })
            .collect(),
    };
    let entries = clamp_entries(raw)?.into_iter().map(|x| x.min(1.0)).collect();
    Ok(ProbabilityVector { entries, weight: 1.0 })
}

/// `(cos t sin f, cos t cos f, sin t, 0)`, the four-dimensional test family.
pub fn state_family(theta: f64, phi: f64) -> PureState {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    PureState {
        amplitudes: vec![
            Complex64::new(ct * sp, 0.0),
            Complex64::new(ct * cp, 0.0),
            Complex64::new(st, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    }
}

/// Names of the built-in four-dimensional measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinBasis {
    A,
    B,
    C1,
    C2,
    C3,
}

impl BuiltinBasis {
    pub const ALL: [BuiltinBasis; 5] = [Self::A, Self::B, Self::C1, Self::C2, Self::C3];

    pub fn name(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C1 => "C1",
            Self::C2 => "C2",
            Self::C3 => "C3",
        }
    }
}

impl fmt::Display for BuiltinBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

pub fn builtin_basis(which: BuiltinBasis) -> OrthonormalBasis {
    let r = |x: f64| Complex64::new(x, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    let vectors: Vec<Vec<Complex64>> = match which {
        BuiltinBasis::A | BuiltinBasis::C1 => return OrthonormalBasis::computational(4).with_label(which.name()),
        BuiltinBasis::B => vec![
            vec![r(0.5), i(-0.5), i(-0.5), r(0.5)],
            vec![r(0.5), i(-0.5), i(0.5), r(-0.5)],
            vec![r(0.5), i(0.5), i(-0.5), r(-0.5)],
            vec![r(0.5), i(0.5), i(0.5), r(0.5)],
        ],
        BuiltinBasis::C2 => vec![
            vec![r(1.0), r(0.0), r(0.0), r(0.0)],
            vec![r(0.0), r(0.0), r(1.0 / s2), r(1.0 / s2)],
            vec![r(0.0), r(1.0 / s3), r(1.0 / s3), r(-1.0 / s3)],
            vec![r(0.0), r(2.0 / s6), r(-1.0 / s6), r(1.0 / s6)],
        ],
        BuiltinBasis::C3 => vec![
            vec![r(0.0), r(0.0), r(1.0 / s2), r(1.0 / s2)],
            vec![r(0.0), r(1.0), r(0.0), r(0.0)],
            vec![r(1.0 / s3), r(0.0), r(1.0 / s3), r(-1.0 / s3)],
            vec![r(2.0 / s6), r(0.0), r(-1.0 / s6), r(1.0 / s6)],
        ],
    };
    OrthonormalBasis::new(which.name(), vectors).expect("built-in bases are orthonormal")
}

/// All five built-ins in the order A, B, C1, C2, C3.
pub fn builtin_bases() -> Vec<OrthonormalBasis> {
    BuiltinBasis::ALL.into_iter().map(builtin_basis).collect()
}

/// `entry (j, k) = <u_j|v_k>`.
pub fn overlap_matrix(b1: &OrthonormalBasis, b2: &OrthonormalBasis) -> Result<ComplexMatrix> {
    if b1.dim() != b2.dim() {
        return Err(Error::DimensionMismatch { expected: b1.dim(), found: b2.dim() });
    }
    let d = b1.dim();
    Ok(ComplexMatrix::from_fn(d, d, |j, k| inner(b1.vector(j), b2.vector(k))))
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// Haar-random pure state drawn from `rng`.
pub fn haar_random_state_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::InvalidState(format!("Haar sampling needs dim >= 2, got {dim}")));
    }
    loop {
        let v = gaussian_vector(dim, rng);
        if v.iter().any(|z| z.norm_sqr() > 0.0) {
            return PureState::normalized(v);
        }
    }
}

/// Haar-random pure state, deterministic in `seed`.
pub fn haar_random_state(dim: usize, seed: u64) -> Result<PureState> {
    haar_random_state_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Mixture of 2 to 4 Haar pure states with Dirichlet-uniform weights.
pub fn random_mixed_state_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    let count = rng.random_range(2..=4usize);
    let states = (0..count).map(|_| haar_random_state_with(dim, rng)).collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = (0..count).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    DensityMatrix::mixture(&states, &weights)
}

/// Random unitary from Gram-Schmidt on complex Gaussian columns.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = gaussian_vector(dim, &mut rng);
        for _ in 0..2 {
            for u in &cols {
                let proj = inner(u, &v);
                for (a, b) in v.iter_mut().zip(u) {
                    *a -= proj * b;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn state_family_values() {
        let s = state_family(0.0, 0.0);
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
        let s = state_family(FRAC_PI_2, 1.234);
        assert!((s.amplitudes()[2].re - 1.0).abs() < 1e-15);
        assert!(s.amplitudes()[0].norm() < 1e-15 && s.amplitudes()[1].norm() < 1e-15);
        let s = state_family(FRAC_PI_4, FRAC_PI_4);
        let re: Vec<f64> = s.amplitudes().iter().map(|z| z.re).collect();
        assert_close(&re, &[0.5, 0.5, 0.5f64.sqrt(), 0.0], 1e-15);
    }

    #[test]
    fn born_rule_examples() {
        let a = builtin_basis(BuiltinBasis::A);
        let b = builtin_basis(BuiltinBasis::B);
        let p = born_probabilities(&state_family(0.0, 0.0), &a).unwrap();
        assert_close(p.entries(), &[0.0, 1.0, 0.0, 0.0], 1e-15);
        let q = born_probabilities(&state_family(0.0, FRAC_PI_2), &b).unwrap();
        assert_close(q.entries(), &[0.25; 4], 1e-15);
        let p = born_probabilities(&state_family(FRAC_PI_4, FRAC_PI_4), &a).unwrap();
        assert_close(p.entries(), &[0.25, 0.25, 0.5, 0.0], 1e-15);
        assert!(matches!(
            born_probabilities(&state_family(0.0, 0.0), &OrthonormalBasis::computational(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pure_and_mixed_routes_agree() {
        let b = builtin_basis(BuiltinBasis::C2);
        let s = haar_random_state(4, 3).unwrap();
        let p = born_probabilities(&s, &b).unwrap();
        let rho = s.to_density();
        let q = born_probabilities(&rho, &b).unwrap();
        assert_close(p.entries(), q.entries(), 1e-12);
    }

    #[test]
    fn builtins_are_orthonormal_with_expected_overlaps() {
        for b in builtin_bases() {
            assert!(b.orthonormality_deviation() <= ORTHONORMAL_TOL, "{}", b.label());
        }
        let a = builtin_basis(BuiltinBasis::A);
        let b = builtin_basis(BuiltinBasis::B);
        let ab = overlap_matrix(&a, &b).unwrap();
        for z in ab.as_slice() {
            assert!((z.norm() - 0.5).abs() < 1e-15);
        }
        let aa = overlap_matrix(&a, &a).unwrap();
        assert!(aa.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let c1 = builtin_basis(BuiltinBasis::C1);
        let c2 = builtin_basis(BuiltinBasis::C2);
        let c3 = builtin_basis(BuiltinBasis::C3);
        assert!((inner(c1.vector(0), c2.vector(0)).norm() - 1.0).abs() < 1e-15);
        assert!((inner(c2.vector(1), c3.vector(0)).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_matrix_is_unitary() {
        let bases = builtin_bases();
        for x in &bases {
            for y in &bases {
                let o = overlap_matrix(x, y).unwrap();
                let g = o.adjoint().matmul(&o).unwrap();
                assert!(g.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-10);
            }
        }
    }

    #[test]
    fn overlap_submatrix_singular_value() {
        let a = builtin_basis(BuiltinBasis::A);
        let b = builtin_basis(BuiltinBasis::B);
        let o = overlap_matrix(&a, &b).unwrap();
        for rows in [[0, 1], [1, 3], [2, 0]] {
            for col in 0..4 {
                let sub = o.submatrix(&rows, &[col]).unwrap();
                let sigma = crate::numkernel::largest_singular_value(&sub).unwrap();
                assert!((sigma - 0.5f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_containing_state_gives_point_mass() {
        for seed in 0..20 {
            let u = random_unitary(4, seed);
            let basis = OrthonormalBasis::from_unitary("U", &u).unwrap();
            let psi = PureState::new(u.column(2)).unwrap();
            let p = born_probabilities(&psi, &basis).unwrap();
            assert_close(p.entries(), &[0.0, 0.0, 1.0, 0.0], 1e-9);
        }
    }

    #[test]
    fn haar_determinism_and_normalization() {
        let a = haar_random_state(5, 42).unwrap();
        let b = haar_random_state(5, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(haar_random_state(1, 0).is_err());
    }

    #[test]
    fn haar_states_are_uniform_on_average() {
        let a = builtin_basis(BuiltinBasis::A);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        let mut mean = [0.0; 4];
        let n = 100_000;
        for _ in 0..n {
            let s = haar_random_state_with(4, &mut rng).unwrap();
            let p = born_probabilities(&s, &a).unwrap();
            for (m, x) in mean.iter_mut().zip(p.entries()) {
                *m += x / n as f64;
            }
        }
        assert_close(&mean, &[0.25; 4], 0.01);
    }

    #[test]
    fn mixed_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let rho = random_mixed_state_with(4, &mut rng).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn probability_vector_clamping() {
        let p = ProbabilityVector::new(vec![0.5, 0.5, -1e-13], 1.0).unwrap();
        assert_eq!(p.entries()[2], 0.0);
        assert!(ProbabilityVector::new(vec![1.1, -0.1], 1.0).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.4], 1.0).is_err());
    }

    #[test]
    fn basis_file_round_trip_and_validation() {
        let b = builtin_basis(BuiltinBasis::B);
        let text = b.to_json_string();
        let back = OrthonormalBasis::from_json_str(&text).unwrap();
        assert_eq!(back.label(), "B");
        assert!(overlap_matrix(&b, &back).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);

        let bad = r#"{"dim": 2, "vectors": [[[1,0],[0,0]], [[1,0],[0,0]]], "label": "bad"}"#;
        assert!(matches!(OrthonormalBasis::from_json_str(bad), Err(Error::NotOrthonormal { .. })));
        let short = r#"{"dim": 2, "vectors": [[[1,0],[0,0]]], "label": "short"}"#;
        assert!(matches!(OrthonormalBasis::from_json_str(short), Err(Error::Parse(_))));
    }

    #[test]
    fn builtin_names_parse() {
        assert_eq!("c2".parse::<BuiltinBasis>().unwrap(), BuiltinBasis::C2);
        assert!("D".parse::<BuiltinBasis>().is_err());
    }
}
