//! State-independent majorization bounds for the joint outcome statistics of
//! several projective measurements.
//!
//! For measurements with bases `C_1, ..., C_L` in dimension `d` and a family of
//! index sets `(I_1, ..., I_L)`, the sum of the selected outcome probabilities
//! of any state equals `<psi| sum_l sum_{j in I_l} |c_j><c_j| |psi>` and is
//! therefore at most the largest eigenvalue of that projector sum.
//!
//! * Direct sum (`⊕_l p_l`, total `L`): `Omega_k` is the maximum of that
//!   eigenvalue over all families with `sum_l |I_l| = k`.
//! * Direct product (`⊗_l p_l`, total 1): the `k` largest products of sorted
//!   marginals form a down-set touching at most `k + L - 1` indices, and by the
//!   AM-GM inequality a product of expectations is at most the `L`-th power of
//!   their mean. `Omega_k` is the maximum of `(lambda / L)^L` over families with
//!   every `|I_l| >= 1` and `sum_l |I_l| = k + L - 1`.
//!
//! The search is exhaustive over all `(2^d)^L` families.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorization::least_concave_majorant;
use crate::measures::shannon;
use crate::numkernel::{hermitian_eigmax, hermitian_eigmax_vector, ComplexMatrix};
use crate::output::round_sig;
use crate::quantum::OrthonormalBasis;

/// Largest dimension accepted by the exhaustive search.
pub const MAX_SEARCH_DIM: usize = 8;
/// Largest number of measurements accepted by the exhaustive search.
pub const MAX_MEASUREMENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    DirectProduct,
    DirectSum,
}

impl BoundKind {
    pub fn short_name(self) -> &'static str {
        match self {
            Self::DirectProduct => "dp",
            Self::DirectSum => "ds",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" | "direct_product" => Ok(Self::DirectProduct),
            "ds" | "direct_sum" => Ok(Self::DirectSum),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

/// One index set per measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionFamily {
    sets: Vec<Vec<usize>>,
}

impl SelectionFamily {
    pub fn new(sets: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        for set in &sets {
            let mut seen = vec![false; dim];
            for &j in set {
                if j >= dim {
                    return Err(Error::IndexOutOfRange { index: j, dim });
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidMatrix(format!("index {j} selected twice")));
                }
            }
        }
        Ok(Self { sets })
    }

    fn from_masks(masks: &[u32], dim: usize) -> Self {
        let sets = masks.iter().map(|&m| (0..dim).filter(|j| m >> j & 1 == 1).collect()).collect();
        Self { sets }
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    pub fn total_size(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}

/// Selection family attaining a profile entry, with the eigenvector that
/// saturates it.
#[derive(Debug, Clone, Serialize)]
pub struct Maximizer {
    pub family: SelectionFamily,
    pub eigenvalue: f64,
    #[serde(skip)]
    pub state: Vec<Complex64>,
}

/// Nondecreasing partial-sum bounds `Omega_1 <= ... <= Omega_n`.
///
/// `x` obeys the bound when the sum of its `k` largest entries is at most
/// `Omega_k` for every `k`. The increments `Omega_k - Omega_{k-1}` are the
/// bound vector itself; they need not be sorted.
#[derive(Debug, Clone)]
pub struct CumulativeBoundProfile {
    kind: BoundKind,
    num_measurements: usize,
    dim: usize,
    omega: Vec<f64>,
    normalized: bool,
    maximizers: Vec<Option<Maximizer>>,
}

impl CumulativeBoundProfile {
    /// Wraps an explicit cumulative sequence. Only finiteness is checked, so
    /// this can also carry deliberately broken profiles.
    pub fn from_omega(kind: BoundKind, num_measurements: usize, dim: usize, omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::EmptyInput("a bound profile needs at least one entry"));
        }
        if let Some(x) = omega.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite profile entry {x}")));
        }
        let maximizers = vec![None; omega.len()];
        Ok(Self { kind, num_measurements, dim, omega, normalized: false, maximizers })
    }

    /// Same metadata, new cumulative values.
    pub fn with_omega(&self, omega: Vec<f64>) -> Self {
        Self {
            kind: self.kind,
            num_measurements: self.num_measurements,
            dim: self.dim,
            maximizers: vec![None; omega.len()],
            omega,
            normalized: self.normalized,
        }
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn num_measurements(&self) -> usize {
        self.num_measurements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// `Omega_k` for `k >= 1`, saturating at the total.
    pub fn omega_at(&self, k: usize) -> f64 {
        self.omega.get(k.saturating_sub(1)).copied().unwrap_or_else(|| self.total())
    }

    pub fn total(&self) -> f64 {
        *self.omega.last().expect("profiles are nonempty")
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn maximizers(&self) -> &[Option<Maximizer>] {
        &self.maximizers
    }

    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.omega
            .iter()
            .map(|&w| {
                let inc = w - prev;
                prev = w;
                inc
            })
            .collect()
    }

    /// Increments as they are conventionally written: trailing zeros dropped,
    /// and for the unnormalized two-measurement direct sum the leading unit
    /// increment dropped as well.
    pub fn printed_increments(&self) -> Vec<f64> {
        let mut inc = self.increments();
        while inc.len() > 1 && inc.last().is_some_and(|x| x.abs() <= 1e-12) {
            inc.pop();
        }
        let drop_leading = self.kind == BoundKind::DirectSum
            && self.num_measurements == 2
            && !self.normalized
            && inc.len() > 1
            && (inc[0] - 1.0).abs() <= 1e-12;
        if drop_leading {
            inc.remove(0);
        }
        inc
    }

    /// Shannon entropy (bits) of the increment vector.
    pub fn entropy_bits(&self) -> f64 {
        shannon(&self.increments().iter().map(|x| x.max(0.0)).collect::<Vec<_>>()).expect("nonnegative increments")
    }

    /// Increments as a distribution of weight `total`.
    pub fn increments_distribution(&self) -> Result<crate::quantum::ProbabilityVector> {
        crate::quantum::ProbabilityVector::new(self.increments().iter().map(|x| x.max(0.0)).collect(), self.total())
    }

    /// Least concave majorant of this profile.
    pub fn flattened(&self) -> Self {
        self.with_omega(least_concave_majorant(&self.omega))
    }

    /// Checks the structural invariants of a constructed bound.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        if self.omega[0].is_nan() || self.omega[0] <= 0.0 {
            return bad(format!("Omega_1 = {} must be positive", self.omega[0]));
        }
        if let Some(w) = self.omega.windows(2).find(|w| w[1] < w[0] - 1e-12) {
            return bad(format!("profile decreases from {} to {}", w[0], w[1]));
        }
        if self.kind == BoundKind::DirectProduct && self.omega.iter().any(|&w| w > 1.0 + 1e-12) {
            return bad("direct-product profile exceeds 1".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> ProfileJson {
        let r = |v: Vec<f64>| v.into_iter().map(|x| round_sig(x, 10)).collect();
        ProfileJson {
            kind: self.kind,
            num_measurements: self.num_measurements,
            dim: self.dim,
            omega: r(self.omega.clone()),
            increments: r(self.increments()),
            printed_increments: r(self.printed_increments()),
            entropy_bits: round_sig(self.entropy_bits(), 10),
        }
    }
}

/// Serialized form of a profile.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ProfileJson {
    pub kind: BoundKind,
    #[serde(rename = "L")]
    pub num_measurements: usize,
    pub dim: usize,
    pub omega: Vec<f64>,
    pub increments: Vec<f64>,
    pub printed_increments: Vec<f64>,
    pub entropy_bits: f64,
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    index: u64,
}

fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.value > x.value || (y.value == x.value && y.index < x.index) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Per total selection size `s = 0..=L*d`: the best eigenvalue over all
/// families, and over families selecting at least one outcome of every
/// measurement.
struct SearchTable {
    dim: usize,
    any: Vec<Option<Best>>,
    covering: Vec<Option<Best>>,
}

fn validate_bases(bases: &[&OrthonormalBasis]) -> Result<usize> {
    if bases.len() < 2 {
        return Err(Error::Arity(format!("need at least 2 measurements, got {}", bases.len())));
    }
    if bases.len() > MAX_MEASUREMENTS {
        return Err(Error::TooComplex(format!(
            "{} measurements exceed the exhaustive-search limit of {MAX_MEASUREMENTS}",
            bases.len()
        )));
    }
    let d = bases[0].dim();
    if let Some(b) = bases.iter().find(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: b.dim() });
    }
    if d > MAX_SEARCH_DIM {
        return Err(Error::TooComplex(format!(
            "dimension {d} exceeds the exhaustive-search limit of {MAX_SEARCH_DIM} ((2^d)^L families)"
        )));
    }
    Ok(d)
}

fn masks_of(index: u64, d: usize, l: usize) -> Vec<u32> {
    let per = 1u64 << d;
    let mut masks = vec![0u32; l];
    let mut rest = index;
    for slot in masks.iter_mut().rev() {
        *slot = (rest % per) as u32;
        rest /= per;
    }
    masks
}

fn search(bases: &[&OrthonormalBasis]) -> Result<SearchTable> {
    let d = validate_bases(bases)?;
    let l = bases.len();
    let per = 1usize << d;
    // Projector sums for every subset of every basis.
    let partial: Vec<Vec<ComplexMatrix>> = bases
        .iter()
        .map(|b| {
            let mut sums = vec![ComplexMatrix::zeros(d, d); per];
            for mask in 1..per {
                let low = mask.trailing_zeros() as usize;
                let mut m = sums[mask & (mask - 1)].clone();
                m.add_assign(&ComplexMatrix::outer(b.vector(low), b.vector(low))).expect("same shape");
                sums[mask] = m;
            }
            sums
        })
        .collect();
    let families = (per as u64).pow(l as u32);
    let slots = l * d + 1;
    let empty = || (vec![None; slots], vec![None; slots]);
    let (any, covering) = (0..families)
        .into_par_iter()
        .fold(empty, |(mut any, mut covering), index| {
            let masks = masks_of(index, d, l);
            let size: usize = masks.iter().map(|m| m.count_ones() as usize).sum();
            if size == 0 {
                return (any, covering);
            }
            let mut sum = ComplexMatrix::zeros(d, d);
            for (table, &mask) in partial.iter().zip(&masks) {
                sum.add_assign(&table[mask as usize]).expect("same shape");
            }
            let value = hermitian_eigmax(&sum.hermitian_part()).expect("projector sums are Hermitian");
            let cand = Some(Best { value, index });
            any[size] = better(any[size], cand);
            if masks.iter().all(|&m| m != 0) {
                covering[size] = better(covering[size], cand);
            }
            (any, covering)
        })
        .reduce(empty, |(a1, c1), (a2, c2)| {
            let merge =
                |x: Vec<Option<Best>>, y: Vec<Option<Best>>| x.into_iter().zip(y).map(|(p, q)| better(p, q)).collect();
            (merge(a1, a2), merge(c1, c2))
        });
    Ok(SearchTable { dim: d, any, covering })
}

fn maximizer(bases: &[&OrthonormalBasis], dim: usize, best: Best) -> Maximizer {
    let masks = masks_of(best.index, dim, bases.len());
    let family = SelectionFamily::from_masks(&masks, dim);
    let m = crate::numkernel::projector_sum(bases, family.sets()).expect("validated bases");
    let pair = hermitian_eigmax_vector(&m).expect("projector sums are Hermitian");
    Maximizer { family, eigenvalue: best.value, state: pair.vector }
}

/// Integer plateaus (shared eigenvectors) come out of the eigensolver a few
/// ulps off; they are snapped so that trivial bounds are exactly trivial.
const SNAP_TOL: f64 = 1e-12;

fn monotone_capped(raw: Vec<f64>, cap: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut prev = 0.0f64;
    for x in raw {
        let x = if (x - x.round()).abs() <= SNAP_TOL { x.round() } else { x };
        let v = x.min(cap).max(prev);
        out.push(v);
        prev = v;
    }
    if let Some(last) = out.last_mut() {
        *last = cap;
    }
    out
}

fn ds_from_table(bases: &[&OrthonormalBasis], table: &SearchTable) -> CumulativeBoundProfile {
    let l = bases.len();
    let d = table.dim;
    let n = l * d;
    let raw: Vec<f64> = (1..=n).map(|k| table.any[k].map_or(l as f64, |b| b.value)).collect();
    let omega = monotone_capped(raw, l as f64);
    let maximizers = (1..=n).map(|k| table.any[k].map(|b| maximizer(bases, d, b))).collect();
    CumulativeBoundProfile {
        kind: BoundKind::DirectSum,
        num_measurements: l,
        dim: d,
        omega,
        normalized: false,
        maximizers,
    }
}

fn dp_from_table(bases: &[&OrthonormalBasis], table: &SearchTable) -> CumulativeBoundProfile {
    let l = bases.len();
    let d = table.dim;
    let n = d.pow(l as u32);
    let lf = l as f64;
    let slot = |k: usize| table.covering.get(k + l - 1).copied().flatten();
    let raw: Vec<f64> = (1..=n).map(|k| slot(k).map_or(1.0, |b| (b.value / lf).powi(l as i32))).collect();
    let omega = monotone_capped(raw, 1.0);
    let maximizers = (1..=n).map(|k| slot(k).map(|b| maximizer(bases, d, b))).collect();
    CumulativeBoundProfile {
        kind: BoundKind::DirectProduct,
        num_measurements: l,
        dim: d,
        omega,
        normalized: false,
        maximizers,
    }
}

/// Direct-sum bound for `⊕_l p_l`; `L * d` entries with total `L`.
pub fn ds_bound(bases: &[&OrthonormalBasis]) -> Result<CumulativeBoundProfile> {
    let table = search(bases)?;
    Ok(ds_from_table(bases, &table))
}

/// Direct-product bound for `⊗_l p_l`; `d^L` entries with total 1.
pub fn dp_bound(bases: &[&OrthonormalBasis]) -> Result<CumulativeBoundProfile> {
    let table = search(bases)?;
    Ok(dp_from_table(bases, &table))
}

/// Both bounds from a single search.
#[derive(Debug, Clone)]
pub struct BoundPair {
    pub dp: CumulativeBoundProfile,
    pub ds: CumulativeBoundProfile,
}

impl BoundPair {
    pub fn compute(bases: &[&OrthonormalBasis]) -> Result<Self> {
        let table = search(bases)?;
        Ok(Self { dp: dp_from_table(bases, &table), ds: ds_from_table(bases, &table) })
    }

    pub fn get(&self, kind: BoundKind) -> &CumulativeBoundProfile {
        match kind {
            BoundKind::DirectProduct => &self.dp,
            BoundKind::DirectSum => &self.ds,
        }
    }
}

/// Bound for `½p ⊕ ½q`: the two-measurement direct-sum bound halved.
pub fn normalized_ds_bound(bases: &[&OrthonormalBasis]) -> Result<CumulativeBoundProfile> {
    if bases.len() != 2 {
        return Err(Error::Arity(format!(
            "normalized direct-sum bound needs exactly 2 measurements, got {}",
            bases.len()
        )));
    }
    Ok(normalize_ds(&ds_bound(bases)?))
}

/// Scales a direct-sum profile of `L` measurements by `1/L`.
pub fn normalize_ds(ds: &CumulativeBoundProfile) -> CumulativeBoundProfile {
    let factor = 1.0 / ds.num_measurements as f64;
    let mut out = ds.with_omega(ds.omega.iter().map(|w| w * factor).collect());
    out.normalized = true;
    out
}

/// Profiles for one pair of measurements.
#[derive(Debug, Clone, Serialize)]
pub struct PairEntry {
    pub pair: (usize, usize),
    pub labels: (String, String),
    pub dp: ProfileJson,
    pub ds: ProfileJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseReport {
    pub pairs: Vec<PairEntry>,
    pub joint_dp: ProfileJson,
    pub joint_ds: ProfileJson,
}

/// Every two-measurement bound next to the joint `L`-measurement bounds.
pub fn pairwise_bound_report(bases: &[&OrthonormalBasis]) -> Result<PairwiseReport> {
    if bases.len() < 3 {
        return Err(Error::Arity(format!("pairwise report needs at least 3 measurements, got {}", bases.len())));
    }
    let mut pairs = Vec::new();
    for i in 0..bases.len() {
        for j in (i + 1)..bases.len() {
            let both = BoundPair::compute(&[bases[i], bases[j]])?;
            pairs.push(PairEntry {
                pair: (i, j),
                labels: (bases[i].label().to_string(), bases[j].label().to_string()),
                dp: both.dp.to_json(),
                ds: both.ds.to_json(),
            });
        }
    }
    let joint = BoundPair::compute(bases)?;
    Ok(PairwiseReport { pairs, joint_dp: joint.dp.to_json(), joint_ds: joint.ds.to_json() })
}
