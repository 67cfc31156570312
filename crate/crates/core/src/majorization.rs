//! The majorization preorder and the joint-distribution constructions it is
//! applied to.
//!
//! `x ≺ y` holds when every prefix sum of `x` sorted in nonincreasing order is
//! bounded by the matching prefix sum of sorted `y`, and the totals agree.
//! Vectors of unequal length are compared after zero-padding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::bounds::CumulativeBoundProfile;
use crate::error::{Error, Result};
use crate::quantum::ProbabilityVector;

/// Tolerance used by every order check unless overridden.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Entries sorted in nonincreasing order together with their prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedProfile {
    sorted: Vec<f64>,
    cumulative: Vec<f64>,
    weight: f64,
}

impl SortedProfile {
    pub fn of(x: &ProbabilityVector) -> Self {
        Self::from_slice(x.entries(), x.weight())
    }

    fn from_slice(entries: &[f64], weight: f64) -> Self {
        let sorted = sorted_desc(entries);
        let cumulative = prefix_sums(&sorted);
        Self { sorted, cumulative, weight }
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Prefix sum over the `k` largest entries; `k` beyond the length saturates.
    pub fn partial_sum(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            k if k <= self.cumulative.len() => self.cumulative[k - 1],
            _ => self.cumulative.last().copied().unwrap_or(0.0),
        }
    }
}

pub fn sorted_desc(entries: &[f64]) -> Vec<f64> {
    let mut v = entries.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn prefix_sums(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// All pairwise products `p_j q_k`, `j`-major.
pub fn direct_product(p: &ProbabilityVector, q: &ProbabilityVector) -> ProbabilityVector {
    let entries = p.entries().iter().flat_map(|a| q.entries().iter().map(move |b| a * b)).collect();
    ProbabilityVector::new(entries, p.weight() * q.weight()).expect("products of valid vectors are valid")
}

/// Left fold of [`direct_product`] over `ps`.
pub fn direct_product_all(ps: &[ProbabilityVector]) -> Result<ProbabilityVector> {
    let (first, rest) = ps.split_first().ok_or(Error::EmptyInput("direct product of no distributions"))?;
    Ok(rest.iter().fold(first.clone(), |acc, p| direct_product(&acc, p)))
}

/// Concatenation; the weight is the sum of the input weights.
pub fn direct_sum(ps: &[ProbabilityVector]) -> Result<ProbabilityVector> {
    if ps.is_empty() {
        return Err(Error::EmptyInput("direct sum of no distributions"));
    }
    let entries: Vec<f64> = ps.iter().flat_map(|p| p.entries().iter().copied()).collect();
    let weight = ps.iter().map(ProbabilityVector::weight).sum();
    ProbabilityVector::new(entries, weight)
}

/// Returns true when `x ≺ y`: `y` majorizes `x` within `tol`.
pub fn majorized_by(x: &ProbabilityVector, y: &ProbabilityVector, tol: f64) -> bool {
    if (x.weight() - y.weight()).abs() > tol {
        return false;
    }
    let sx = SortedProfile::of(x);
    let sy = SortedProfile::of(y);
    let n = x.len().max(y.len());
    (1..=n).all(|k| sx.partial_sum(k) <= sy.partial_sum(k) + tol)
}

/// Checks `sum_{j<=k} x_j^↓ <= Omega_k + tol` for every `k`.
///
/// The weight of `x` must match the profile total; prefixes longer than the
/// profile are compared against the total.
pub fn dominated_by_profile(x: &ProbabilityVector, profile: &CumulativeBoundProfile, tol: f64) -> bool {
    slack_against_profile(x, profile).is_some_and(|slack| slack >= -tol) && (x.weight() - profile.total()).abs() <= tol
}

/// `min_k (Omega_k - sum_{j<=k} x_j^↓)` over all `k` up to the longer length,
/// or `None` for an empty profile.
pub fn slack_against_profile(x: &ProbabilityVector, profile: &CumulativeBoundProfile) -> Option<f64> {
    slack_over_prefixes(x, profile, usize::MAX)
}

/// As [`slack_against_profile`] but only over `k <= max_k`.
pub fn slack_over_prefixes(x: &ProbabilityVector, profile: &CumulativeBoundProfile, max_k: usize) -> Option<f64> {
    let omega = profile.omega();
    let total = *omega.last()?;
    let sx = SortedProfile::of(x);
    let n = x.len().max(omega.len()).min(max_k);
    (1..=n)
        .map(|k| {
            let bound = omega.get(k - 1).copied().unwrap_or(total);
            bound - sx.partial_sum(k)
        })
        .reduce(f64::min)
}

/// Least concave majorant of the points `(k, Omega_k)` with `Omega_0 = 0`.
///
/// The result dominates the input pointwise, keeps the final total and has
/// nonincreasing increments.
pub fn flatten(profile: &CumulativeBoundProfile) -> CumulativeBoundProfile {
    profile.with_omega(least_concave_majorant(profile.omega()))
}

/// Upper concave envelope of `(0, 0), (1, y_1), ..., (n, y_n)` evaluated at `1..=n`.
pub fn least_concave_majorant(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let point = |i: usize| if i == 0 { 0.0 } else { values[i - 1] };
    // Monotone-chain upper hull over x = 0..=n.
    let mut hull: Vec<usize> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies on or below the chord from a to i.
            let cross = (b - a) as f64 * (point(i) - point(a)) - (i - a) as f64 * (point(b) - point(a));
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; n];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ya, yb) = (point(a), point(b));
        for x in (a + 1)..=b {
            out[x - 1] = if x == b { yb } else { ya + (yb - ya) * (x - a) as f64 / (b - a) as f64 };
        }
    }
    out
}

/// Random distribution of length `dim` (Dirichlet-uniform).
pub fn random_distribution<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ProbabilityVector {
    let raw: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let mut entries: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // Put any rounding residue on the largest entry so the sum is exact to 1 ulp.
    let residue = 1.0 - entries.iter().sum::<f64>();
    if let Some(m) = entries.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *m += residue;
    }
    ProbabilityVector::new(entries, 1.0).expect("normalized draw")
}

/// One T-transform `x_i <- (1-t) x_i + t x_j`, `x_j <- t x_i + (1-t) x_j`.
pub fn t_transform(x: &mut [f64], i: usize, j: usize, t: f64) {
    let (a, b) = (x[i], x[j]);
    x[i] = (1.0 - t) * a + t * b;
    x[j] = t * a + (1.0 - t) * b;
}

/// Applies `count` random T-transforms with `t` in `[0, 1/2]` to `y`.
pub fn random_t_transforms<R: Rng + ?Sized>(y: &ProbabilityVector, count: usize, rng: &mut R) -> ProbabilityVector {
    let mut x = y.entries().to_vec();
    let n = x.len();
    if n >= 2 {
        for _ in 0..count {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let t = rng.random_range(0.0..=0.5);
            t_transform(&mut x, i, j, t);
        }
    }
    ProbabilityVector::from_entries(x).expect("T-transforms keep entries nonnegative")
}

/// Returns `(x, y)` with `x ≺ y`: `y` is a random distribution and `x` is `y`
/// after between 1 and `3 * dim` random T-transforms.
pub fn random_majorized_pair(dim: usize, seed: u64) -> Result<(ProbabilityVector, ProbabilityVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_majorized_pair_with(dim, &mut rng)
}

pub fn random_majorized_pair_with<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<(ProbabilityVector, ProbabilityVector)> {
    if dim < 2 {
        return Err(Error::InvalidDistribution(format!("majorized pairs need dim >= 2, got {dim}")));
    }
    let y = random_distribution(dim, rng);
    let count = rng.random_range(1..=3 * dim);
    let x = random_t_transforms(&y, count, rng);
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundKind;
    use proptest::prelude::*;
    use rand::Rng;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::from_entries(v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn products_and_sums() {
        let p = direct_product(&pv(&[1.0, 0.0]), &pv(&[0.5, 0.5]));
        assert_eq!(p.entries(), &[0.5, 0.5, 0.0, 0.0]);
        let u = ProbabilityVector::uniform(4);
        let uu = direct_product(&u, &u);
        assert!(uu.entries().iter().all(|&x| (x - 1.0 / 16.0).abs() < 1e-15));
        let m = direct_product(&pv(&[0.25, 0.25, 0.5, 0.0]), &u);
        assert_eq!(m.entries().iter().cloned().fold(0.0, f64::max), 0.125);

        let s = direct_sum(&[pv(&[1.0, 0.0]), pv(&[0.5, 0.5])]).unwrap();
        assert_eq!(s.entries(), &[1.0, 0.0, 0.5, 0.5]);
        assert_eq!(s.weight(), 2.0);
        let t = direct_sum(&[u.clone(), u.clone(), u.clone()]).unwrap();
        assert_eq!(t.len(), 12);
        assert_eq!(t.weight(), 3.0);
        assert!(direct_sum(&[]).is_err());
    }

    #[test]
    fn order_examples() {
        assert!(majorized_by(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0]), DEFAULT_TOL));
        let x = pv(&[0.3, 0.2, 0.5]);
        assert!(majorized_by(&x, &x, 0.0));
        assert!(!majorized_by(&pv(&[0.5, 0.5, 0.0]), &pv(&[0.6, 0.2, 0.2]), DEFAULT_TOL));
        // zero padding
        assert!(majorized_by(&pv(&[0.25; 4]), &pv(&[0.5, 0.5]), DEFAULT_TOL));
        // unequal totals
        assert!(!majorized_by(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.5]), DEFAULT_TOL));
    }

    #[test]
    fn profile_domination_examples() {
        let profile =
            CumulativeBoundProfile::from_omega(BoundKind::DirectSum, 2, 4, vec![1.0, 1.5, 1.7071, 2.0]).unwrap();
        let x = pv(&[0.0, 1.0, 0.0, 0.0, 0.25, 0.25, 0.25, 0.25]);
        assert!(dominated_by_profile(&x, &profile, DEFAULT_TOL));
        let point = CumulativeBoundProfile::from_omega(BoundKind::DirectProduct, 2, 2, vec![1.0, 1.0]).unwrap();
        assert!(dominated_by_profile(&pv(&[1.0, 0.0]), &point, DEFAULT_TOL));
        let tight = CumulativeBoundProfile::from_omega(BoundKind::DirectProduct, 2, 2, vec![0.5, 1.0]).unwrap();
        assert!(!dominated_by_profile(&pv(&[0.6, 0.4]), &tight, DEFAULT_TOL));
    }

    #[test]
    fn flatten_examples() {
        let concave = least_concave_majorant(&[0.5, 0.8, 1.0]);
        assert!(close(&concave, &[0.5, 0.8, 1.0], 1e-15));
        let ds = least_concave_majorant(&[1.0, 1.5, 1.7071, 2.0]);
        assert!(close(&ds, &[1.0, 1.5, 1.75, 2.0], 1e-12));
        let dp = least_concave_majorant(&[0.5625, 0.7286, 1.0]);
        assert!(close(&dp, &[0.5625, 0.78125, 1.0], 1e-12));
    }

    #[test]
    fn flatten_keeps_profile_metadata() {
        let p = CumulativeBoundProfile::from_omega(BoundKind::DirectSum, 2, 2, vec![1.0, 1.5, 1.7071, 2.0]).unwrap();
        let f = flatten(&p);
        assert_eq!(f.kind(), BoundKind::DirectSum);
        assert!(close(f.increments().as_slice(), &[1.0, 0.5, 0.25, 0.25], 1e-12));
    }

    #[test]
    fn majorized_pair_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = random_distribution(5, &mut rng);
        assert_eq!(
            random_t_transforms(&y, 0, &mut rng),
            ProbabilityVector::from_entries(y.entries().to_vec()).unwrap()
        );
        assert!(majorized_by(&ProbabilityVector::uniform(5), &y, 1e-12));
        assert!(random_majorized_pair(1, 0).is_err());
    }

    #[test]
    fn chains_are_transitive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..10_000 {
            let dim = 2 + trial % 7;
            let (y, z) = random_majorized_pair_with(dim, &mut rng).unwrap();
            let x = random_t_transforms(&y, rng.random_range(1..=3 * dim), &mut rng);
            assert!(majorized_by(&x, &y, 1e-12));
            assert!(majorized_by(&y, &z, 1e-12));
            assert!(majorized_by(&x, &z, 1e-12));
        }
    }

    #[test]
    fn uniform_and_point_mass_are_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..10_000 {
            let dim = 2 + trial % 9;
            let x = random_distribution(dim, &mut rng);
            let mut point = vec![0.0; dim];
            point[0] = 1.0;
            assert!(majorized_by(&ProbabilityVector::uniform(dim), &x, DEFAULT_TOL));
            assert!(majorized_by(&x, &pv(&point), DEFAULT_TOL));
        }
    }

    fn nondecreasing_profile() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..12).prop_map(|inc| prefix_sums(&inc))
    }

    proptest! {
        #[test]
        fn majorant_dominates_and_is_concave(omega in nondecreasing_profile()) {
            let hull = least_concave_majorant(&omega);
            prop_assert_eq!(hull.len(), omega.len());
            prop_assert!((hull.last().unwrap() - omega.last().unwrap()).abs() < 1e-12);
            for (h, o) in hull.iter().zip(&omega) {
                prop_assert!(*h >= *o - 1e-12);
            }
            let mut prev = f64::INFINITY;
            let mut last = 0.0;
            for h in &hull {
                let inc = h - last;
                prop_assert!(inc <= prev + 1e-12);
                prev = inc;
                last = *h;
            }
        }

        #[test]
        fn flattening_never_invalidates(omega in nondecreasing_profile(), seed in any::<u64>()) {
            let total = *omega.last().unwrap();
            prop_assume!(total > 1e-6);
            let profile = CumulativeBoundProfile::from_omega(BoundKind::DirectSum, 2, omega.len(), omega.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_distribution(omega.len(), &mut rng).scaled(total);
            if dominated_by_profile(&x, &profile, DEFAULT_TOL) {
                prop_assert!(dominated_by_profile(&x, &flatten(&profile), DEFAULT_TOL));
            }
        }

        #[test]
        fn order_is_permutation_invariant(seed in any::<u64>(), dim in 2usize..8, rot in 0usize..8) {
            let (x, y) = random_majorized_pair(dim, seed).unwrap();
            let mut xr = x.entries().to_vec();
            xr.rotate_left(rot % dim);
            let mut yr = y.entries().to_vec();
            yr.reverse();
            let xr = pv(&xr);
            let yr = pv(&yr);
            prop_assert_eq!(majorized_by(&x, &y, 1e-12), majorized_by(&xr, &yr, 1e-12));
            prop_assert_eq!(majorized_by(&y, &x, 1e-12), majorized_by(&yr, &xr, 1e-12));
        }
    }
}
