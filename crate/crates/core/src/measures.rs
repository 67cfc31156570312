//! Uncertainty measures evaluated on (possibly unnormalized) distributions.
//!
//! All logarithms are base 2. Entropies of unnormalized vectors use the plain
//! `-sum x log2 x` without renormalizing, so the Shannon entropy of a direct
//! sum is the sum of the component entropies.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorization::{direct_product, direct_sum, random_distribution, sorted_desc};
use crate::quantum::{ProbabilityVector, CLAMP_TOL};

/// Additivity verdict tolerance.
pub const ADDITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeasureFlags {
    pub schur_concave: bool,
    pub dp_additive: bool,
    pub ds_additive: bool,
    pub defined_on_zeros: bool,
}

/// The registered uncertainty measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// `-sum x log2 x`.
    Shannon,
    /// `S(x) = sum x`.
    Sum,
    /// `M(x) = max x`. Schur-convex, registered for completeness.
    Max,
    /// `U = S - M`, the total mass outside the largest entry.
    SMinusM,
    /// `F(x) = log2 prod x`; undefined when any entry is zero. Additive on
    /// direct sums only: `F(p⊗q) = dim(q) F(p) + dim(p) F(q)`.
    LogProduct,
    /// `-log2 max x`.
    MinEntropy,
}

impl Measure {
    pub const ALL: [Measure; 6] =
        [Self::Shannon, Self::Sum, Self::Max, Self::SMinusM, Self::LogProduct, Self::MinEntropy];

    pub fn name(self) -> &'static str {
        match self {
            Self::Shannon => "shannon",
            Self::Sum => "sum",
            Self::Max => "max",
            Self::SMinusM => "s-minus-m",
            Self::LogProduct => "log-product",
            Self::MinEntropy => "min-entropy",
        }
    }

    /// Declared properties. `dp_additive`/`ds_additive` are the known truths
    /// that [`check_additivity`] should reproduce numerically.
    pub fn flags(self) -> MeasureFlags {
        let (schur_concave, dp_additive, ds_additive, defined_on_zeros) = match self {
            Self::Shannon => (true, true, true, true),
            Self::Sum => (true, false, true, true),
            Self::Max => (false, false, false, true),
            Self::SMinusM => (true, false, false, true),
            Self::LogProduct => (true, false, true, false),
            Self::MinEntropy => (true, true, false, true),
        };
        MeasureFlags { schur_concave, dp_additive, ds_additive, defined_on_zeros }
    }

    pub fn evaluate(self, x: &ProbabilityVector) -> Result<f64> {
        self.evaluate_slice(x.entries())
    }

    pub fn evaluate_slice(self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Shannon => shannon(x),
            Self::Sum => Ok(sum_s(x)),
            Self::Max => max_m(x),
            Self::SMinusM => u_measure(x),
            Self::LogProduct => log_product_f(x),
            Self::MinEntropy => min_entropy(x),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

pub fn shannon(x: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &v in x {
        if v < -CLAMP_TOL {
            return Err(Error::InvalidDistribution(format!("negative entry {v}")));
        }
        if v > 0.0 {
            h -= v * v.log2();
        }
    }
    Ok(h)
}

pub fn sum_s(x: &[f64]) -> f64 {
    x.iter().sum()
}

pub fn max_m(x: &[f64]) -> Result<f64> {
    x.iter().copied().reduce(f64::max).ok_or(Error::EmptyInput("max of an empty vector"))
}

/// `S(x) - M(x)`.
pub fn u_measure(x: &[f64]) -> Result<f64> {
    Ok((sum_s(x) - max_m(x)?).max(0.0))
}

/// `sum_{j>=2} x_j^↓`, the second route to [`u_measure`].
pub fn tail_sum(x: &[f64]) -> f64 {
    sorted_desc(x).iter().skip(1).sum()
}

pub fn log_product_f(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput("log-product of an empty vector"));
    }
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::Undefined { measure: "log-product", reason: "log of a zero entry" });
    }
    Ok(x.iter().map(|v| v.log2()).sum())
}

pub fn min_entropy(x: &[f64]) -> Result<f64> {
    let m = max_m(x)?;
    Ok(if m > 0.0 { -m.log2() } else { f64::INFINITY })
}

/// Numerical additivity report for one measure.
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub measure: &'static str,
    pub trials: usize,
    /// Largest `|U(p⊗q) - U(p) - U(q)|` observed.
    pub max_dp_violation: f64,
    /// Largest `|U(p⊕q) - U(p) - U(q)|` observed.
    pub max_ds_violation: f64,
    pub dp_additive: bool,
    pub ds_additive: bool,
    pub super_additive: bool,
}

/// Evaluates both additivity identities on `trials` random pairs of strictly
/// positive distributions of dimensions 2..=6.
pub fn check_additivity(m: Measure, trials: usize, seed: u64) -> Result<AdditivityReport> {
    if trials == 0 {
        return Err(Error::EmptyInput("additivity check needs at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dp = 0.0f64;
    let mut ds = 0.0f64;
    for t in 0..trials {
        let p = random_distribution(2 + t % 5, &mut rng);
        let q = random_distribution(2 + (t / 5) % 5, &mut rng);
        let (up, uq) = (m.evaluate(&p)?, m.evaluate(&q)?);
        let prod = m.evaluate(&direct_product(&p, &q))?;
        let sum = m.evaluate(&direct_sum(&[p, q])?)?;
        dp = dp.max((prod - up - uq).abs());
        ds = ds.max((sum - up - uq).abs());
    }
    let dp_additive = dp <= ADDITIVITY_TOL;
    let ds_additive = ds <= ADDITIVITY_TOL;
    Ok(AdditivityReport {
        measure: m.name(),
        trials,
        max_dp_violation: dp,
        max_ds_violation: ds,
        dp_additive,
        ds_additive,
        super_additive: dp_additive && ds_additive,
    })
}
