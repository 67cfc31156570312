//! Parameter sweeps over the four-dimensional state family, finite-count
//! noise, and Monte Carlo soundness checks of the bounds.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{normalize_ds, BoundKind, BoundPair, CumulativeBoundProfile};
use crate::error::{Error, Result};
use crate::majorization::{direct_product_all, direct_sum, dominated_by_profile, slack_over_prefixes};
use crate::measures::{shannon, Measure};
use crate::output::csv_number;
use crate::quantum::{
    born_probabilities, builtin_basis, haar_random_state_with, random_mixed_state_with, state_family, BuiltinBasis,
    DensityMatrix, OrthonormalBasis, ProbabilityVector, PureState, StateRef,
};

/// Coincidence counts collected per measurement setting by default.
pub const DEFAULT_COUNTS: u64 = 4000;
/// Independent simulated runs used for error bars.
pub const DEFAULT_REPETITIONS: usize = 100;
/// Points per swept axis.
pub const DEFAULT_STEPS: usize = 101;

/// Per-index seed: `seed ^ splitmix64(index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = index.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    seed ^ (z ^ (z >> 31))
}

/// The three comparison quantities for one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Xi {
    /// `U(⊗p) - U(omega_DP)`.
    pub xi_dp: f64,
    /// `U(⊕p) - U(omega_DS)`.
    pub xi_ds: f64,
    /// `U(omega_DS) - U(⊗p)`.
    pub xi: f64,
}

/// Bases together with their cached bounds.
#[derive(Debug, Clone)]
pub struct Setup {
    bases: Vec<OrthonormalBasis>,
    bounds: BoundPair,
}

impl Setup {
    pub fn new(bases: Vec<OrthonormalBasis>) -> Result<Self> {
        let bounds = BoundPair::compute(&bases.iter().collect::<Vec<_>>())?;
        Ok(Self { bases, bounds })
    }

    pub fn builtin(names: &[BuiltinBasis]) -> Result<Self> {
        Self::new(names.iter().map(|&b| builtin_basis(b)).collect())
    }

    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    pub fn bounds(&self) -> &BoundPair {
        &self.bounds
    }

    pub fn distributions<'a>(&self, state: impl Into<StateRef<'a>>) -> Result<Vec<ProbabilityVector>> {
        let state = state.into();
        self.bases.iter().map(|b| born_probabilities(state, b)).collect()
    }

    pub fn xi(&self, state: &PureState, measure: Measure) -> Result<Xi> {
        xi_from_distributions(&self.distributions(state)?, &self.bounds, measure)
    }
}

pub fn xi_from_distributions(ps: &[ProbabilityVector], bounds: &BoundPair, measure: Measure) -> Result<Xi> {
    let product = direct_product_all(ps)?;
    let sum = direct_sum(ps)?;
    let u_product = measure.evaluate(&product)?;
    let u_sum = measure.evaluate(&sum)?;
    let u_dp = measure.evaluate(&bounds.dp.increments_distribution()?)?;
    let u_ds = measure.evaluate(&bounds.ds.increments_distribution()?)?;
    Ok(Xi { xi_dp: u_product - u_dp, xi_ds: u_sum - u_ds, xi: u_ds - u_product })
}

/// `xi_DP`, `xi_DS` and `xi` of `state` under `bases`, bounds computed on the fly.
pub fn xi_quantities(state: &PureState, bases: &[&OrthonormalBasis], measure: Measure) -> Result<Xi> {
    let bounds = BoundPair::compute(bases)?;
    let ps = bases.iter().map(|b| born_probabilities(state, b)).collect::<Result<Vec<_>>>()?;
    xi_from_distributions(&ps, &bounds, measure)
}

/// Simulated outcome counts and the resulting frequency estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCounts {
    pub counts: Vec<u64>,
    pub estimate: ProbabilityVector,
}

/// Multinomial draw of `n` outcomes from `p`, by sequential conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(p: &[f64], n: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; p.len()];
    let mut remaining = n;
    let mut mass: f64 = p.iter().sum();
    for (j, &pj) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if j + 1 == p.len() {
            counts[j] = remaining;
            break;
        }
        let ratio = if mass > 0.0 { (pj / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if ratio >= 1.0 {
            remaining
        } else if ratio <= 0.0 {
            0
        } else {
            Binomial::new(remaining, ratio).expect("ratio in (0, 1)").sample(rng)
        };
        counts[j] = draw;
        remaining -= draw;
        mass -= pj;
    }
    counts
}

pub fn simulate_counts_with<R: Rng + ?Sized>(
    state: &PureState,
    basis: &OrthonormalBasis,
    n: u64,
    rng: &mut R,
) -> Result<SimulatedCounts> {
    let p = born_probabilities(state, basis)?;
    simulate_from_distribution(&p, n, rng)
}

fn simulate_from_distribution<R: Rng + ?Sized>(p: &ProbabilityVector, n: u64, rng: &mut R) -> Result<SimulatedCounts> {
    if n == 0 {
        return Err(Error::InvalidDistribution("at least one count is required".into()));
    }
    let counts = sample_multinomial(p.entries(), n, rng);
    let estimate = ProbabilityVector::new(counts.iter().map(|&c| c as f64 / n as f64).collect(), 1.0)?;
    Ok(SimulatedCounts { counts, estimate })
}

/// `n` simulated detections of `state` measured in `basis`; deterministic in `seed`.
pub fn simulate_counts(state: &PureState, basis: &OrthonormalBasis, n: u64, seed: u64) -> Result<SimulatedCounts> {
    simulate_counts_with(state, basis, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Spread of the Shannon entropy and of each frequency over repeated simulated runs.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseStats {
    pub counts: u64,
    pub repetitions: usize,
    pub exact: Vec<f64>,
    pub exact_entropy: f64,
    pub mean_estimate: Vec<f64>,
    pub std_estimate: Vec<f64>,
    pub mean_entropy: f64,
    pub std_entropy: f64,
}

/// Mean and sample standard deviation (`n - 1` denominator).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn noise_statistics(
    state: &PureState,
    basis: &OrthonormalBasis,
    counts: u64,
    repetitions: usize,
    seed: u64,
) -> Result<NoiseStats> {
    if repetitions == 0 {
        return Err(Error::EmptyInput("noise statistics need at least one repetition"));
    }
    let exact = born_probabilities(state, basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let runs =
        (0..repetitions).map(|_| simulate_from_distribution(&exact, counts, &mut rng)).collect::<Result<Vec<_>>>()?;
    let entropies: Vec<f64> = runs.iter().map(|r| shannon(r.estimate.entries())).collect::<Result<_>>()?;
    let (mean_entropy, std_entropy) = mean_std(&entropies);
    let d = exact.len();
    let (mean_estimate, std_estimate) =
        (0..d).map(|j| mean_std(&runs.iter().map(|r| r.estimate.entries()[j]).collect::<Vec<_>>())).unzip();
    Ok(NoiseStats {
        counts,
        repetitions,
        exact_entropy: shannon(exact.entries())?,
        exact: exact.into_entries(),
        mean_estimate,
        std_estimate,
        mean_entropy,
        std_entropy,
    })
}

/// Which joint distribution a profile constrains.
fn joint_distribution(ps: &[ProbabilityVector], profile: &CumulativeBoundProfile) -> Result<ProbabilityVector> {
    match profile.kind() {
        BoundKind::DirectProduct => direct_product_all(ps),
        BoundKind::DirectSum => {
            let sum = direct_sum(ps)?;
            Ok(if profile.is_normalized() { sum.scaled(1.0 / ps.len() as f64) } else { sum })
        }
    }
}

/// State reported for the tightest (or violating) sample.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportedState {
    Pure { amplitudes: Vec<[f64; 2]> },
    Mixed { density_matrix: Vec<Vec<[f64; 2]>> },
}

impl ReportedState {
    fn pure(s: &PureState) -> Self {
        Self::Pure { amplitudes: s.amplitudes().iter().map(|z| [z.re, z.im]).collect() }
    }

    fn mixed(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        Self::Mixed {
            density_matrix: (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        }
    }
}

/// Outcome of a Monte Carlo soundness run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub kind: BoundKind,
    pub normalized: bool,
    pub pure_trials: usize,
    pub mixed_trials: usize,
    /// Maximizer eigenvectors of the profile, checked before the random states.
    pub probe_states: usize,
    pub violations: usize,
    /// `min (Omega_k - partial sum_k)` over all states and all proper prefixes `k < n`.
    pub worst_margin: f64,
    pub worst_state: Option<ReportedState>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Sample {
    violated: bool,
    margin: f64,
    index: usize,
}

fn merge_worst(a: Option<Sample>, b: Option<Sample>) -> Option<Sample> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let key = |s: &Sample| (!s.violated, s.margin, s.index);
            if key(&y).partial_cmp(&key(&x)) == Some(std::cmp::Ordering::Less) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Checks `profile` against `pure_trials` Haar pure states and `mixed_trials`
/// random mixtures, plus the profile's own maximizer states.
pub fn verify_profile(
    bases: &[&OrthonormalBasis],
    profile: &CumulativeBoundProfile,
    pure_trials: usize,
    mixed_trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerifyReport> {
    let d = bases.first().ok_or(Error::EmptyInput("no bases"))?.dim();
    let n = profile.omega().len();
    let evaluate = |ps: Vec<ProbabilityVector>| -> Result<(bool, f64)> {
        let joint = joint_distribution(&ps, profile)?;
        let ok = dominated_by_profile(&joint, profile, tol);
        let margin = slack_over_prefixes(&joint, profile, n.saturating_sub(1).max(1)).unwrap_or(0.0);
        Ok((!ok, margin))
    };
    let distributions =
        |state: StateRef<'_>| bases.iter().map(|b| born_probabilities(state, b)).collect::<Result<Vec<_>>>();

    let probes: Vec<PureState> =
        profile.maximizers().iter().flatten().filter_map(|m| PureState::normalized(m.state.clone()).ok()).collect();

    let total = probes.len() + pure_trials + mixed_trials;
    let worst = (0..total)
        .into_par_iter()
        .map(|i| -> Result<Option<Sample>> {
            let ps = if i < probes.len() {
                distributions(StateRef::Pure(&probes[i]))?
            } else if i < probes.len() + pure_trials {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                distributions(StateRef::Pure(&haar_random_state_with(d, &mut rng)?))?
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                distributions(StateRef::Mixed(&random_mixed_state_with(d, &mut rng)?))?
            };
            let (violated, margin) = evaluate(ps)?;
            Ok(Some(Sample { violated, margin, index: i }))
        })
        .try_fold(
            || (0usize, None),
            |(count, worst), s| -> Result<_> {
                let s = s?;
                let c = count + s.as_ref().map_or(0, |x| x.violated as usize);
                Ok((c, merge_worst(worst, s)))
            },
        )
        .try_reduce(|| (0usize, None), |(c1, w1), (c2, w2)| Ok((c1 + c2, merge_worst(w1, w2))))?;

    let (violations, worst) = worst;
    let worst_state = worst.as_ref().map(|s| -> Result<ReportedState> {
        let i = s.index;
        Ok(if i < probes.len() {
            ReportedState::pure(&probes[i])
        } else if i < probes.len() + pure_trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            ReportedState::pure(&haar_random_state_with(d, &mut rng)?)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            ReportedState::mixed(&random_mixed_state_with(d, &mut rng)?)
        })
    });
    Ok(VerifyReport {
        kind: profile.kind(),
        normalized: profile.is_normalized(),
        pure_trials,
        mixed_trials,
        probe_states: probes.len(),
        violations,
        worst_margin: worst.as_ref().map_or(f64::INFINITY, |s| s.margin),
        worst_state: worst_state.transpose()?,
    })
}

/// Soundness check of the `kind` bound: `trials` Haar pure states plus
/// `trials / 10` mixed states.
pub fn monte_carlo_verify(
    bases: &[&OrthonormalBasis],
    kind: BoundKind,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::EmptyInput("verification needs at least one trial"));
    }
    let pair = BoundPair::compute(bases)?;
    verify_profile(bases, pair.get(kind), trials, trials / 10, seed, crate::majorization::DEFAULT_TOL)
}

/// Shannon ordering `H(⊗p) = H(⊕p) >= H(omega_DS) >= H(omega_DP)` over random states.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub trials: usize,
    pub entropy_ds_bound: f64,
    pub entropy_dp_bound: f64,
    /// `max |H(⊗p) - H(⊕p)|`.
    pub max_equality_gap: f64,
    /// `min H(⊕p)`.
    pub min_joint_entropy: f64,
    pub holds: bool,
}

pub fn shannon_chain(bases: &[&OrthonormalBasis], bounds: &BoundPair, trials: usize, seed: u64) -> Result<ChainReport> {
    let d = bases.first().ok_or(Error::EmptyInput("no bases"))?.dim();
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let s = haar_random_state_with(d, &mut rng)?;
            let ps = bases.iter().map(|b| born_probabilities(&s, b)).collect::<Result<Vec<_>>>()?;
            let hp = shannon(direct_product_all(&ps)?.entries())?;
            let hs = shannon(direct_sum(&ps)?.entries())?;
            Ok(((hp - hs).abs(), hs))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_equality_gap = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let min_joint_entropy = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let entropy_ds_bound = bounds.ds.entropy_bits();
    let entropy_dp_bound = bounds.dp.entropy_bits();
    let tol = 1e-9;
    let holds = max_equality_gap <= tol
        && min_joint_entropy >= entropy_ds_bound - tol
        && entropy_ds_bound >= entropy_dp_bound - tol;
    Ok(ChainReport { trials, entropy_ds_bound, entropy_dp_bound, max_equality_gap, min_joint_entropy, holds })
}

/// Inclusive grid `from, ..., to` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn fixed(value: f64) -> Self {
        Self { from: value, to: value, steps: 1 }
    }

    pub fn new(from: f64, to: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Parse("an axis needs at least one step".into()));
        }
        if !from.is_finite() || !to.is_finite() {
            return Err(Error::Parse("axis bounds must be finite".into()));
        }
        Ok(Self { from, to, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.to } else { self.from + h * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NoiseSpec {
    pub counts_per_setting: u64,
    pub repetitions: usize,
    pub seed: u64,
}

/// Everything needed to evaluate a grid of states.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub theta: AxisRange,
    pub phi: AxisRange,
    pub bases: Vec<OrthonormalBasis>,
    pub measure: Measure,
    pub noise: Option<NoiseSpec>,
    /// Adds the normalized direct-sum comparison columns.
    pub normalized_comparison: bool,
}

/// Named sweep presets. The swept angle covers `[0, 2pi]` for `phi` or
/// `[0, pi]` for `theta`. Series 2 uses `S - M`, series 3 and `appendixA` use
/// Shannon entropy; `c`/`d` are the three-measurement variants at `theta = pi`
/// and `phi = pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    F2a,
    F2b,
    F2c,
    F2d,
    F3a,
    F3b,
    F3c,
    F3d,
    AppendixA,
}

impl Figure {
    pub const ALL: [Figure; 9] =
        [Self::F2a, Self::F2b, Self::F2c, Self::F2d, Self::F3a, Self::F3b, Self::F3c, Self::F3d, Self::AppendixA];

    pub fn name(self) -> &'static str {
        match self {
            Self::F2a => "2a",
            Self::F2b => "2b",
            Self::F2c => "2c",
            Self::F2d => "2d",
            Self::F3a => "3a",
            Self::F3b => "3b",
            Self::F3c => "3c",
            Self::F3d => "3d",
            Self::AppendixA => "appendixA",
        }
    }

    pub fn spec(self) -> SweepSpec {
        use BuiltinBasis::*;
        let phi_sweep = AxisRange { from: 0.0, to: 2.0 * PI, steps: DEFAULT_STEPS };
        let theta_sweep = AxisRange { from: 0.0, to: PI, steps: DEFAULT_STEPS };
        let two = [A, B];
        let three = [C1, C2, C3];
        let (theta, phi, names, measure): (AxisRange, AxisRange, &[BuiltinBasis], Measure) = match self {
            Self::F2a => (AxisRange::fixed(FRAC_PI_4), phi_sweep, &two, Measure::SMinusM),
            Self::F2b => (theta_sweep, AxisRange::fixed(FRAC_PI_4), &two, Measure::SMinusM),
            Self::F2c => (AxisRange::fixed(PI), phi_sweep, &three, Measure::SMinusM),
            Self::F2d => (theta_sweep, AxisRange::fixed(FRAC_PI_2), &three, Measure::SMinusM),
            Self::F3a => (AxisRange::fixed(FRAC_PI_4), phi_sweep, &two, Measure::Shannon),
            Self::F3b => (theta_sweep, AxisRange::fixed(FRAC_PI_4), &two, Measure::Shannon),
            Self::F3c => (AxisRange::fixed(PI), phi_sweep, &three, Measure::Shannon),
            Self::F3d => (theta_sweep, AxisRange::fixed(FRAC_PI_2), &three, Measure::Shannon),
            Self::AppendixA => (AxisRange::fixed(FRAC_PI_4), phi_sweep, &two, Measure::Shannon),
        };
        SweepSpec {
            theta,
            phi,
            bases: names.iter().map(|&b| builtin_basis(b)).collect(),
            measure,
            noise: None,
            normalized_comparison: self == Self::AppendixA,
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// Shannon entropies of `p⊗q` and `½p⊕½q` next to their bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedComparison {
    pub h_dp: f64,
    pub h_dp_bound: f64,
    pub h_norm_ds: f64,
    pub h_norm_ds_bound: f64,
}

impl NormalizedComparison {
    pub fn margin_dp(&self) -> f64 {
        self.h_dp - self.h_dp_bound
    }

    pub fn margin_norm_ds(&self) -> f64 {
        self.h_norm_ds - self.h_norm_ds_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub phi: f64,
    pub distributions: Vec<Vec<f64>>,
    /// Shannon entropy of each measurement's distribution.
    pub entropies: Vec<f64>,
    pub entropy_sum: f64,
    /// `NaN` components where the measure is undefined.
    pub xi: Xi,
    pub normalized: Option<NormalizedComparison>,
    /// Mean and standard deviation of `U(⊕ p_hat)` over simulated runs.
    pub noisy: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub labels: Vec<String>,
    pub measure: Measure,
    pub points: Vec<SweepPoint>,
}

/// Column-wise extrema of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub measure: &'static str,
    pub min_xi_dp: f64,
    pub max_xi_dp: f64,
    pub min_xi_ds: f64,
    pub max_xi_ds: f64,
    pub min_xi: f64,
    pub max_xi: f64,
    pub min_xi_dp_minus_xi_ds: f64,
    pub max_xi_dp_minus_xi_ds: f64,
    pub min_entropy_sum: f64,
    pub max_entropy_sum: f64,
    pub entropy_dp_bound: f64,
    pub entropy_ds_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_normalized_ds_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_dp_margin: Option<f64>,
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| !v.is_nan()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn point_for(
    setup: &Setup,
    spec: &SweepSpec,
    normalized_bound: Option<&CumulativeBoundProfile>,
    theta: f64,
    phi: f64,
    index: u64,
) -> Result<SweepPoint> {
    let state = state_family(theta, phi);
    if state.dim() != setup.bases()[0].dim() {
        return Err(Error::DimensionMismatch { expected: setup.bases()[0].dim(), found: state.dim() });
    }
    let ps = setup.distributions(&state)?;
    let entropies = ps.iter().map(|p| shannon(p.entries())).collect::<Result<Vec<_>>>()?;
    let entropy_sum = entropies.iter().sum();
    let xi = match xi_from_distributions(&ps, setup.bounds(), spec.measure) {
        Ok(x) => x,
        Err(Error::Undefined { .. }) => Xi { xi_dp: f64::NAN, xi_ds: f64::NAN, xi: f64::NAN },
        Err(e) => return Err(e),
    };
    let normalized = match normalized_bound {
        Some(bound) => {
            let half = direct_sum(&ps)?.scaled(1.0 / ps.len() as f64);
            Some(NormalizedComparison {
                h_dp: shannon(direct_product_all(&ps)?.entries())?,
                h_dp_bound: setup.bounds().dp.entropy_bits(),
                h_norm_ds: shannon(half.entries())?,
                h_norm_ds_bound: bound.entropy_bits(),
            })
        }
        None => None,
    };
    let noisy = match spec.noise {
        Some(noise) => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(noise.seed, index));
            let mut values = Vec::with_capacity(noise.repetitions);
            for _ in 0..noise.repetitions {
                let estimates = ps
                    .iter()
                    .map(|p| simulate_from_distribution(p, noise.counts_per_setting, &mut rng).map(|s| s.estimate))
                    .collect::<Result<Vec<_>>>()?;
                values.push(spec.measure.evaluate(&direct_sum(&estimates)?).unwrap_or(f64::NAN));
            }
            Some(mean_std(&values))
        }
        None => None,
    };
    Ok(SweepPoint {
        theta,
        phi,
        distributions: ps.into_iter().map(ProbabilityVector::into_entries).collect(),
        entropies,
        entropy_sum,
        xi,
        normalized,
        noisy,
    })
}

/// Evaluates the grid in row-major `(theta, phi)` order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let setup = Setup::new(spec.bases.clone())?;
    run_sweep_with(&setup, spec)
}

/// [`run_sweep`] with precomputed bounds; `setup` must hold `spec.bases`.
pub fn run_sweep_with(setup: &Setup, spec: &SweepSpec) -> Result<SweepResult> {
    if let Some(noise) = spec.noise {
        if noise.counts_per_setting == 0 || noise.repetitions == 0 {
            return Err(Error::Parse("noise needs positive counts and repetitions".into()));
        }
    }
    let normalized_bound = if spec.normalized_comparison { Some(normalize_ds(&setup.bounds().ds)) } else { None };
    let grid: Vec<(f64, f64)> =
        spec.theta.values().into_iter().flat_map(|t| spec.phi.values().into_iter().map(move |p| (t, p))).collect();
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(t, p))| point_for(setup, spec, normalized_bound.as_ref(), t, p, i as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        labels: setup.bases().iter().map(|b| b.label().to_string()).collect(),
        measure: spec.measure,
        points,
    })
}

const PREFIXES: [&str; 4] = ["p", "q", "r", "s"];

impl SweepResult {
    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["theta".to_string(), "phi".to_string()];
        let dims: Vec<usize> =
            self.points.first().map(|p| p.distributions.iter().map(Vec::len).collect()).unwrap_or_default();
        for (l, d) in dims.iter().enumerate() {
            let prefix = PREFIXES.get(l).map_or_else(|| format!("p{l}_"), |s| s.to_string());
            cols.extend((0..*d).map(|j| format!("{prefix}{j}")));
        }
        cols.extend(self.labels.iter().map(|l| format!("H_{l}")));
        cols.push("H_sum".into());
        cols.extend(["xi_dp", "xi_ds", "xi"].map(String::from));
        if self.points.first().is_some_and(|p| p.normalized.is_some()) {
            cols.extend(
                ["H_dp", "H_dp_bound", "H_norm_ds", "H_norm_ds_bound", "margin_dp", "margin_norm_ds"].map(String::from),
            );
        }
        cols.extend(["noisy_mean", "noisy_std"].map(String::from));
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for p in &self.points {
            let mut row: Vec<String> = vec![csv_number(p.theta), csv_number(p.phi)];
            row.extend(p.distributions.iter().flatten().map(|&x| csv_number(x)));
            row.extend(p.entropies.iter().map(|&x| csv_number(x)));
            row.push(csv_number(p.entropy_sum));
            row.extend([p.xi.xi_dp, p.xi.xi_ds, p.xi.xi].map(csv_number));
            if let Some(n) = &p.normalized {
                row.extend(
                    [n.h_dp, n.h_dp_bound, n.h_norm_ds, n.h_norm_ds_bound, n.margin_dp(), n.margin_norm_ds()]
                        .map(csv_number),
                );
            }
            match p.noisy {
                Some((mean, std)) => row.extend([csv_number(mean), csv_number(std)]),
                None => row.extend([String::new(), String::new()]),
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn summary(&self, bounds: &BoundPair) -> SweepSummary {
        let (min_xi_dp, max_xi_dp) = min_max(self.points.iter().map(|p| p.xi.xi_dp));
        let (min_xi_ds, max_xi_ds) = min_max(self.points.iter().map(|p| p.xi.xi_ds));
        let (min_xi, max_xi) = min_max(self.points.iter().map(|p| p.xi.xi));
        let (min_diff, max_diff) = min_max(self.points.iter().map(|p| p.xi.xi_dp - p.xi.xi_ds));
        let (min_h, max_h) = min_max(self.points.iter().map(|p| p.entropy_sum));
        let normalized: Vec<&NormalizedComparison> = self.points.iter().filter_map(|p| p.normalized.as_ref()).collect();
        let (min_norm, min_dp) = if normalized.is_empty() {
            (None, None)
        } else {
            (
                Some(min_max(normalized.iter().map(|n| n.margin_norm_ds())).0),
                Some(min_max(normalized.iter().map(|n| n.margin_dp())).0),
            )
        };
        SweepSummary {
            points: self.points.len(),
            measure: self.measure.name(),
            min_xi_dp,
            max_xi_dp,
            min_xi_ds,
            max_xi_ds,
            min_xi,
            max_xi,
            min_xi_dp_minus_xi_ds: min_diff,
            max_xi_dp_minus_xi_ds: max_diff,
            min_entropy_sum: min_h,
            max_entropy_sum: max_h,
            entropy_dp_bound: bounds.dp.entropy_bits(),
            entropy_ds_bound: bounds.ds.entropy_bits(),
            min_normalized_ds_margin: min_norm,
            min_dp_margin: min_dp,
        }
    }
}
