//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mur::bounds::{dp_bound, ds_bound, normalized_ds_bound, BoundPair};
use mur::experiments::{
    derive_seed, noise_statistics, run_sweep, verify_profile, Figure, Setup, DEFAULT_COUNTS, DEFAULT_REPETITIONS,
};
use mur::majorization::{direct_product, direct_product_all, direct_sum, random_majorized_pair_with};
use mur::measures::{check_additivity, max_m, shannon, u_measure, Measure};
use mur::numkernel::{hermitian_eigmax, ComplexMatrix};
use mur::quantum::{
    born_probabilities, builtin_basis, haar_random_state_with, random_unitary, state_family, BuiltinBasis,
    OrthonormalBasis, ProbabilityVector,
};
use BuiltinBasis::{A, B, C1, C2, C3};

/// Reference values are quoted to four decimals.
const REFERENCE_TOL: f64 = 1e-3;
const SOUNDNESS_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-6;
const FLOOR_TOL: f64 = 1e-6;
const EIG_TOL: f64 = 1e-10;
const SEED: u64 = 0x5EED;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn bases(names: &[BuiltinBasis]) -> Vec<OrthonormalBasis> {
    names.iter().map(|&b| builtin_basis(b)).collect()
}

fn close_all(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn two_measurement_regression() -> Verdict {
    let b = bases(&[A, B]);
    let refs: Vec<&OrthonormalBasis> = b.iter().collect();
    let ((dp, ds), elapsed) = timed(|| (dp_bound(&refs).unwrap(), ds_bound(&refs).unwrap()));
    let dp_inc = dp.printed_increments();
    let ds_inc = ds.printed_increments();
    let ok = close_all(&dp_inc, &[0.5625, 0.1661, 0.2714], REFERENCE_TOL)
        && (dp.entropy_bits() - 1.4077).abs() <= REFERENCE_TOL
        && close_all(&ds_inc, &[0.5, 0.2071, 0.2929], REFERENCE_TOL)
        && (ds.entropy_bits() - 1.4893).abs() <= REFERENCE_TOL
        && elapsed < Duration::from_secs(1);
    verdict(
        ok,
        format!(
            "dp {} H={:.4}; ds {} H={:.4}; {:.3}s",
            fmt(&dp_inc),
            dp.entropy_bits(),
            fmt(&ds_inc),
            ds.entropy_bits(),
            elapsed.as_secs_f64()
        ),
    )
}

fn three_measurement_regression() -> Verdict {
    let b = bases(&[C1, C2, C3]);
    let refs: Vec<&OrthonormalBasis> = b.iter().collect();
    let ((dp, ds), elapsed) = timed(|| (dp_bound(&refs).unwrap(), ds_bound(&refs).unwrap()));
    let dp_inc = dp.printed_increments();
    let ds_inc = ds.printed_increments();
    let ok = close_all(&dp_inc, &[0.7773, 0.2227], REFERENCE_TOL)
        && (dp.entropy_bits() - 0.7651).abs() <= REFERENCE_TOL
        && close_all(&ds_inc, &[1.0, 1.0, 0.7583, 0.2417], REFERENCE_TOL)
        && (ds.entropy_bits() - 0.7979).abs() <= REFERENCE_TOL
        && elapsed < Duration::from_secs(10);
    verdict(
        ok,
        format!(
            "dp {} H={:.4}; ds {} H={:.4}; {:.3}s",
            fmt(&dp_inc),
            dp.entropy_bits(),
            fmt(&ds_inc),
            ds.entropy_bits(),
            elapsed.as_secs_f64()
        ),
    )
}

fn cross_construction_identity() -> Verdict {
    let b = bases(&[C1, C2, C3]);
    let pair = BoundPair::compute(&b.iter().collect::<Vec<_>>()).unwrap();
    let lhs = pair.dp.omega_at(1);
    let rhs = (pair.ds.omega_at(3) / 3.0).powi(3);
    verdict((lhs - rhs).abs() <= IDENTITY_TOL, format!("dp Omega_1 = {lhs:.10}, (ds Omega_3 / 3)^3 = {rhs:.10}"))
}

fn pairwise_triviality() -> Verdict {
    let b = bases(&[C1, C2, C3]);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let pair = BoundPair::compute(&[&b[i], &b[j]]).unwrap();
        let (hd, hs) = (pair.dp.entropy_bits(), pair.ds.entropy_bits());
        ok &= hd == 0.0 && hs == 0.0 && pair.dp.omega_at(1) == 1.0 && pair.ds.omega_at(2) == 2.0;
        parts.push(format!("{}{}: H_dp={hd} H_ds={hs}", b[i].label(), b[j].label()));
    }
    let triple = BoundPair::compute(&b.iter().collect::<Vec<_>>()).unwrap();
    ok &= triple.dp.entropy_bits() > 0.7 && triple.ds.entropy_bits() > 0.7;
    parts.push(format!("triple H_dp={:.4} H_ds={:.4}", triple.dp.entropy_bits(), triple.ds.entropy_bits()));
    verdict(ok, parts.join("; "))
}

fn soundness_monte_carlo() -> Verdict {
    let (result, elapsed) = timed(|| {
        let ab = bases(&[A, B]);
        let ccc = bases(&[C1, C2, C3]);
        let ab_refs: Vec<&OrthonormalBasis> = ab.iter().collect();
        let c_refs: Vec<&OrthonormalBasis> = ccc.iter().collect();
        let ab_pair = BoundPair::compute(&ab_refs).unwrap();
        let c_pair = BoundPair::compute(&c_refs).unwrap();
        let normalized = normalized_ds_bound(&ab_refs).unwrap();
        let cases = [
            ("dp(A,B)", &ab_refs, &ab_pair.dp),
            ("ds(A,B)", &ab_refs, &ab_pair.ds),
            ("dp(C1,C2,C3)", &c_refs, &c_pair.dp),
            ("ds(C1,C2,C3)", &c_refs, &c_pair.ds),
            ("normalized ds(A,B)", &ab_refs, &normalized),
        ];
        cases
            .iter()
            .enumerate()
            .map(|(i, (name, refs, profile))| {
                let r =
                    verify_profile(refs, profile, 100_000, 10_000, derive_seed(SEED, i as u64), SOUNDNESS_TOL).unwrap();
                (name.to_string(), r.violations, r.worst_margin)
            })
            .collect::<Vec<_>>()
    });
    let violations: usize = result.iter().map(|r| r.1).sum();
    let detail: Vec<String> = result.iter().map(|(n, v, m)| format!("{n}: {v} violations, margin {m:.1e}")).collect();
    verdict(
        violations == 0 && elapsed < Duration::from_secs(60),
        format!("{}; {:.1}s", detail.join("; "), elapsed.as_secs_f64()),
    )
}

fn shannon_chain() -> Verdict {
    let b = bases(&[A, B]);
    let pair = BoundPair::compute(&b.iter().collect::<Vec<_>>()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut gap = 0.0f64;
    let mut floor = f64::INFINITY;
    for _ in 0..10_000 {
        let s = haar_random_state_with(4, &mut rng).unwrap();
        let p = born_probabilities(&s, &b[0]).unwrap();
        let q = born_probabilities(&s, &b[1]).unwrap();
        let hp = shannon(direct_product(&p, &q).entries()).unwrap();
        let hs = shannon(direct_sum(&[p, q]).unwrap().entries()).unwrap();
        gap = gap.max((hp - hs).abs());
        floor = floor.min(hs);
    }
    let (h_ds, h_dp) = (pair.ds.entropy_bits(), pair.dp.entropy_bits());
    let ok = gap <= 1e-9
        && floor >= 1.4893 - REFERENCE_TOL
        && (h_ds - 1.4893).abs() <= REFERENCE_TOL
        && (h_dp - 1.4077).abs() <= REFERENCE_TOL
        && h_ds >= h_dp
        && floor >= h_ds - SOUNDNESS_TOL;
    verdict(
        ok,
        format!(
            "max |H(p*q) - H(p+q)| = {gap:.1e}; min H(p+q) = {floor:.4}; H(w_DS) = {h_ds:.4} >= H(w_DP) = {h_dp:.4}"
        ),
    )
}

fn largest_product(p: &ProbabilityVector, q: &ProbabilityVector) -> f64 {
    max_m(p.entries()).unwrap() * max_m(q.entries()).unwrap()
}

fn strict_middle_inequality() -> Verdict {
    let setup = Setup::builtin(&[A, B]).unwrap();
    let mut worst = f64::INFINITY;
    let mut oracle_err = 0.0f64;
    let mut check = |state: &mur::quantum::PureState| {
        let ps = setup.distributions(state).unwrap();
        let xi = setup.xi(state, Measure::SMinusM).unwrap();
        worst = worst.min(xi.xi);
        oracle_err = oracle_err.max((xi.xi - largest_product(&ps[0], &ps[1])).abs());
    };
    let mut points = 0;
    for fig in [Figure::F2a, Figure::F2b] {
        let spec = fig.spec();
        for t in spec.theta.values() {
            for p in spec.phi.values() {
                check(&state_family(t, p));
                points += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    for _ in 0..10_000 {
        check(&haar_random_state_with(4, &mut rng).unwrap());
    }
    verdict(
        worst >= 1.0 / 16.0 - SOUNDNESS_TOL && oracle_err <= 1e-12,
        format!("{points} grid + 10000 random states: min xi = {worst:.6}; max |xi - max p_j q_k| = {oracle_err:.1e}"),
    )
}

fn figure_two_orderings() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for fig in [Figure::F2a, Figure::F2b, Figure::F2c, Figure::F2d] {
        let r = run_sweep(&fig.spec()).unwrap();
        let diffs: Vec<f64> = r.points.iter().map(|p| p.xi.xi_dp - p.xi.xi_ds).collect();
        let below = diffs.iter().filter(|&&d| d < 0.0).count();
        let above = diffs.iter().filter(|&&d| d > 0.0).count();
        let max = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let fig_ok = if fig == Figure::F2b { below > 0 && above > 0 } else { diffs.iter().all(|&d| d <= 0.0) };
        ok &= fig_ok;
        parts.push(format!(
            "{}: {} (xi_DP<xi_DS at {below}/{n}, > at {above}/{n}, max xi_DP-xi_DS {max:.4})",
            fig.name(),
            if fig_ok { "ok" } else { "violated" },
            n = diffs.len()
        ));
    }
    verdict(ok, parts.join("; "))
}

fn figure_three_floors() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (fig, floor) in [(Figure::F3a, 1.4893), (Figure::F3b, 1.4893), (Figure::F3c, 0.7979), (Figure::F3d, 0.7979)] {
        let r = run_sweep(&fig.spec()).unwrap();
        let min = r.points.iter().map(|p| p.entropy_sum).fold(f64::INFINITY, f64::min);
        ok &= min >= floor - FLOOR_TOL;
        parts.push(format!("{}: min sum H = {min:.4} (floor {floor})", fig.name()));
    }
    verdict(ok, parts.join("; "))
}

fn property_suites() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let mut schur_violations = 0usize;
    for trial in 0..10_000 {
        let (x, y) = random_majorized_pair_with(2 + trial % 7, &mut rng).unwrap();
        for m in Measure::ALL.into_iter().filter(|m| m.flags().schur_concave) {
            if m.evaluate(&x).unwrap() < m.evaluate(&y).unwrap() - 1e-9 {
                schur_violations += 1;
            }
        }
        if -max_m(x.entries()).unwrap() < -max_m(y.entries()).unwrap() - 1e-9 {
            schur_violations += 1;
        }
    }

    let shannon_rep = check_additivity(Measure::Shannon, 1000, SEED).unwrap();
    let log_rep = check_additivity(Measure::LogProduct, 1000, SEED).unwrap();
    let u_rep = check_additivity(Measure::SMinusM, 1000, SEED).unwrap();
    let half = ProbabilityVector::uniform(2);
    let u_prod = u_measure(direct_product_all(&[half.clone(), half.clone()]).unwrap().entries()).unwrap();
    let u_sum = 2.0 * u_measure(half.entries()).unwrap();
    let counterexample = (u_prod - 0.75).abs() < 1e-15 && (u_sum - 1.0).abs() < 1e-15;

    let mut eig_err = 0.0f64;
    for t in 0..10_000u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(SEED, t));
        let n = r.random_range(1..=16);
        let values: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let q = random_unitary(n, r.random());
        let m = q.matmul(&ComplexMatrix::diagonal(&values)).unwrap().matmul(&q.adjoint()).unwrap().hermitian_part();
        let want = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        eig_err = eig_err.max((hermitian_eigmax(&m).unwrap() - want).abs());
    }

    let ok = schur_violations == 0
        && shannon_rep.super_additive
        && log_rep.super_additive
        && !u_rep.super_additive
        && counterexample
        && eig_err <= EIG_TOL;
    verdict(
        ok,
        format!(
            "Schur violations {schur_violations}; shannon super-additive {}; log-product super-additive {} \
             (dp gap {:.3}, ds gap {:.1e}); s-minus-m super-additive {} (U(p*p) = {u_prod}, 2U(p) = {u_sum}); \
             eigensolver max error {eig_err:.1e}",
            shannon_rep.super_additive,
            log_rep.super_additive,
            log_rep.max_dp_violation,
            log_rep.max_ds_violation,
            u_rep.super_additive
        ),
    )
}

fn shot_noise() -> Verdict {
    let b = builtin_basis(B);
    let state = state_family(PI / 4.0, PI / 4.0);
    let n = DEFAULT_COUNTS;
    let small = noise_statistics(&state, &b, n, DEFAULT_REPETITIONS, SEED).unwrap();
    let large = noise_statistics(&state, &b, 4 * n, DEFAULT_REPETITIONS, derive_seed(SEED, 1)).unwrap();
    let ratio = small.std_entropy / large.std_entropy;
    let prob_ratio: Vec<f64> = small.std_estimate.iter().zip(&large.std_estimate).map(|(a, b)| a / b).collect();
    verdict(
        small.std_entropy < 0.05 && (1.8..=2.2).contains(&ratio),
        format!(
            "std H at n={n}: {:.4}, at n={}: {:.4}, ratio {ratio:.3}; probability std ratios {}",
            small.std_entropy,
            4 * n,
            large.std_entropy,
            fmt(&prob_ratio)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("two-measurement bound regression", two_measurement_regression),
        ("three-measurement bound regression", three_measurement_regression),
        ("cross-construction identity", cross_construction_identity),
        ("pairwise triviality", pairwise_triviality),
        ("soundness Monte Carlo", soundness_monte_carlo),
        ("Shannon entropy chain", shannon_chain),
        ("strict middle inequality for S - M", strict_middle_inequality),
        ("xi orderings on the two-/three-measurement sweeps", figure_two_orderings),
        ("entropy-sum floors on the sweeps", figure_three_floors),
        ("property suites", property_suites),
        ("shot-noise scaling", shot_noise),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        failed += usize::from(!v.pass);
        println!("{} criterion {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
