//! Command-line front end: `bound`, `sweep`, `verify`, `measures`, `simulate`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 semantic
//! error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{normalize_ds, BoundKind, BoundPair, CumulativeBoundProfile};
use crate::error::{Error, Result};
use crate::experiments::{
    noise_statistics, run_sweep_with, shannon_chain, simulate_counts, verify_profile, AxisRange, ChainReport, Figure,
    NoiseSpec, NoiseStats, Setup, SweepSpec, VerifyReport, DEFAULT_COUNTS, DEFAULT_REPETITIONS, DEFAULT_STEPS,
};
use crate::majorization::DEFAULT_TOL;
use crate::measures::{check_additivity, AdditivityReport, Measure};
use crate::output::json_rounded;
use crate::quantum::{builtin_basis, state_family, BuiltinBasis, OrthonormalBasis, ProbabilityVector};

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Parser)]
#[command(name = "mur", version, about = "Majorization uncertainty relations: bounds, sweeps, verification")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_parser = parse_u64)]
    pub seed: u64,
    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance for majorization checks.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a bound profile.
    Bound(BoundArgs),
    /// Evaluate the state family over a grid and write CSV.
    Sweep(SweepArgs),
    /// Monte Carlo check that random states respect a bound.
    Verify(VerifyArgs),
    /// Evaluate uncertainty measures and their additivity.
    Measures(MeasuresArgs),
    /// Simulate finite-count measurement statistics.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Comma list of built-in names (A, B, C1, C2, C3) or basis file paths.
    #[arg(long)]
    pub bases: String,
    /// dp (direct product) or ds (direct sum).
    #[arg(long)]
    pub kind: String,
    /// Halve the two-measurement direct-sum bound.
    #[arg(long)]
    pub normalized: bool,
    /// Replace the profile with its least concave majorant.
    #[arg(long)]
    pub flatten: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Preset: 2a..2d, 3a..3d, appendixA.
    #[arg(long)]
    pub figure: Option<String>,
    /// Fixed value or `from:to` range.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Fixed value or `from:to` range.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Points per swept axis.
    #[arg(long)]
    pub steps: Option<usize>,
    /// shannon, sum, max, s-minus-m, log-product or min-entropy.
    #[arg(long)]
    pub measure: Option<String>,
    /// Comma list of built-in names or basis file paths.
    #[arg(long)]
    pub bases: Option<String>,
    /// Counts per measurement setting for simulated data.
    #[arg(long)]
    pub noise: Option<u64>,
    /// Repetitions of the simulated measurement.
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma list of built-in names or basis file paths.
    #[arg(long)]
    pub bases: String,
    /// dp (direct product) or ds (direct sum).
    #[arg(long)]
    pub kind: String,
    /// Haar pure states to test.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Mixed states to test (default: a tenth of the trials).
    #[arg(long)]
    pub mixed: Option<usize>,
    /// Check the halved two-measurement direct-sum bound.
    #[arg(long)]
    pub normalized: bool,
    /// Replace the cumulative profile with this comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_override: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeasuresArgs {
    /// shannon, sum, max, s-minus-m, log-product or min-entropy.
    #[arg(long, conflicts_with = "all")]
    pub measure: Option<String>,
    /// Evaluate every registered measure.
    #[arg(long)]
    pub all: bool,
    /// Comma list of nonnegative entries.
    #[arg(long)]
    pub dist: Option<String>,
    /// Fail on undefined values.
    #[arg(long)]
    pub strict: bool,
    /// Random pairs for the additivity check.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Polar angle of the state family.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Relative phase of the state family.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    /// Built-in name or basis file.
    #[arg(long)]
    pub basis: String,
    /// Shots per repetition.
    #[arg(long, default_value_t = DEFAULT_COUNTS)]
    pub counts: u64,
    /// Repetitions for the spread statistics.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
}

fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {t:?}")))).collect()
}

/// Resolves a comma list of built-in names and file paths.
pub fn load_bases(spec: &str) -> Result<Vec<OrthonormalBasis>> {
    let bases = spec
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<BuiltinBasis>() {
            Ok(b) => Ok(builtin_basis(b)),
            Err(_) => OrthonormalBasis::load(t),
        })
        .collect::<Result<Vec<_>>>()?;
    if bases.is_empty() {
        return Err(Error::Parse("no bases given".into()));
    }
    Ok(bases)
}

fn parse_kind(s: &str) -> Result<BoundKind> {
    s.parse()
}

fn parse_axis(s: &str, steps: usize) -> Result<AxisRange> {
    match s.split_once(':') {
        Some((a, b)) => {
            let from = a.trim().parse().map_err(|_| Error::Parse(format!("bad range start {a:?}")))?;
            let to = b.trim().parse().map_err(|_| Error::Parse(format!("bad range end {b:?}")))?;
            AxisRange::new(from, to, steps)
        }
        None => {
            let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad angle {s:?}")))?;
            AxisRange::new(v, v, 1)
        }
    }
}

/// What a command produced.
struct Outcome {
    /// Goes to `--out` or standard output.
    primary: String,
    /// Always standard output when `--out` is set, else standard error.
    secondary: Option<String>,
    /// Diagnostic text for standard error.
    diagnostics: Option<String>,
    failed: bool,
}

impl Outcome {
    fn json<T: Serialize>(value: &T) -> Result<Self> {
        Ok(Self { primary: json_rounded(value)?, secondary: None, diagnostics: None, failed: false })
    }
}

fn cmd_bound(args: &BoundArgs) -> Result<Outcome> {
    let kind = parse_kind(&args.kind)?;
    let bases = load_bases(&args.bases)?;
    let refs: Vec<&OrthonormalBasis> = bases.iter().collect();
    let mut profile = if args.normalized {
        if kind != BoundKind::DirectSum {
            return Err(Error::Arity("--normalized applies to the direct-sum bound only".into()));
        }
        crate::bounds::normalized_ds_bound(&refs)?
    } else {
        match kind {
            BoundKind::DirectProduct => crate::bounds::dp_bound(&refs)?,
            BoundKind::DirectSum => crate::bounds::ds_bound(&refs)?,
        }
    };
    if args.flatten {
        profile = profile.flattened();
    }
    Outcome::json(&profile.to_json())
}

fn sweep_spec(args: &SweepArgs, seed: u64) -> Result<SweepSpec> {
    let mut spec = match &args.figure {
        Some(name) => {
            let figure: Figure = name.parse()?;
            let mut spec = figure.spec();
            if let Some(steps) = args.steps {
                for axis in [&mut spec.theta, &mut spec.phi] {
                    if axis.steps > 1 {
                        *axis = AxisRange::new(axis.from, axis.to, steps)?;
                    }
                }
            }
            spec
        }
        None => {
            let steps = args.steps.unwrap_or(DEFAULT_STEPS);
            let theta = parse_axis(
                args.theta.as_deref().ok_or(Error::Parse("--theta or --figure is required".into()))?,
                steps,
            )?;
            let phi =
                parse_axis(args.phi.as_deref().ok_or(Error::Parse("--phi or --figure is required".into()))?, steps)?;
            SweepSpec {
                theta,
                phi,
                bases: load_bases(args.bases.as_deref().unwrap_or("A,B"))?,
                measure: Measure::Shannon,
                noise: None,
                normalized_comparison: false,
            }
        }
    };
    if args.figure.is_some() && (args.theta.is_some() || args.phi.is_some() || args.bases.is_some()) {
        return Err(Error::Parse("--figure cannot be combined with --theta, --phi or --bases".into()));
    }
    if let Some(m) = &args.measure {
        spec.measure = m.parse()?;
    }
    if args.noise.is_some() || args.reps.is_some() {
        spec.noise = Some(NoiseSpec {
            counts_per_setting: args.noise.unwrap_or(DEFAULT_COUNTS),
            repetitions: args.reps.unwrap_or(DEFAULT_REPETITIONS),
            seed,
        });
    }
    Ok(spec)
}

fn cmd_sweep(args: &SweepArgs, seed: u64) -> Result<Outcome> {
    let spec = sweep_spec(args, seed)?;
    let setup = Setup::new(spec.bases.clone())?;
    let result = run_sweep_with(&setup, &spec)?;
    Ok(Outcome {
        primary: result.to_csv(),
        secondary: Some(json_rounded(&result.summary(setup.bounds()))?),
        diagnostics: None,
        failed: false,
    })
}

#[derive(Serialize)]
struct VerifyOutput {
    verification: VerifyReport,
    shannon_chain: ChainReport,
    passed: bool,
}

fn cmd_verify(args: &VerifyArgs, seed: u64, tol: f64) -> Result<Outcome> {
    let kind = parse_kind(&args.kind)?;
    let bases = load_bases(&args.bases)?;
    let refs: Vec<&OrthonormalBasis> = bases.iter().collect();
    let pair = BoundPair::compute(&refs)?;
    let mut profile: CumulativeBoundProfile = pair.get(kind).clone();
    if args.normalized {
        if kind != BoundKind::DirectSum || refs.len() != 2 {
            return Err(Error::Arity("--normalized applies to the two-measurement direct-sum bound only".into()));
        }
        profile = normalize_ds(&profile);
    }
    if let Some(list) = &args.omega_override {
        profile = profile.with_omega(parse_list(list)?);
    }
    if args.trials == 0 {
        return Err(Error::Parse("--trials must be at least 1".into()));
    }
    let mixed = args.mixed.unwrap_or(args.trials / 10);
    let verification = verify_profile(&refs, &profile, args.trials, mixed, seed, tol)?;
    let chain = shannon_chain(&refs, &pair, args.trials.min(10_000), seed ^ 0xC4A1)?;
    let passed = verification.passed() && chain.holds;
    let diagnostics = (!passed).then(|| {
        let state = verification
            .worst_state
            .as_ref()
            .and_then(|s| serde_json::to_string(s).ok())
            .unwrap_or_else(|| "none".into());
        format!(
            "verification failed: {} violation(s), shannon chain {}; worst state: {state}\n",
            verification.violations,
            if chain.holds { "holds" } else { "broken" }
        )
    });
    let out = VerifyOutput { verification, shannon_chain: chain, passed };
    Ok(Outcome { primary: json_rounded(&out)?, secondary: None, diagnostics, failed: !passed })
}

#[derive(Serialize)]
struct MeasureValue {
    measure: &'static str,
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    undefined: Option<&'static str>,
}

#[derive(Serialize)]
struct MeasuresOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    values: Vec<MeasureValue>,
    additivity: Vec<AdditivityReport>,
}

fn cmd_measures(args: &MeasuresArgs, seed: u64) -> Result<Outcome> {
    let selected: Vec<Measure> = match (&args.measure, args.all) {
        (Some(name), false) => vec![name.parse()?],
        (None, true) => Measure::ALL.to_vec(),
        _ => return Err(Error::Parse("give --measure NAME or --all".into())),
    };
    let dist = args.dist.as_deref().map(parse_list).transpose()?.map(ProbabilityVector::from_entries).transpose()?;
    if dist.as_ref().is_some_and(|d| d.is_empty()) {
        return Err(Error::EmptyInput("empty distribution"));
    }
    let mut values = Vec::new();
    if let Some(d) = &dist {
        for &m in &selected {
            values.push(match m.evaluate(d) {
                Ok(v) => MeasureValue { measure: m.name(), value: Some(v), undefined: None },
                Err(Error::Undefined { reason, .. }) if !args.strict => {
                    MeasureValue { measure: m.name(), value: None, undefined: Some(reason) }
                }
                Err(e) => return Err(e),
            });
        }
    }
    let additivity = selected.iter().map(|&m| check_additivity(m, args.trials, seed)).collect::<Result<Vec<_>>>()?;
    Outcome::json(&MeasuresOutput { distribution: dist.map(ProbabilityVector::into_entries), values, additivity })
}

#[derive(Serialize)]
struct SimulateOutput {
    basis: String,
    theta: f64,
    phi: f64,
    counts_per_setting: u64,
    exact: Vec<f64>,
    counts: Vec<u64>,
    estimate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spread: Option<NoiseStats>,
}

fn cmd_simulate(args: &SimulateArgs, seed: u64) -> Result<Outcome> {
    let basis = load_bases(&args.basis)?.remove(0);
    let state = state_family(args.theta, args.phi);
    if basis.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: basis.dim() });
    }
    if args.reps == 0 {
        return Err(Error::Parse("--reps must be at least 1".into()));
    }
    let run = simulate_counts(&state, &basis, args.counts, seed).map_err(|e| match e {
        Error::InvalidDistribution(m) => Error::Parse(m),
        e => e,
    })?;
    let spread =
        if args.reps > 1 { Some(noise_statistics(&state, &basis, args.counts, args.reps, seed)?) } else { None };
    Outcome::json(&SimulateOutput {
        basis: basis.label().to_string(),
        theta: args.theta,
        phi: args.phi,
        counts_per_setting: args.counts,
        exact: crate::quantum::born_probabilities(&state, &basis)?.into_entries(),
        counts: run.counts,
        estimate: run.estimate.into_entries(),
        spread,
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        return Err(Error::Parse("--tol must be a nonnegative number".into()));
    }
    match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Sweep(a) => cmd_sweep(a, cli.seed),
        Command::Verify(a) => cmd_verify(a, cli.seed, cli.tol),
        Command::Measures(a) => cmd_measures(a, cli.seed),
        Command::Simulate(a) => cmd_simulate(a, cli.seed),
    }
}

/// Runs a parsed command, writing to the given streams; returns the exit code.
pub fn run_with(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &outcome.primary).map_err(Error::from).and_then(|_| {
            outcome.secondary.as_ref().map_or(Ok(()), |s| stdout.write_all(s.as_bytes()).map_err(Error::from))
        }),
        None => stdout.write_all(outcome.primary.as_bytes()).map_err(Error::from).and_then(|_| {
            outcome.secondary.as_ref().map_or(Ok(()), |s| stderr.write_all(s.as_bytes()).map_err(Error::from))
        }),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return e.exit_code();
    }
    if let Some(d) = &outcome.diagnostics {
        let _ = stderr.write_all(d.as_bytes());
    }
    if outcome.failed {
        1
    } else {
        0
    }
}

/// Parses `args` (including the program name) and runs; usage errors exit 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_with(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
