//! `magbeam`: beamforming, power regions, channel estimation and scenario
//! checks from the command line.
//!
//! Exit codes: 0 success, 1 failed validation or reference check,
//! 2 infeasible, 64 usage or input error, 70 numerical failure.

mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magbeam::beamforming::{
    solve_p0_bisection, solve_p1, BeamformingSolution, MethodChoice, PowerProfile, SolveOptions, DEFAULT_BISECTION_EPS,
    DEFAULT_DRAWS, DEFAULT_SEED,
};
use magbeam::estimation::{monte_carlo_mse, write_mse_csv, Estimator, TrainingProtocol, DEFAULT_TRIALS};
use magbeam::region::{sweep_region, write_csv, RegionOptions, RegionSummary, DEFAULT_GRID};
use magbeam::{build_impedance, reference, Error, Scenario};
use serde::Serialize;

use manifest::{alongside, now_ms, RunManifest};

const EXIT_FAILED: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_NUMERICAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "magbeam", version, about = "Magnetic beamforming for multi-receiver wireless power transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum-power TX currents for a delivered-power target, or the
    /// largest deliverable power along a profile.
    Beamform(BeamformArgs),
    /// Trace the power-region boundary.
    Region(RegionArgs),
    /// Monte Carlo error of coupling estimators.
    Estimate(EstimateArgs),
    /// Check scenario invariants.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// Scenario JSON file.
    #[arg(required_unless_present = "paper_suite")]
    scenario: Option<PathBuf>,
    /// Write the result here instead of stdout; a manifest goes alongside.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Explicit manifest path.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, hide = true)]
    #[serde(skip)]
    paper_suite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Auto,
    ClosedForm,
    TimeSharing,
    Randomization,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::ClosedForm => MethodChoice::ClosedForm,
            MethodArg::TimeSharing => MethodChoice::TimeSharing,
            MethodArg::Randomization => MethodChoice::Randomization,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SolverArgs {
    /// Drop the per-TX peak voltage and current limits.
    #[arg(long)]
    no_peaks: bool,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Randomization seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Randomization draws.
    #[arg(long, default_value_t = DEFAULT_DRAWS)]
    draws: usize,
    /// Bisection tolerance on the sum power, W.
    #[arg(long, default_value_t = DEFAULT_BISECTION_EPS)]
    eps: f64,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            peaks: !self.no_peaks,
            method: self.method.into(),
            draws: self.draws,
            seed: self.seed,
            ..SolveOptions::default()
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[command(group = clap::ArgGroup::new("goal").args(["target_power", "maximize"]))]
struct BeamformArgs {
    #[command(flatten)]
    common: Common,
    /// Power profile, comma separated, summing to one. Defaults to `1` for a
    /// single RX.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Total delivered power, W.
    #[arg(long)]
    target_power: Option<f64>,
    /// Bisect for the largest deliverable power.
    #[arg(long)]
    maximize: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
struct RegionArgs {
    #[command(flatten)]
    common: Common,
    /// Grid intervals for a two-RX sweep; points are `k / grid`.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Explicit profiles, `a,b;c,d`, for any number of RXs.
    #[arg(long)]
    alpha_list: Option<String>,
    /// Also emit identical-current benchmark points.
    #[arg(long)]
    baseline: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EstimatorArg {
    Ls,
    Perfect,
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TrainingArg {
    Block,
    Random,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "ls")]
    estimator: EstimatorArg,
    /// SNRs in dB, comma separated; `inf` means noiseless.
    #[arg(long, value_delimiter = ',', default_value = "20,30,40")]
    snr_list: Vec<String>,
    /// Training slots. Defaults to 10 for ls, Q for perfect, NQ for pairwise.
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long, value_enum, default_value = "block")]
    training: TrainingArg,
    /// Training source voltage, V.
    #[arg(long)]
    voltage: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::NumericalFailure(_) | Error::Conic(_) | Error::Singular(_) | Error::ZeroTxPower => EXIT_NUMERICAL,
            Error::Scenario(_) | Error::Dimension { .. } | Error::IndexOutOfRange { .. } | Error::InvalidArgument(_) => {
                EXIT_USAGE
            }
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<magbeam::ScenarioError> for Failure {
    fn from(e: magbeam::ScenarioError) -> Self {
        Failure::usage(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Beamform(a) => beamform(a),
        Command::Region(a) => region(a),
        Command::Estimate(a) => estimate(a),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn reference_suite(ids: &[u32], trials: usize) -> Outcome {
    let checks = reference::run(ids, trials);
    for c in &checks {
        println!("{}", c.line());
    }
    Ok(if checks.iter().all(|c| c.pass) { 0 } else { EXIT_FAILED })
}

fn load(common: &Common) -> Result<(PathBuf, Scenario), Failure> {
    let path = common.scenario.clone().ok_or_else(|| Failure::usage("a scenario file is required"))?;
    let s = Scenario::load(&path)?;
    Ok((path, s))
}

/// Write `text` to `--out` or stdout, and the manifest where asked.
fn emit(common: &Common, text: &str, mut manifest: RunManifest, path: &Path, scenario: &Scenario) -> Result<(), Failure> {
    manifest.scenario_path = Some(path.to_path_buf());
    manifest.scenario_hash = Some(scenario.hash());
    match &common.out {
        Some(out) => std::fs::write(out, text).map_err(|e| io_failure(out, e))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("stdout"), e))?,
    }
    if let Some(m) = common.manifest.clone().or_else(|| common.out.as_deref().map(alongside)) {
        manifest.write(&m).map_err(|e| io_failure(&m, e))?;
    }
    Ok(())
}

fn profile_for(scenario: &Scenario, alpha: Option<&[f64]>) -> Result<PowerProfile, Failure> {
    match alpha {
        Some(a) => {
            if a.len() != scenario.n_rx() {
                return Err(Failure::usage(format!(
                    "--alpha has {} entries, the scenario has {} RXs",
                    a.len(),
                    scenario.n_rx()
                )));
            }
            PowerProfile::new(a.to_vec()).map_err(|e| Failure::usage(e.to_string()))
        }
        None if scenario.n_rx() == 1 => Ok(PowerProfile::single(0, 1)),
        None => Err(Failure::usage("--alpha is required with more than one RX")),
    }
}

#[derive(Serialize)]
struct BeamformReport<'a> {
    scenario_hash: String,
    alpha: &'a PowerProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bisection_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    numerical_failures: Option<usize>,
    efficiency: Option<f64>,
    solution: &'a BeamformingSolution,
}

fn beamform(a: &BeamformArgs) -> Outcome {
    if a.common.paper_suite {
        return reference_suite(&[1, 2, 3, 4, 5, 6, 8], DEFAULT_TRIALS);
    }
    let started = now_ms();
    if a.target_power.is_none() && !a.maximize {
        return Err(Failure::usage("one of --target-power or --maximize is required"));
    }
    let (path, s) = load(&a.common)?;
    let model = build_impedance(&s)?;
    let profile = profile_for(&s, a.alpha.as_deref())?;
    let opts = a.solver.options();
    let (solution, p_star, steps, failures) = match a.target_power {
        Some(p) => (solve_p1(&s, &model, &profile, p, &opts)?, None, None, None),
        None => {
            let out = solve_p0_bisection(&s, &model, &profile, a.solver.eps, &opts)?;
            (out.solution, Some(out.p_star), Some(out.steps), Some(out.numerical_failures))
        }
    };
    let report = BeamformReport {
        scenario_hash: s.hash(),
        alpha: &profile,
        target_power: a.target_power,
        p_star,
        bisection_steps: steps,
        numerical_failures: failures,
        efficiency: solution.efficiency(&model).ok(),
        solution: &solution,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::usage(e.to_string()))? + "\n";
    emit(&a.common, &text, RunManifest::new("beamform", a, Some(a.solver.seed), started), &path, &s)?;
    Ok(0)
}

fn parse_alpha_list(text: &str) -> Result<Vec<PowerProfile>, Failure> {
    text.split(';')
        .filter(|row| !row.trim().is_empty())
        .map(|row| {
            let v = row
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| Failure::usage(format!("bad profile entry `{x}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            PowerProfile::new(v).map_err(|e| Failure::usage(e.to_string()))
        })
        .collect()
}

fn region(a: &RegionArgs) -> Outcome {
    if a.common.paper_suite {
        return reference_suite(&[7], DEFAULT_TRIALS);
    }
    let started = now_ms();
    let (path, s) = load(&a.common)?;
    let profiles = match &a.alpha_list {
        Some(text) => {
            let p = parse_alpha_list(text)?;
            if let Some(bad) = p.iter().find(|p| p.len() != s.n_rx()) {
                return Err(Failure::usage(format!("profile {:?} does not match {} RXs", bad.alpha(), s.n_rx())));
            }
            p
        }
        None if s.n_rx() == 2 => {
            if a.grid == 0 {
                return Err(Failure::usage("--grid must be at least 1"));
            }
            PowerProfile::two_user_grid(a.grid)
        }
        None => {
            return Err(Failure::usage(format!(
                "grid sweeps need exactly two RXs, the scenario has {}; pass --alpha-list",
                s.n_rx()
            )))
        }
    };
    if profiles.is_empty() {
        return Err(Failure::usage("no profiles to sweep"));
    }
    let model = build_impedance(&s)?;
    let opts = RegionOptions {
        eps: a.solver.eps,
        solve: a.solver.options(),
    };
    let points = sweep_region(&s, &model, &profiles, !a.solver.no_peaks, a.baseline, &opts)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &points)?;
    let text = String::from_utf8(buf).map_err(|e| Failure::usage(e.to_string()))?;
    let mut m = RunManifest::new("region", a, Some(a.solver.seed), started);
    m.summary = serde_json::to_value(RegionSummary::new(&s, &points, !a.solver.no_peaks, a.baseline, &opts))
        .unwrap_or_default();
    emit(&a.common, &text, m, &path, &s)?;
    Ok(0)
}

fn parse_snr(text: &str) -> Result<f64, Failure> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| Failure::usage(format!("bad SNR `{t}`")))
}

fn estimate(a: &EstimateArgs) -> Outcome {
    if a.common.paper_suite {
        return reference_suite(&[9], a.trials);
    }
    let started = now_ms();
    let (path, s) = load(&a.common)?;
    let (n, q) = (s.n_tx(), s.n_rx());
    let estimator = match a.estimator {
        EstimatorArg::Ls => Estimator::Ls,
        EstimatorArg::Perfect => Estimator::Perfect,
        EstimatorArg::Pairwise => Estimator::Pairwise,
    };
    let slots = a.slots.unwrap_or(match estimator {
        Estimator::Ls => 10,
        Estimator::Perfect => q,
        Estimator::Pairwise => n * q,
    });
    match estimator {
        Estimator::Ls if slots < q => {
            return Err(Failure::usage(format!("least squares needs --slots >= Q = {q}, got {slots}")))
        }
        Estimator::Perfect if slots != q => {
            return Err(Failure::usage(format!("the exact estimator needs --slots = Q = {q}, got {slots}")))
        }
        Estimator::Pairwise if slots != n * q => {
            return Err(Failure::usage(format!("the pairwise estimator uses N Q = {} slots, got {slots}", n * q)))
        }
        _ => {}
    }
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be positive"));
    }
    let snrs = a.snr_list.iter().map(|t| parse_snr(t)).collect::<Result<Vec<_>, _>>()?;
    let mut protocol = match a.training {
        TrainingArg::Block => TrainingProtocol::block(slots),
        TrainingArg::Random => TrainingProtocol::random(slots, a.seed),
    };
    protocol.seed = a.seed;
    if let Some(v) = a.voltage {
        if !(v.is_finite() && v > 0.0) {
            return Err(Failure::usage(format!("--voltage must be positive, got {v}")));
        }
        protocol.active_voltage = v;
    }
    let model = build_impedance(&s)?;
    let points = monte_carlo_mse(&s, &model, estimator, &protocol, &snrs, a.trials)?;
    let mut buf = Vec::new();
    write_mse_csv(&mut buf, &points)?;
    let text = String::from_utf8(buf).map_err(|e| Failure::usage(e.to_string()))?;
    let mut m = RunManifest::new("estimate", a, Some(a.seed), started);
    m.summary = serde_json::to_value(protocol).unwrap_or_default();
    emit(&a.common, &text, m, &path, &s)?;
    Ok(0)
}

#[derive(Serialize)]
struct ValidationReport {
    scenario: PathBuf,
    pass: bool,
    violations: Vec<magbeam::Violation>,
    /// Smallest eigenvalue of `B̄` relative to its largest.
    b_bar_min_eig_ratio: Option<f64>,
}

fn validate(a: &ValidateArgs) -> Outcome {
    if a.common.paper_suite {
        return reference_suite(&[10], DEFAULT_TRIALS);
    }
    let path = a.common.scenario.clone().ok_or_else(|| Failure::usage("a scenario file is required"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut s = Scenario::parse_unchecked(&text)?;
    s.symmetrize();
    let mut violations = s.violations();
    let mut ratio = None;
    if violations.is_empty() {
        let model = build_impedance(&s)?;
        let eig = nalgebra::SymmetricEigen::new(model.b_bar.clone()).eigenvalues;
        let r = eig.min() / eig.max();
        ratio = Some(r);
        if !(r > -1e-12) {
            violations.push(magbeam::Violation {
                condition: "psd_loss_matrix",
                field: "b_bar".into(),
                message: format!("smallest eigenvalue ratio {r:.3e}"),
            });
        }
    }
    let report = ValidationReport {
        scenario: path,
        pass: violations.is_empty(),
        violations,
        b_bar_min_eig_ratio: ratio,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::usage(e.to_string()))?);
    } else if report.pass {
        println!("PASS {}: all scenario invariants hold", report.scenario.display());
    } else {
        for v in &report.violations {
            println!("FAIL {v}");
        }
    }
    Ok(if report.pass { 0 } else { EXIT_FAILED })
}
