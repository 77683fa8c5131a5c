//! Boundary of the multi-receiver power region, traced along power profiles.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::beamforming::{
    benchmark_uncoordinated, solve_p0_bisection, BenchmarkTarget, Method, PowerProfile, SolveOptions,
    DEFAULT_BISECTION_EPS,
};
use crate::circuit::{ActiveConstraints, ImpedanceModel};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub const DEFAULT_GRID: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Beamforming,
    Benchmark,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRegionPoint {
    pub alpha: PowerProfile,
    /// Largest sum power deliverable along `alpha`, W.
    pub p_star: f64,
    /// Power delivered to each RX, W.
    pub per_rx: Vec<f64>,
    pub constrained: bool,
    pub solution_method: Method,
    pub rank: usize,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionOptions {
    pub eps: f64,
    pub solve: SolveOptions,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_BISECTION_EPS,
            solve: SolveOptions::default(),
        }
    }
}

impl RegionOptions {
    fn with_peaks(&self, constrained: bool) -> SolveOptions {
        SolveOptions {
            peaks: constrained,
            ..self.solve
        }
    }
}

pub fn boundary_point(
    scenario: &Scenario,
    model: &ImpedanceModel,
    alpha: &PowerProfile,
    constrained: bool,
    opts: &RegionOptions,
) -> Result<PowerRegionPoint> {
    let out = solve_p0_bisection(scenario, model, alpha, opts.eps, &opts.with_peaks(constrained))?;
    Ok(PowerRegionPoint {
        alpha: alpha.clone(),
        p_star: out.p_star,
        per_rx: out.solution.per_rx_power.clone(),
        constrained,
        solution_method: out.solution.method,
        rank: out.solution.sdr_rank,
        scheme: Scheme::Beamforming,
    })
}

/// Identical-current point along `alpha`: the largest common current gives
/// powers `p_q`, and the profile is met up to `min_q p_q / alpha_q`.
pub fn benchmark_point(
    scenario: &Scenario,
    model: &ImpedanceModel,
    alpha: &PowerProfile,
    constrained: bool,
) -> Result<PowerRegionPoint> {
    if alpha.len() != model.n_rx() {
        return Err(Error::Dimension {
            context: "power profile",
            expected: model.n_rx(),
            found: alpha.len(),
        });
    }
    let active = if constrained {
        ActiveConstraints::ALL
    } else {
        ActiveConstraints::NO_PEAKS
    };
    let sol = benchmark_uncoordinated(scenario, model, BenchmarkTarget::MaxFeasible, active)?;
    let p_star = alpha
        .alpha()
        .iter()
        .zip(&sol.per_rx_power)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, p)| p / a)
        .fold(f64::INFINITY, f64::min);
    Ok(PowerRegionPoint {
        alpha: alpha.clone(),
        p_star,
        per_rx: alpha.alpha().iter().map(|a| a * p_star).collect(),
        constrained,
        solution_method: Method::Benchmark,
        rank: 0,
        scheme: Scheme::Benchmark,
    })
}

fn lex(a: &PowerRegionPoint, b: &PowerRegionPoint) -> std::cmp::Ordering {
    let key = |p: &PowerRegionPoint| p.scheme == Scheme::Benchmark;
    key(a).cmp(&key(b)).then_with(|| {
        a.alpha
            .alpha()
            .iter()
            .zip(b.alpha.alpha())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// One boundary point per profile, evaluated in parallel, plus the
/// benchmark points when `baseline` is set. Sorted by scheme then `alpha`.
pub fn sweep_region(
    scenario: &Scenario,
    model: &ImpedanceModel,
    profiles: &[PowerProfile],
    constrained: bool,
    baseline: bool,
    opts: &RegionOptions,
) -> Result<Vec<PowerRegionPoint>> {
    let mut points: Vec<PowerRegionPoint> = profiles
        .par_iter()
        .map(|a| boundary_point(scenario, model, a, constrained, opts))
        .collect::<Result<_>>()?;
    if baseline {
        for a in profiles {
            points.push(benchmark_point(scenario, model, a, constrained)?);
        }
    }
    points.sort_by(lex);
    Ok(points)
}

pub fn write_csv<W: Write>(out: W, points: &[PowerRegionPoint]) -> Result<()> {
    let q = points.first().map_or(0, |p| p.alpha.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=q).map(|k| format!("alpha_{k}")).collect();
    header.push("p_star".into());
    header.extend((1..=q).map(|k| format!("p_rx_{k}")));
    header.extend(["method", "rank", "constrained", "scheme"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for p in points {
        let mut row: Vec<String> = p.alpha.alpha().iter().map(|v| v.to_string()).collect();
        row.push(p.p_star.to_string());
        row.extend(p.per_rx.iter().map(|v| v.to_string()));
        row.push(label(&p.solution_method));
        row.push(p.rank.to_string());
        row.push(p.constrained.to_string());
        row.push(label(&p.scheme));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv write failed: {e}"))
}

/// Settings and extremes of a sweep, for reproducibility records.
#[derive(Debug, Clone, Serialize)]
pub struct RegionSummary {
    pub scenario_hash: String,
    pub points: usize,
    pub constrained: bool,
    pub baseline: bool,
    pub eps: f64,
    pub draws: usize,
    pub seed: u64,
    pub rank_tol: f64,
    /// Largest power reached by each RX over the beamforming points, W.
    pub max_per_rx: Vec<f64>,
    /// Same over the benchmark points, when computed.
    pub benchmark_max_per_rx: Option<Vec<f64>>,
}

impl RegionSummary {
    pub fn new(scenario: &Scenario, points: &[PowerRegionPoint], constrained: bool, baseline: bool, opts: &RegionOptions) -> Self {
        let max_of = |scheme: Scheme| {
            let mut m = vec![0.0f64; scenario.n_rx()];
            for p in points.iter().filter(|p| p.scheme == scheme) {
                for (a, v) in m.iter_mut().zip(&p.per_rx) {
                    *a = a.max(*v);
                }
            }
            m
        };
        Self {
            scenario_hash: scenario.hash(),
            points: points.len(),
            constrained,
            baseline,
            eps: opts.eps,
            draws: opts.solve.draws,
            seed: opts.solve.seed,
            rank_tol: opts.solve.rank_tol,
            max_per_rx: max_of(Scheme::Beamforming),
            benchmark_max_per_rx: baseline.then(|| max_of(Scheme::Benchmark)),
        }
    }
}
