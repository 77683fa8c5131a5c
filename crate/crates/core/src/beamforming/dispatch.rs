use log::debug;
use serde::{Deserialize, Serialize};

use super::closed_form::solve_p2_closed_form_single_rx;
use super::profile::PowerProfile;
use super::randomization::{randomization_extract, RandomizationOptions, DEFAULT_DRAWS, DEFAULT_SEED};
use super::sdr::{rank_one_currents, solve_p1_sdr, solve_p2_sdr};
use super::solution::{BeamformingSolution, Method, Slot};
use super::timeshare::{solve_p1_ts_lp, time_sharing_from_sdr};
use crate::circuit::{ActiveConstraints, ImpedanceModel};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub const DEFAULT_BISECTION_EPS: f64 = 1e-2;

/// Rank-one extraction method when the relaxation is not tight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact extraction when rank one, else the cheaper of the fallbacks.
    #[default]
    Auto,
    /// Single receiver without peak limits only.
    ClosedForm,
    TimeSharing,
    Randomization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Enforce per-TX peak voltage and current limits.
    pub peaks: bool,
    pub method: MethodChoice,
    pub draws: usize,
    pub seed: u64,
    pub rank_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            peaks: true,
            method: MethodChoice::Auto,
            draws: DEFAULT_DRAWS,
            seed: DEFAULT_SEED,
            rank_tol: magbeam_conic::DEFAULT_RANK_TOL,
        }
    }
}

impl SolveOptions {
    pub fn unconstrained() -> Self {
        Self {
            peaks: false,
            ..Self::default()
        }
    }

    pub fn active(&self) -> ActiveConstraints {
        if self.peaks {
            ActiveConstraints::ALL
        } else {
            ActiveConstraints::NO_PEAKS
        }
    }

    fn randomization(&self) -> RandomizationOptions {
        RandomizationOptions {
            draws: self.draws,
            seed: self.seed,
            active: self.active(),
        }
    }
}

/// Minimum TX power currents delivering `alpha_q P` to each receiver.
pub fn solve_p1(
    scenario: &Scenario,
    model: &ImpedanceModel,
    profile: &PowerProfile,
    p: f64,
    opts: &SolveOptions,
) -> Result<BeamformingSolution> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::InvalidArgument(format!("target power must be nonnegative, got {p}")));
    }
    if profile.len() != model.n_rx() {
        return Err(Error::Dimension {
            context: "power profile",
            expected: model.n_rx(),
            found: profile.len(),
        });
    }
    if p == 0.0 {
        return Ok(BeamformingSolution::zero(model, Method::SdrRank1));
    }
    if opts.method == MethodChoice::ClosedForm {
        if opts.peaks || model.n_rx() != 1 {
            return Err(Error::InvalidArgument(
                "closed form applies to one receiver without peak limits".into(),
            ));
        }
        return solve_p2_closed_form_single_rx(scenario, model, p);
    }

    if !opts.peaks {
        let (sdr, extracted) = solve_p2_sdr(model, profile, p, opts.rank_tol)?;
        return match (opts.method, extracted) {
            (MethodChoice::Randomization, _) => {
                let mut s = randomization_extract(scenario, model, &sdr.x, profile, p, &opts.randomization())?;
                s.sdr_rank = sdr.rank;
                s.sdr_value = Some(sdr.value);
                Ok(s)
            }
            (MethodChoice::TimeSharing, _) | (_, None) => time_sharing_from_sdr(model, &sdr.x, opts.rank_tol),
            (_, Some(s)) => Ok(s),
        };
    }

    let sdr = solve_p1_sdr(scenario, model, profile, p, opts.rank_tol)?;
    if sdr.rank == 0 {
        return Ok(BeamformingSolution::zero(model, Method::SdrRank1));
    }
    if sdr.rank == 1 && opts.method == MethodChoice::Auto {
        return BeamformingSolution::from_slots(
            model,
            vec![Slot {
                tau: 1.0,
                currents: rank_one_currents(&sdr.eigen),
            }],
            Method::SdrRank1,
            1,
            Some(sdr.value),
        );
    }
    let randomized = || {
        randomization_extract(scenario, model, &sdr.x, profile, p, &opts.randomization()).map(|mut s| {
            s.sdr_rank = sdr.rank;
            s.sdr_value = Some(sdr.value);
            s
        })
    };
    match opts.method {
        MethodChoice::TimeSharing => solve_p1_ts_lp(scenario, model, &sdr, profile, p),
        MethodChoice::Randomization => randomized(),
        _ => {
            let ts = solve_p1_ts_lp(scenario, model, &sdr, profile, p);
            let rnd = randomized();
            debug!(
                "rank {} relaxation: ts {:?}, randomization {:?}",
                sdr.rank,
                ts.as_ref().map(|s| s.tx_power),
                rnd.as_ref().map(|s| s.tx_power)
            );
            match (ts, rnd) {
                (Ok(a), Ok(b)) => Ok(if b.tx_power < a.tx_power { b } else { a }),
                (Ok(a), Err(_)) => Ok(a),
                (Err(_), Ok(b)) => Ok(b),
                (Err(e), Err(_)) => Err(e),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome {
    /// Largest delivered sum power found feasible, W.
    pub p_star: f64,
    pub solution: BeamformingSolution,
    pub steps: usize,
    /// Midpoints where the solver failed numerically; each was treated as
    /// infeasible.
    pub numerical_failures: usize,
}

/// Largest `P` whose minimum TX power stays within the total power cap.
pub fn solve_p0_bisection(
    scenario: &Scenario,
    model: &ImpedanceModel,
    profile: &PowerProfile,
    eps: f64,
    opts: &SolveOptions,
) -> Result<BisectionOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("bisection tolerance must be positive, got {eps}")));
    }
    let cap = scenario.total_power_cap;
    let (mut lo, mut hi) = (0.0, cap);
    let mut best = BeamformingSolution::zero(model, Method::SdrRank1);
    let mut steps = 0;
    let mut numerical_failures = 0;
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        steps += 1;
        match solve_p1(scenario, model, profile, mid, opts) {
            Ok(s) if s.tx_power <= cap => {
                lo = mid;
                best = s;
            }
            Ok(_) | Err(Error::Infeasible(_)) => hi = mid,
            Err(Error::NumericalFailure(msg)) => {
                debug!("numerical failure at P = {mid}: {msg}");
                numerical_failures += 1;
                hi = mid;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(BisectionOutcome {
        p_star: lo,
        solution: best,
        steps,
        numerical_failures,
    })
}
