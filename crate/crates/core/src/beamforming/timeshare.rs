//! Time-sharing realizations of higher-rank relaxed solutions.

use magbeam_conic::{psd_eigendecomposition, LpProblem, Sense, Status};
use nalgebra::DMatrix;

use super::profile::PowerProfile;
use super::sdr::SdrOutcome;
use super::solution::{BeamformingSolution, Method, Slot};
use crate::circuit::{Excitation, ImpedanceModel, C64};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Slots with a time fraction below this are dropped.
pub const MIN_TAU: f64 = 1e-9;

/// Relative cap excess tolerated when a rank-one relaxation sits on a peak
/// limit and the schedule is a single slot.
pub const SINGLE_SLOT_TOL: f64 = 1e-7;

/// Split `X = sum_l lambda_l u_l u_l^H` into `L = rank(X)` slots with
/// `tau_l = lambda_l / sum_k lambda_k` and currents `sqrt(sum_k lambda_k) u_l`.
pub fn time_sharing_from_sdr(model: &ImpedanceModel, x: &DMatrix<C64>, rank_tol: f64) -> Result<BeamformingSolution> {
    let eigen = psd_eigendecomposition(x)?;
    let rank = eigen.rank(rank_tol);
    if rank == 0 {
        return Err(Error::InvalidArgument("zero matrix has no time-sharing schedule".into()));
    }
    let total: f64 = eigen.values[..rank].iter().sum();
    let scale = C64::new(total.sqrt(), 0.0);
    let slots = (0..rank)
        .map(|l| Slot {
            tau: eigen.values[l] / total,
            currents: Excitation {
                currents: eigen.vector(l) * scale,
            },
        })
        .collect();
    let value = 0.5 * (model.b_bar.map(|v| C64::new(v, 0.0)) * x).trace().re;
    BeamformingSolution::from_slots(model, slots, Method::TimeSharing, rank, Some(value))
}

/// Per-slot feasible time sharing over the leading eigenvectors of a
/// peak-constrained relaxed solution.
///
/// Variables are `phi_l = theta_l tau_l` and `tau_l`; slot `l` then carries
/// currents `sqrt(theta_l) u_l` for a fraction `tau_l` of the time.
pub fn solve_p1_ts_lp(
    scenario: &Scenario,
    model: &ImpedanceModel,
    sdr: &SdrOutcome,
    profile: &PowerProfile,
    p: f64,
) -> Result<BeamformingSolution> {
    let l_count = sdr.rank;
    if l_count == 0 {
        return Ok(BeamformingSolution::zero(model, Method::TimeSharing));
    }
    let n = model.n_tx();
    let q_count = model.n_rx();
    let u: Vec<_> = (0..l_count).map(|l| sdr.eigen.vector(l)).collect();

    let c0: Vec<f64> = u
        .iter()
        .map(|v| v.dotc(&(model.b_bar.map(|x| C64::new(x, 0.0)) * v)).re)
        .collect();
    let c1: Vec<Vec<f64>> = (0..q_count)
        .map(|q| {
            u.iter()
                .map(|v| {
                    let s: C64 = model.m_vectors[q].iter().zip(v.iter()).map(|(&m, &x)| x * m).sum();
                    model.kappa[q] * s.norm_sqr()
                })
                .collect()
        })
        .collect();
    let c2: Vec<Vec<f64>> = (0..n)
        .map(|k| u.iter().map(|v| model.b_columns[k].dotc(v).norm_sqr()).collect())
        .collect();
    let c3: Vec<Vec<f64>> = (0..n).map(|k| u.iter().map(|v| v[k].norm_sqr()).collect()).collect();

    if l_count == 1 {
        return single_slot(scenario, model, sdr, &u[0], profile, p, &c1, &c2, &c3);
    }

    let vars = 2 * l_count;
    let mut objective = vec![0.0; vars];
    for l in 0..l_count {
        objective[l] = 0.5 * c0[l];
    }
    let mut lp = LpProblem::nonnegative(objective);
    for (q, &a) in profile.alpha().iter().enumerate() {
        if a * p > 0.0 {
            let mut row = vec![0.0; vars];
            row[..l_count].copy_from_slice(&c1[q]);
            lp.push(row, Sense::Ge, a * p);
        }
    }
    for k in 0..n {
        for l in 0..l_count {
            let mut row = vec![0.0; vars];
            row[l] = c2[k][l];
            row[l_count + l] = -scenario.peak_voltage[k].powi(2);
            lp.push(row, Sense::Le, 0.0);
            let mut row = vec![0.0; vars];
            row[l] = c3[k][l];
            row[l_count + l] = -scenario.peak_current[k].powi(2);
            lp.push(row, Sense::Le, 0.0);
        }
    }
    let mut row = vec![0.0; vars];
    row[l_count..].iter_mut().for_each(|x| *x = 1.0);
    lp.push(row, Sense::Eq, 1.0);

    let sol = lp.solve()?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Err(Error::Infeasible("time-sharing LP is infeasible".into())),
        s => return Err(Error::NumericalFailure(format!("time-sharing LP stopped with {s:?}"))),
    }

    let mut slots = Vec::new();
    for l in 0..l_count {
        let tau = sol.primal[l_count + l];
        if tau <= MIN_TAU {
            continue;
        }
        let mut theta = sol.primal[l].max(0.0) / tau;
        // Clip the rounding excess off the per-slot caps.
        for k in 0..n {
            if c2[k][l] > 0.0 {
                theta = theta.min(scenario.peak_voltage[k].powi(2) / c2[k][l]);
            }
            if c3[k][l] > 0.0 {
                theta = theta.min(scenario.peak_current[k].powi(2) / c3[k][l]);
            }
        }
        slots.push(Slot {
            tau,
            currents: Excitation {
                currents: &u[l] * C64::new(theta.sqrt(), 0.0),
            },
        });
    }
    let total: f64 = slots.iter().map(|s| s.tau).sum();
    for s in &mut slots {
        s.tau /= total;
    }
    BeamformingSolution::from_slots(model, slots, Method::TimeSharing, sdr.rank, Some(sdr.value))
}

/// One slot: the smallest scaling meeting every demand, if it respects
/// the caps to within [`SINGLE_SLOT_TOL`].
#[allow(clippy::too_many_arguments)]
fn single_slot(
    scenario: &Scenario,
    model: &ImpedanceModel,
    sdr: &SdrOutcome,
    u: &nalgebra::DVector<C64>,
    profile: &PowerProfile,
    p: f64,
    c1: &[Vec<f64>],
    c2: &[Vec<f64>],
    c3: &[Vec<f64>],
) -> Result<BeamformingSolution> {
    let mut need = 0.0f64;
    for (q, &a) in profile.alpha().iter().enumerate() {
        if a * p > 0.0 {
            if c1[q][0] <= 0.0 {
                return Err(Error::Infeasible("time-sharing LP is infeasible".into()));
            }
            need = need.max(a * p / c1[q][0]);
        }
    }
    let mut cap = f64::INFINITY;
    for k in 0..model.n_tx() {
        if c2[k][0] > 0.0 {
            cap = cap.min(scenario.peak_voltage[k].powi(2) / c2[k][0]);
        }
        if c3[k][0] > 0.0 {
            cap = cap.min(scenario.peak_current[k].powi(2) / c3[k][0]);
        }
    }
    if need > cap * (1.0 + SINGLE_SLOT_TOL) {
        return Err(Error::Infeasible("time-sharing LP is infeasible".into()));
    }
    let slot = Slot {
        tau: 1.0,
        currents: Excitation {
            currents: u * C64::new(need.min(cap).sqrt(), 0.0),
        },
    };
    BeamformingSolution::from_slots(model, vec![slot], Method::TimeSharing, sdr.rank, Some(sdr.value))
}
