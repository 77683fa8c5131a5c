//! Semidefinite relaxations of the TX power minimization.
//!
//! Both relaxations minimize `tr(B̄ X) / 2` subject to
//! `kappa_q tr(M_q X) >= alpha_q P`. The peak-constrained form adds
//! `tr(B_n X) <= V_n²` and `X_nn <= A_n²` over Hermitian `X`; the
//! unconstrained form is solved over real symmetric `X`.
//!
//! Solver output is truncated to its numerical rank and then moved along
//! the optimal face to the smallest rank the constraint count guarantees,
//! so the rank-one cases come out rank one even when the face is not a
//! single point. That step may make the unconstrained solution complex.

use log::warn;
use magbeam_conic::{
    psd_eigendecomposition, reduce_rank, ConicError, ConicSolution, Eigen, HermitianSdp, SdpProblem, Sense, Status, Tolerances,
};
use nalgebra::DMatrix;

use super::profile::PowerProfile;
use super::solution::{BeamformingSolution, Method, Slot};
use crate::circuit::{Excitation, ImpedanceModel, C64};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Solved relaxation with its spectral data.
#[derive(Debug, Clone)]
pub struct SdrOutcome {
    pub value: f64,
    /// Optimal matrix after rank reduction.
    pub x: DMatrix<C64>,
    pub eigen: Eigen,
    pub rank: usize,
    /// Largest rank the theory allows for a solution of this instance.
    pub rank_bound: usize,
    pub iterations: usize,
    pub rel_gap: f64,
}

impl SdrOutcome {
    pub fn within_rank_bound(&self) -> bool {
        self.rank <= self.rank_bound
    }

    fn zero(n: usize, rank_bound: usize) -> Self {
        Self {
            value: 0.0,
            x: DMatrix::zeros(n, n),
            eigen: Eigen {
                values: vec![0.0; n],
                vectors: DMatrix::identity(n, n),
            },
            rank: 0,
            rank_bound,
            iterations: 0,
            rel_gap: 0.0,
        }
    }
}

/// Relaxations are solved to this accuracy so that the discarded spectrum
/// of a rank-deficient optimum sits far below the rank threshold.
pub const SDR_TOLERANCES: Tolerances = Tolerances {
    gap: 1e-12,
    feasibility: 1e-11,
    infeasibility: 1e-8,
    max_iterations: 150,
};

/// Solve at [`SDR_TOLERANCES`], falling back to the solver defaults when
/// the tight run stalls.
fn solve_tight<M>(
    run: impl Fn(&Tolerances) -> std::result::Result<ConicSolution<M>, ConicError>,
) -> std::result::Result<ConicSolution<M>, ConicError> {
    let sol = run(&SDR_TOLERANCES)?;
    if sol.status == Status::NumericalFailure {
        return run(&Tolerances::default());
    }
    Ok(sol)
}

/// `min(Q, ceil(sqrt(Q + 2N)))` for the peak-constrained relaxation.
pub fn p1_rank_bound(q: usize, n: usize) -> usize {
    let r = ((q + 2 * n) as f64).sqrt().ceil() as usize;
    q.min(r).max(1)
}

/// `floor(sqrt(Q))`, at least one, for the unconstrained relaxation.
pub fn p2_rank_bound(q: usize) -> usize {
    ((q as f64).sqrt().floor() as usize).max(1)
}

fn check_profile(model: &ImpedanceModel, profile: &PowerProfile, p: f64) -> Result<()> {
    if profile.len() != model.n_rx() {
        return Err(Error::Dimension {
            context: "power profile",
            expected: model.n_rx(),
            found: profile.len(),
        });
    }
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::InvalidArgument(format!("target power must be nonnegative, got {p}")));
    }
    Ok(())
}

fn demanded(profile: &PowerProfile, p: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
    profile
        .alpha()
        .iter()
        .enumerate()
        .map(move |(q, a)| (q, a * p))
        .filter(|(_, need)| *need > 0.0)
}

fn uncoupled_demand(model: &ImpedanceModel, profile: &PowerProfile, p: f64) -> Option<usize> {
    demanded(profile, p).map(|(q, _)| q).find(|&q| model.kappa[q] * model.m_vectors[q].norm_squared() == 0.0)
}

fn finish<M>(
    model: &ImpedanceModel,
    sol: ConicSolution<M>,
    x: DMatrix<C64>,
    constraints: &[DMatrix<C64>],
    rank_tol: f64,
    rank_bound: usize,
) -> Result<SdrOutcome> {
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Err(Error::Infeasible("relaxation is infeasible".into())),
        Status::Unbounded | Status::NumericalFailure => {
            return Err(Error::NumericalFailure(format!(
                "relaxation stopped with {:?} after {} iterations (gap {:.2e})",
                sol.status, sol.iterations, sol.rel_gap
            )))
        }
    }
    let x = reduce_rank(&x, constraints, rank_tol)?;
    let eigen = psd_eigendecomposition(&x)?;
    let rank = eigen.rank(rank_tol);
    let value = 0.5 * (model.b_bar.map(|v| C64::new(v, 0.0)) * &x).trace().re;
    let out = SdrOutcome {
        value,
        x,
        eigen,
        rank,
        rank_bound,
        iterations: sol.iterations,
        rel_gap: sol.rel_gap,
    };
    if !out.within_rank_bound() {
        warn!("relaxed solution has rank {} above the bound {}", out.rank, out.rank_bound);
    }
    Ok(out)
}

/// The unconstrained relaxation as a real SDP.
pub fn p2_sdr_problem(model: &ImpedanceModel, profile: &PowerProfile, p: f64) -> Result<SdpProblem> {
    check_profile(model, profile, p)?;
    let mut prob = SdpProblem::new(model.b_bar.clone());
    for (q, need) in demanded(profile, p) {
        prob.push(&model.rank_one_rx[q] * model.kappa[q], Sense::Ge, need);
    }
    Ok(prob)
}

pub fn solve_p2_sdr(
    model: &ImpedanceModel,
    profile: &PowerProfile,
    p: f64,
    rank_tol: f64,
) -> Result<(SdrOutcome, Option<BeamformingSolution>)> {
    let prob = p2_sdr_problem(model, profile, p)?;
    let bound = p2_rank_bound(model.n_rx());
    if prob.constraints.is_empty() {
        return Ok((SdrOutcome::zero(model.n_tx(), bound), Some(BeamformingSolution::zero(model, Method::SdrRank1))));
    }
    if let Some(q) = uncoupled_demand(model, profile, p) {
        return Err(Error::Infeasible(format!("receiver {q} is uncoupled")));
    }
    let sol = solve_tight(|t| prob.solve_with(t))?;
    let x = sol.primal.map(|v| C64::new(v, 0.0));
    let cons: Vec<_> = prob.constraints.iter().map(|c| c.a.map(|v| C64::new(v, 0.0))).collect();
    let out = finish(model, sol, x, &cons, rank_tol, bound)?;
    let extracted = if out.rank == 1 {
        Some(BeamformingSolution::from_slots(
            model,
            vec![Slot {
                tau: 1.0,
                currents: rank_one_currents(&out.eigen),
            }],
            Method::SdrRank1,
            1,
            Some(out.value),
        )?)
    } else {
        None
    };
    Ok((out, extracted))
}

/// `sqrt(lambda_1) u_1`, rotated so its largest entry is real and positive.
pub fn rank_one_currents(eigen: &Eigen) -> Excitation {
    let i = Excitation {
        currents: eigen.scaled_vector(0),
    };
    let k = i.currents.icamax();
    i.align_phase(k, 0.0)
}

/// The peak-constrained relaxation as a Hermitian SDP.
pub fn p1_sdr_problem(
    scenario: &Scenario,
    model: &ImpedanceModel,
    profile: &PowerProfile,
    p: f64,
) -> Result<HermitianSdp> {
    check_profile(model, profile, p)?;
    let n = model.n_tx();
    let mut prob = HermitianSdp::new(model.b_bar.map(|v| C64::new(v, 0.0)));
    for (q, need) in demanded(profile, p) {
        prob.push(model.rank_one_rx[q].map(|v| C64::new(v * model.kappa[q], 0.0)), Sense::Ge, need);
    }
    for k in 0..n {
        prob.push(model.rank_one_tx[k].clone(), Sense::Le, scenario.peak_voltage[k].powi(2));
    }
    for k in 0..n {
        let mut w = DMatrix::zeros(n, n);
        w[(k, k)] = C64::new(1.0, 0.0);
        prob.push(w, Sense::Le, scenario.peak_current[k].powi(2));
    }
    Ok(prob)
}

pub fn solve_p1_sdr(
    scenario: &Scenario,
    model: &ImpedanceModel,
    profile: &PowerProfile,
    p: f64,
    rank_tol: f64,
) -> Result<SdrOutcome> {
    let prob = p1_sdr_problem(scenario, model, profile, p)?;
    let bound = p1_rank_bound(model.n_rx(), model.n_tx());
    if demanded(profile, p).next().is_none() {
        return Ok(SdrOutcome::zero(model.n_tx(), bound));
    }
    if let Some(q) = uncoupled_demand(model, profile, p) {
        return Err(Error::Infeasible(format!("receiver {q} is uncoupled")));
    }
    let sol = solve_tight(|t| prob.solve_with(t))?;
    let x = sol.primal.clone();
    let cons: Vec<_> = prob.constraints.iter().map(|c| c.a.clone()).collect();
    finish(model, sol, x, &cons, rank_tol, bound)
}
