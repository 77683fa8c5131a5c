//! Uncoordinated baseline: every TX carries the same current.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::solution::{BeamformingSolution, Method, Slot};
use crate::circuit::{ActiveConstraints, Excitation, ImpedanceModel};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkTarget {
    /// Deliver this total power, W.
    Power(f64),
    /// Largest common current meeting the active limits.
    MaxFeasible,
}

/// Largest `beta` such that `i = beta 1` meets the active constraints.
pub fn beta_max(scenario: &Scenario, model: &ImpedanceModel, active: ActiveConstraints) -> f64 {
    let n = model.n_tx();
    let ones = DVector::from_element(n, 1.0);
    let mut beta = f64::INFINITY;
    if active.total_power {
        let unit_tx = 0.5 * ones.dot(&(&model.b_bar * &ones));
        if unit_tx > 0.0 {
            beta = beta.min((scenario.total_power_cap / unit_tx).sqrt());
        }
    }
    if active.peaks {
        for k in 0..n {
            let v: f64 = model.b_columns[k].iter().map(|z| z.conj()).sum::<crate::circuit::C64>().norm();
            if v > 0.0 {
                beta = beta.min(scenario.peak_voltage[k] / v);
            }
            beta = beta.min(scenario.peak_current[k]);
        }
    }
    beta
}

/// Delivered sum power per unit `beta²`.
fn unit_delivered(model: &ImpedanceModel) -> f64 {
    (0..model.n_rx())
        .map(|q| model.kappa[q] * model.m_vectors[q].sum().powi(2))
        .sum()
}

pub fn benchmark_uncoordinated(
    scenario: &Scenario,
    model: &ImpedanceModel,
    target: BenchmarkTarget,
    active: ActiveConstraints,
) -> Result<BeamformingSolution> {
    let limit = beta_max(scenario, model, active);
    let beta = match target {
        BenchmarkTarget::MaxFeasible => {
            if !limit.is_finite() {
                return Err(Error::InvalidArgument("benchmark current is unbounded".into()));
            }
            limit
        }
        BenchmarkTarget::Power(p) => {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidArgument(format!("target power must be nonnegative, got {p}")));
            }
            if p == 0.0 {
                0.0
            } else {
                let unit = unit_delivered(model);
                if !(unit > 0.0) {
                    return Err(Error::Infeasible("identical currents deliver no power".into()));
                }
                let beta = (p / unit).sqrt();
                if beta > limit * (1.0 + 1e-9) {
                    return Err(Error::Infeasible(format!(
                        "benchmark cannot deliver {p} W within the limits"
                    )));
                }
                beta
            }
        }
    };
    let currents = Excitation::from_real(&DVector::from_element(model.n_tx(), beta));
    let mut s = BeamformingSolution::from_slots(
        model,
        vec![Slot { tau: 1.0, currents }],
        Method::Benchmark,
        0,
        None,
    )?;
    s.sdr_value = None;
    Ok(s)
}
