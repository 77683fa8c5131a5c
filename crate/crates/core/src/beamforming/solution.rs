use serde::{Deserialize, Serialize};

use crate::circuit::{ActiveConstraints, Excitation, ImpedanceModel, SlackReport};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// How a solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    SdrRank1,
    TimeSharing,
    Randomization,
    Benchmark,
}

/// One time slot of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slot {
    pub tau: f64,
    pub currents: Excitation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamformingSolution {
    pub slots: Vec<Slot>,
    /// Time-averaged total delivered power, W.
    pub achieved_sum_power: f64,
    /// Time-averaged total TX power, W.
    pub tx_power: f64,
    /// Time-averaged power delivered to each RX, W.
    pub per_rx_power: Vec<f64>,
    pub method: Method,
    /// Numerical rank of the relaxed solution; 0 when no relaxation was
    /// solved or the relaxed optimum is zero.
    pub sdr_rank: usize,
    /// Optimal value of the relaxation when one was solved.
    pub sdr_value: Option<f64>,
}

impl BeamformingSolution {
    pub fn from_slots(
        model: &ImpedanceModel,
        slots: Vec<Slot>,
        method: Method,
        sdr_rank: usize,
        sdr_value: Option<f64>,
    ) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidArgument("empty schedule".into()));
        }
        let mut per_rx = vec![0.0; model.n_rx()];
        let mut tx = 0.0;
        for s in &slots {
            if !(s.tau > 0.0) {
                return Err(Error::InvalidArgument(format!("nonpositive time fraction {}", s.tau)));
            }
            for (acc, p) in per_rx.iter_mut().zip(model.delivered_powers(&s.currents)?) {
                *acc += s.tau * p;
            }
            tx += s.tau * model.tx_total_power(&s.currents)?;
        }
        Ok(Self {
            slots,
            achieved_sum_power: per_rx.iter().sum(),
            tx_power: tx,
            per_rx_power: per_rx,
            method,
            sdr_rank,
            sdr_value,
        })
    }

    /// A single zero-current slot.
    pub fn zero(model: &ImpedanceModel, method: Method) -> Self {
        Self {
            slots: vec![Slot {
                tau: 1.0,
                currents: Excitation::zeros(model.n_tx()),
            }],
            achieved_sum_power: 0.0,
            tx_power: 0.0,
            per_rx_power: vec![0.0; model.n_rx()],
            method,
            sdr_rank: 0,
            sdr_value: Some(0.0),
        }
    }

    pub fn slacks(&self, scenario: &Scenario, model: &ImpedanceModel) -> Result<Vec<SlackReport>> {
        self.slots
            .iter()
            .map(|s| model.constraint_slacks(scenario, &s.currents))
            .collect()
    }

    /// Every slot meets the active constraints to `rel_tol` of each limit.
    pub fn is_feasible(
        &self,
        scenario: &Scenario,
        model: &ImpedanceModel,
        active: ActiveConstraints,
        rel_tol: f64,
    ) -> Result<bool> {
        Ok(self
            .slacks(scenario, model)?
            .iter()
            .all(|r| r.is_feasible(scenario, active, rel_tol)))
    }

    pub fn efficiency(&self, model: &ImpedanceModel) -> Result<f64> {
        let schedule: Vec<(Excitation, f64)> =
            self.slots.iter().map(|s| (s.currents.clone(), s.tau)).collect();
        model.efficiency(&schedule)
    }
}
