use nalgebra::DVector;

use super::solution::{BeamformingSolution, Method, Slot};
use crate::circuit::{Excitation, ImpedanceModel};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Unit direction `R^{-1} m_q / |R^{-1} m_q|` of the single-receiver
/// optimum without peak constraints. `None` when RX `q` is uncoupled.
pub fn mrt_direction(scenario: &Scenario, q: usize) -> Option<DVector<f64>> {
    let m = scenario.m_vector(q);
    let d = m.component_div(&scenario.tx_resistance);
    let norm = d.norm();
    (norm > 0.0).then(|| d / norm)
}

/// Minimum TX power currents delivering `p` watts to the only receiver,
/// with peak limits ignored.
pub fn solve_p2_closed_form_single_rx(
    scenario: &Scenario,
    model: &ImpedanceModel,
    p: f64,
) -> Result<BeamformingSolution> {
    if scenario.n_rx() != 1 {
        return Err(Error::InvalidArgument(format!(
            "closed form needs exactly one receiver, found {}",
            scenario.n_rx()
        )));
    }
    if !(p >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative target power {p}")));
    }
    if p == 0.0 {
        let mut s = BeamformingSolution::zero(model, Method::ClosedForm);
        s.sdr_value = None;
        return Ok(s);
    }
    let u = mrt_direction(scenario, 0).ok_or_else(|| Error::Infeasible("receiver is uncoupled".into()))?;
    let mu = model.m_vectors[0].dot(&u);
    let beta = (p / model.kappa[0]).sqrt() / mu;
    let i = Excitation::from_real(&(u * beta));
    BeamformingSolution::from_slots(model, vec![Slot { tau: 1.0, currents: i }], Method::ClosedForm, 1, None)
}
