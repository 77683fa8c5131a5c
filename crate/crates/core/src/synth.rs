//! Synthetic scenarios for tests and benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::scenario::{LoadAccounting, Scenario, DEFAULT_PEAK_CURRENT, DEFAULT_PEAK_VOLTAGE};

const UH: f64 = 1e-6;

/// A scenario with the given TX resistances and TX-RX couplings, no TX-TX
/// coupling, 10 ohm loads with 0.5367 ohm parasitics and the default limits.
pub fn simple(omega: f64, tx_resistance: DVector<f64>, mutual_tx_rx: DMatrix<f64>) -> Scenario {
    let n = tx_resistance.len();
    let q = mutual_tx_rx.ncols();
    Scenario {
        name: Some("synthetic".into()),
        omega,
        tx_resistance,
        rx_parasitic: DVector::from_element(q, 0.5367),
        rx_load: DVector::from_element(q, 10.0),
        mutual_tx_rx,
        mutual_tx_tx: DMatrix::zeros(n, n),
        mutual_rx_rx: None,
        tx_self_inductance: None,
        rx_self_inductance: None,
        total_power_cap: 100.0,
        peak_voltage: DVector::from_element(n, DEFAULT_PEAK_VOLTAGE),
        peak_current: DVector::from_element(n, DEFAULT_PEAK_CURRENT),
        load_accounting: LoadAccounting::LoadOnly,
    }
}

/// Random desk-scale scenario: couplings log-uniform in magnitude between
/// 0.005 and 1.5 uH with random sign, TX-TX couplings up to 7 uH, TX
/// resistances in [5, 20] ohm.
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, n_tx: usize, n_rx: usize) -> Scenario {
    let coupling = |rng: &mut R| {
        let mag = (rng.random_range(0.005f64.ln()..1.5f64.ln())).exp();
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        sign * mag * UH
    };
    let m = DMatrix::from_fn(n_tx, n_rx, |_, _| coupling(rng));
    let r = DVector::from_fn(n_tx, |_, _| rng.random_range(5.0..20.0));
    let mut s = simple(42.6e6, r, m);
    for a in 0..n_tx {
        for b in (a + 1)..n_tx {
            let v = rng.random_range(-7.0..7.0) * UH;
            s.mutual_tx_tx[(a, b)] = v;
            s.mutual_tx_tx[(b, a)] = v;
        }
    }
    s
}
