//! Phasor model of N TX coils and Q RX coils at resonance.
//!
//! With TX currents `i`, the RX currents are `i_rx,q = (jw / r_rx,q) m_q' i`
//! and the TX source voltages are `v = (B̄ + jwM̃) i = [b_1 .. b_N]^H i`,
//! where `B̄ = R + w² sum_q m_q m_q' / r_rx,q`. Amplitudes are peak values,
//! so the power of a current `i` through `r` is `|i|² r / 2`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scenario::{Scenario, SYMMETRIZE_TOL};

pub type C64 = Complex<f64>;

const J: C64 = C64::new(0.0, 1.0);

/// TX current phasors, amperes.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub currents: DVector<C64>,
}

impl Excitation {
    pub fn new(currents: DVector<C64>) -> Result<Self> {
        if currents
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "excitation has non-finite entries".into(),
            ));
        }
        Ok(Self { currents })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            currents: DVector::zeros(n),
        }
    }

    pub fn from_real(i: &DVector<f64>) -> Self {
        Self {
            currents: i.map(|x| C64::new(x, 0.0)),
        }
    }

    pub fn len(&self) -> usize {
        self.currents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.currents.is_empty()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            currents: &self.currents * c,
        }
    }

    /// Rotate so that entry `k` has phase `phase`.
    pub fn align_phase(&self, k: usize, phase: f64) -> Self {
        let z = self.currents[k];
        if z.norm() == 0.0 {
            return self.clone();
        }
        self.scaled(C64::from_polar(1.0, phase - z.arg()))
    }
}

/// Serialized as a list of `[re, im]` pairs.
impl Serialize for Excitation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.currents.len()))?;
        for z in self.currents.iter() {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

/// Matrices derived from a scenario, shared by every optimization.
#[derive(Debug, Clone)]
pub struct ImpedanceModel {
    pub omega: f64,
    /// `B̄`, real symmetric PSD, ohms.
    pub b_bar: DMatrix<f64>,
    /// `B̂ = -w M̃`, ohms.
    pub b_hat: DMatrix<f64>,
    /// `b_n`, column `n` of `B̄ + j B̂`.
    pub b_columns: Vec<DVector<C64>>,
    /// `B_n = b_n b_n^H`
    pub rank_one_tx: Vec<DMatrix<C64>>,
    /// `M_q = m_q m_q'`, henries².
    pub rank_one_rx: Vec<DMatrix<f64>>,
    /// `m_q`, henries.
    pub m_vectors: Vec<DVector<f64>>,
    /// `r_rx,q`
    pub rx_resistance: Vec<f64>,
    /// Delivered power is `kappa_q |m_q' i|²`.
    pub kappa: Vec<f64>,
    /// `(B̄ + jB̂)^H`, maps currents to voltages.
    voltage_map: DMatrix<C64>,
}

/// Headroom on each constraint of the power region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackReport {
    /// `V_n - |v_n|`
    pub voltage: Vec<f64>,
    /// `A_n - |i_n|`
    pub current: Vec<f64>,
    /// `P_T - p_tx`
    pub total_power: f64,
}

/// Which constraints a slack check enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ActiveConstraints {
    pub total_power: bool,
    pub peaks: bool,
}

impl ActiveConstraints {
    pub const ALL: ActiveConstraints = ActiveConstraints {
        total_power: true,
        peaks: true,
    };
    pub const NO_PEAKS: ActiveConstraints = ActiveConstraints {
        total_power: true,
        peaks: false,
    };
}

impl SlackReport {
    /// Feasible when every active slack is at least `-rel_tol` times its
    /// limit.
    pub fn is_feasible(
        &self,
        scenario: &Scenario,
        active: ActiveConstraints,
        rel_tol: f64,
    ) -> bool {
        self.worst_relative(scenario, active) >= -rel_tol
    }

    /// Smallest slack divided by its limit over the active constraints.
    pub fn worst_relative(&self, scenario: &Scenario, active: ActiveConstraints) -> f64 {
        let mut worst = f64::INFINITY;
        if active.total_power {
            worst = worst.min(self.total_power / scenario.total_power_cap);
        }
        if active.peaks {
            for (s, lim) in self.voltage.iter().zip(scenario.peak_voltage.iter()) {
                worst = worst.min(s / lim);
            }
            for (s, lim) in self.current.iter().zip(scenario.peak_current.iter()) {
                worst = worst.min(s / lim);
            }
        }
        worst
    }
}

pub fn build_impedance(scenario: &Scenario) -> Result<ImpedanceModel> {
    let n = scenario.n_tx();
    let q_count = scenario.n_rx();
    let w = scenario.omega;
    let mt = &scenario.mutual_tx_tx;
    if mt.nrows() != n || mt.ncols() != n {
        return Err(Error::Dimension {
            context: "mutual_tx_tx",
            expected: n,
            found: mt.nrows(),
        });
    }
    if scenario.mutual_tx_rx.nrows() != n || scenario.mutual_tx_rx.ncols() != q_count {
        return Err(Error::Dimension {
            context: "mutual_tx_rx",
            expected: n,
            found: scenario.mutual_tx_rx.nrows(),
        });
    }
    if mt
        .iter()
        .chain(scenario.mutual_tx_rx.iter())
        .any(|x| !x.is_finite())
    {
        return Err(Error::InvalidArgument("non-finite inductance".into()));
    }
    if (mt - mt.transpose()).amax() > SYMMETRIZE_TOL * mt.amax() {
        return Err(Error::InvalidArgument(
            "mutual_tx_tx is not symmetric".into(),
        ));
    }

    let m_vectors: Vec<DVector<f64>> = (0..q_count).map(|q| scenario.m_vector(q)).collect();
    let rank_one_rx: Vec<DMatrix<f64>> = m_vectors.iter().map(|m| m * m.transpose()).collect();
    let rx_resistance: Vec<f64> = (0..q_count).map(|q| scenario.rx_resistance(q)).collect();
    let kappa: Vec<f64> = (0..q_count)
        .map(|q| w * w / (2.0 * rx_resistance[q]) * scenario.delivered_fraction(q))
        .collect();

    let mut b_bar = DMatrix::from_diagonal(&scenario.tx_resistance);
    for (mq, &r) in rank_one_rx.iter().zip(&rx_resistance) {
        b_bar += mq * (w * w / r);
    }
    let b_bar = (&b_bar + b_bar.transpose()) * 0.5;
    let mut b_hat = -((mt + mt.transpose()) * (0.5 * w));
    b_hat.fill_diagonal(0.0);

    let b = DMatrix::from_fn(n, n, |r, c| C64::new(b_bar[(r, c)], b_hat[(r, c)]));
    let b_columns: Vec<DVector<C64>> = (0..n).map(|k| b.column(k).into_owned()).collect();
    let rank_one_tx = b_columns.iter().map(|bn| bn * bn.adjoint()).collect();

    Ok(ImpedanceModel {
        omega: w,
        b_bar,
        b_hat,
        b_columns,
        rank_one_tx,
        rank_one_rx,
        m_vectors,
        rx_resistance,
        kappa,
        voltage_map: b.adjoint(),
    })
}

impl ImpedanceModel {
    pub fn n_tx(&self) -> usize {
        self.b_bar.nrows()
    }

    pub fn n_rx(&self) -> usize {
        self.m_vectors.len()
    }

    fn check(&self, exc: &Excitation) -> Result<()> {
        if exc.len() != self.n_tx() {
            return Err(Error::Dimension {
                context: "excitation",
                expected: self.n_tx(),
                found: exc.len(),
            });
        }
        Ok(())
    }

    /// `m_q' i`
    fn coupling(&self, q: usize, i: &DVector<C64>) -> C64 {
        self.m_vectors[q]
            .iter()
            .zip(i.iter())
            .map(|(&m, &x)| x * m)
            .sum()
    }

    pub fn rx_currents(&self, exc: &Excitation) -> Result<DVector<C64>> {
        self.check(exc)?;
        let w = self.omega;
        Ok(DVector::from_fn(self.n_rx(), |q, _| {
            J * (w / self.rx_resistance[q]) * self.coupling(q, &exc.currents)
        }))
    }

    /// Power delivered to RX `q` under the scenario's load accounting.
    pub fn delivered_power(&self, exc: &Excitation, q: usize) -> Result<f64> {
        self.check(exc)?;
        if q >= self.n_rx() {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: self.n_rx(),
            });
        }
        Ok(self.kappa[q] * self.coupling(q, &exc.currents).norm_sqr())
    }

    pub fn delivered_powers(&self, exc: &Excitation) -> Result<Vec<f64>> {
        (0..self.n_rx())
            .map(|q| self.delivered_power(exc, q))
            .collect()
    }

    /// `v_n = b_n^H i`
    pub fn tx_voltages(&self, exc: &Excitation) -> Result<DVector<C64>> {
        self.check(exc)?;
        Ok(&self.voltage_map * &exc.currents)
    }

    /// `p_tx = i^H B̄ i / 2`
    pub fn tx_total_power(&self, exc: &Excitation) -> Result<f64> {
        self.check(exc)?;
        let i = &exc.currents;
        let bi = self.b_bar.map(|x| C64::new(x, 0.0)) * i;
        Ok(0.5 * i.dotc(&bi).re)
    }

    /// `Re{v_n^* i_n} / 2` for each TX.
    pub fn per_tx_power(&self, exc: &Excitation) -> Result<Vec<f64>> {
        let v = self.tx_voltages(exc)?;
        Ok(v.iter()
            .zip(exc.currents.iter())
            .map(|(v, i)| 0.5 * (v.conj() * i).re)
            .collect())
    }

    /// TX currents that a voltage vector drives through the coupled circuit.
    pub fn currents_for_voltages(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.n_tx() {
            return Err(Error::Dimension {
                context: "voltages",
                expected: self.n_tx(),
                found: v.len(),
            });
        }
        self.voltage_map
            .clone()
            .lu()
            .solve(v)
            .ok_or(Error::Singular("circuit matrix"))
    }

    pub fn voltage_map(&self) -> &DMatrix<C64> {
        &self.voltage_map
    }

    pub fn constraint_slacks(&self, scenario: &Scenario, exc: &Excitation) -> Result<SlackReport> {
        let v = self.tx_voltages(exc)?;
        Ok(SlackReport {
            voltage: v
                .iter()
                .zip(scenario.peak_voltage.iter())
                .map(|(v, lim)| lim - v.norm())
                .collect(),
            current: exc
                .currents
                .iter()
                .zip(scenario.peak_current.iter())
                .map(|(i, lim)| lim - i.norm())
                .collect(),
            total_power: scenario.total_power_cap - self.tx_total_power(exc)?,
        })
    }

    /// Ratio of time-averaged delivered power to time-averaged TX power.
    pub fn efficiency(&self, schedule: &[(Excitation, f64)]) -> Result<f64> {
        let mut delivered = 0.0;
        let mut consumed = 0.0;
        for (exc, tau) in schedule {
            if !(*tau >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "negative time fraction {tau}"
                )));
            }
            delivered += tau * self.delivered_powers(exc)?.iter().sum::<f64>();
            consumed += tau * self.tx_total_power(exc)?;
        }
        let total: f64 = schedule.iter().map(|(_, t)| t).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "time fractions sum to {total}"
            )));
        }
        if consumed <= 0.0 {
            return Err(Error::ZeroTxPower);
        }
        Ok(delivered / consumed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_tx_no_rx() {
        let mut s = Scenario::desk().select_rx(&[]);
        s.tx_resistance = DVector::from_element(1, 13.44);
        s.mutual_tx_rx = DMatrix::zeros(1, 0);
        s.mutual_tx_tx = DMatrix::zeros(1, 1);
        s.peak_voltage = DVector::from_element(1, 70.0);
        s.peak_current = DVector::from_element(1, 7.0);
        let m = build_impedance(&s).unwrap();
        assert_eq!(m.b_bar, DMatrix::from_element(1, 1, 13.44));
        assert_eq!(m.b_hat, DMatrix::zeros(1, 1));
        let e = Excitation::from_real(&DVector::from_element(1, 1.0));
        assert_eq!(m.efficiency(&[(e, 1.0)]).unwrap(), 0.0);
    }

    #[test]
    fn table_b_hat_entry() {
        let m = build_impedance(&Scenario::desk()).unwrap();
        let expected = -42.6e6 * 6.5741e-6;
        assert!((m.b_hat[(0, 4)] - expected).abs() < 1e-9);
        assert!((m.b_hat[(0, 4)] + 280.06).abs() < 0.01);
    }

    #[test]
    fn b_bar_diagonal_by_hand() {
        let mut s = Scenario::desk().select_rx(&[1]);
        s.tx_resistance = DVector::from_element(2, 13.44);
        s.mutual_tx_rx = DMatrix::from_column_slice(2, 1, &[0.5642e-6, 0.1526e-6]);
        s.mutual_tx_tx = DMatrix::zeros(2, 2);
        s.peak_voltage = DVector::from_element(2, 70.0);
        s.peak_current = DVector::from_element(2, 7.0);
        let m = build_impedance(&s).unwrap();
        let w: f64 = 42.6e6;
        let expected = 13.44 + w * w * (0.5642e-6_f64).powi(2) / 10.5367;
        assert!((m.b_bar[(0, 0)] - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn identical_current_on_rx2() {
        let s = Scenario::desk().select_rx(&[1]);
        let m = build_impedance(&s).unwrap();
        let e = Excitation::from_real(&DVector::from_element(5, 0.0631));
        let irx = m.rx_currents(&e).unwrap()[0].norm();
        // |i_rx| = w * 0.0631 * sum(m) / r_rx
        let by_hand = 42.6e6 * 0.0631 * 0.79488e-6 / 10.5367;
        assert!((irx - by_hand).abs() < 1e-12);
        assert!((irx - 0.2028).abs() < 5e-4);
        let p = m.delivered_power(&e, 0).unwrap();
        assert!((p - 0.5 * irx * irx * 10.0).abs() < 1e-12);
        assert!((p - 0.2056).abs() < 1e-3);
    }

    #[test]
    fn zero_and_scaling() {
        let m = build_impedance(&Scenario::desk()).unwrap();
        let z = Excitation::zeros(5);
        assert!(m.rx_currents(&z).unwrap().iter().all(|x| x.norm() == 0.0));
        assert_eq!(m.tx_total_power(&z).unwrap(), 0.0);
        assert!(m.tx_voltages(&z).unwrap().iter().all(|x| x.norm() == 0.0));
        let e = Excitation::new(DVector::from_vec(vec![
            c(0.1, 0.2),
            c(-0.3, 0.0),
            c(0.0, 0.1),
            c(0.2, -0.1),
            c(0.5, 0.5),
        ]))
        .unwrap();
        let r1 = m.rx_currents(&e).unwrap();
        let r2 = m.rx_currents(&e.scaled(c(2.0, 0.0))).unwrap();
        assert_eq!(r2, r1 * c(2.0, 0.0));
        let p1 = m.delivered_power(&e, 2).unwrap();
        let p3 = m.delivered_power(&e.scaled(c(0.0, 3.0)), 2).unwrap();
        assert!((p3 - 9.0 * p1).abs() < 1e-12 * p3);
        assert!(m.delivered_power(&e, 4).is_err());
    }

    #[test]
    fn slacks_at_zero_and_boundary() {
        let s = Scenario::desk();
        let m = build_impedance(&s).unwrap();
        let r = m.constraint_slacks(&s, &Excitation::zeros(5)).unwrap();
        assert_eq!(
            r.voltage,
            s.peak_voltage.iter().copied().collect::<Vec<_>>()
        );
        assert_eq!(
            r.current,
            s.peak_current.iter().copied().collect::<Vec<_>>()
        );
        assert_eq!(r.total_power, s.total_power_cap);
        let mut i = DVector::zeros(5);
        i[0] = s.peak_current[0];
        let r = m.constraint_slacks(&s, &Excitation::from_real(&i)).unwrap();
        assert_eq!(r.current[0], 0.0);
    }

    #[test]
    fn singular_frequency_rejected_by_efficiency() {
        let m = build_impedance(&Scenario::desk()).unwrap();
        assert_eq!(
            m.efficiency(&[(Excitation::zeros(5), 1.0)]),
            Err(Error::ZeroTxPower)
        );
    }
}
