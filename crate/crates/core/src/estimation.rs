//! Training-based estimation of the TX-RX mutual inductances from TX
//! voltage/current measurements and noisy RX current feedback.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{ImpedanceModel, C64};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

const J: C64 = C64::new(0.0, 1.0);

pub const DEFAULT_ACTIVE_VOLTAGE: f64 = 0.75;
pub const DEFAULT_TRIALS: usize = 100_000;
/// Relative imaginary residue tolerated before truncating an estimate.
pub const REALNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    /// Independent `CN(0, V²)` source voltage on every TX in every slot.
    RandomVoltage,
    /// Blocks of `N` slots; TX `n` alone is driven at `V` in slot `n` of
    /// each block, the others are shorted.
    BlockSingleTx,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingProtocol {
    pub mode: TrainingMode,
    pub n_slots: usize,
    /// Volts.
    #[serde(default = "default_voltage")]
    pub active_voltage: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_voltage() -> f64 {
    DEFAULT_ACTIVE_VOLTAGE
}

impl TrainingProtocol {
    pub fn block(n_slots: usize) -> Self {
        Self {
            mode: TrainingMode::BlockSingleTx,
            n_slots,
            active_voltage: DEFAULT_ACTIVE_VOLTAGE,
            seed: 0,
        }
    }

    pub fn random(n_slots: usize, seed: u64) -> Self {
        Self {
            mode: TrainingMode::RandomVoltage,
            n_slots,
            active_voltage: DEFAULT_ACTIVE_VOLTAGE,
            seed,
        }
    }

    /// Source voltages, `N x T`.
    pub fn voltages<R: Rng + ?Sized>(&self, n_tx: usize, rng: &mut R) -> DMatrix<C64> {
        let v = self.active_voltage;
        match self.mode {
            TrainingMode::BlockSingleTx => DMatrix::from_fn(n_tx, self.n_slots, |n, t| {
                if t % n_tx == n {
                    C64::new(v, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            TrainingMode::RandomVoltage => {
                let normal = Normal::new(0.0, v * std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
                DMatrix::from_fn(n_tx, self.n_slots, |_, _| C64::new(normal.sample(rng), normal.sample(rng)))
            }
        }
    }
}

/// Measurements of one training period.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    /// TX voltages, `N x T`.
    pub h: DMatrix<C64>,
    /// TX currents, `N x T`.
    pub y: DMatrix<C64>,
    /// True RX currents, `Q x T`.
    pub z: DMatrix<C64>,
    /// RX currents as fed back, `Q x T`.
    pub z_tilde: DMatrix<C64>,
    /// `diag(r_tx) + jw M̃`
    pub f: DMatrix<C64>,
    /// `(j/w)(H - F Y)`, equal to `M Z`.
    pub g: DMatrix<C64>,
    pub sigma2: f64,
}

/// `diag(r_tx) + jw M̃`
pub fn tx_matrix(scenario: &Scenario) -> DMatrix<C64> {
    let n = scenario.n_tx();
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            C64::new(scenario.tx_resistance[a], 0.0)
        } else {
            J * (scenario.omega * scenario.mutual_tx_tx[(a, b)])
        }
    })
}

fn cscg<R: Rng + ?Sized>(rows: usize, cols: usize, var: f64, rng: &mut R) -> DMatrix<C64> {
    if var == 0.0 {
        return DMatrix::zeros(rows, cols);
    }
    let normal = Normal::new(0.0, (0.5 * var).sqrt()).expect("valid normal");
    DMatrix::from_fn(rows, cols, |_, _| C64::new(normal.sample(rng), normal.sample(rng)))
}

fn noise_variance(z: &DMatrix<C64>, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY || z.is_empty() {
        return 0.0;
    }
    let mean = z.iter().map(|c| c.norm_sqr()).sum::<f64>() / z.len() as f64;
    mean / 10f64.powf(snr_db / 10.0)
}

/// Drive the coupled circuit with the protocol's voltages and record what
/// the controller observes. `snr_db = inf` gives noiseless feedback.
///
/// The noise variance is the mean squared true RX current over the record
/// divided by the linear SNR.
pub fn simulate_training<R: Rng + ?Sized>(
    scenario: &Scenario,
    model: &ImpedanceModel,
    protocol: &TrainingProtocol,
    snr_db: f64,
    rng: &mut R,
) -> Result<TrainingRecord> {
    if protocol.n_slots == 0 {
        return Err(Error::InvalidArgument("training needs at least one slot".into()));
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidArgument("SNR is NaN".into()));
    }
    let n = model.n_tx();
    let h = protocol.voltages(n, rng);
    let lu = model.voltage_map().clone().lu();
    let y = lu.solve(&h).ok_or(Error::Singular("circuit matrix"))?;
    let z = DMatrix::from_fn(model.n_rx(), protocol.n_slots, |q, t| {
        let s: C64 = model.m_vectors[q].iter().zip(y.column(t).iter()).map(|(&m, &i)| i * m).sum();
        J * (model.omega / model.rx_resistance[q]) * s
    });
    let sigma2 = noise_variance(&z, snr_db);
    let z_tilde = &z + cscg(model.n_rx(), protocol.n_slots, sigma2, rng);
    let f = tx_matrix(scenario);
    let g = (&h - &f * &y) * (J / model.omega);
    Ok(TrainingRecord {
        h,
        y,
        z,
        z_tilde,
        f,
        g,
        sigma2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    /// `N x Q`, henries.
    #[serde(serialize_with = "serialize_matrix")]
    pub m_hat: DMatrix<f64>,
    /// `|M - M̂|_F² / |M|_F²` against the scenario's true couplings.
    pub normalized_mse: f64,
    /// LS residual `tr((G - M̂ Z̃)(G - M̂ Z̃)^H)`, when applicable.
    pub squared_error_j: Option<f64>,
    /// Largest imaginary part of the raw estimate relative to its largest
    /// entry, before truncation.
    pub imag_residue: f64,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

pub fn normalized_error(truth: &DMatrix<f64>, est: &DMatrix<f64>) -> f64 {
    (truth - est).norm_squared() / truth.norm_squared()
}

fn truncate_real(raw: &DMatrix<C64>) -> (DMatrix<f64>, f64) {
    let scale = raw.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let imag = raw.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let residue = if scale > 0.0 { imag / scale } else { 0.0 };
    (raw.map(|c| c.re), residue)
}

/// Smallest to largest singular value ratio below which a training
/// matrix counts as singular. Rank deficiency is certain when `Q > N`.
pub const SINGULAR_RATIO: f64 = 1e-12;

fn check_conditioning(a: &DMatrix<C64>, what: &'static str) -> Result<()> {
    let sv = a.clone().svd(false, false).singular_values;
    if !(sv.min() > SINGULAR_RATIO * sv.max()) {
        return Err(Error::Singular(what));
    }
    Ok(())
}

/// `M̂ = G Z^{-1}` from exactly known RX currents over `T = Q` slots.
pub fn estimate_perfect(scenario: &Scenario, record: &TrainingRecord) -> Result<EstimationResult> {
    let (q, t) = record.z.shape();
    if q != t {
        return Err(Error::Dimension {
            context: "training slots for the exact estimator",
            expected: q,
            found: t,
        });
    }
    check_conditioning(&record.z, "RX current matrix")?;
    let inv = record
        .z
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("RX current matrix"))?;
    let (m_hat, imag_residue) = truncate_real(&(&record.g * inv));
    if !m_hat.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular("RX current matrix"));
    }
    Ok(EstimationResult {
        normalized_mse: normalized_error(&scenario.mutual_tx_rx, &m_hat),
        m_hat,
        squared_error_j: None,
        imag_residue,
    })
}

/// Real least-squares fit of `G = M Z̃`:
/// `M̂ = (G Z̃^H + G* Z̃^T)(Z̃ Z̃^H + Z̃* Z̃^T)^{-1}`.
pub fn estimate_ls(scenario: &Scenario, record: &TrainingRecord) -> Result<EstimationResult> {
    let zt = &record.z_tilde;
    let (q, t) = zt.shape();
    if t < q {
        return Err(Error::InvalidArgument(format!("least squares needs T >= Q, got T = {t} < Q = {q}")));
    }
    let num = &record.g * zt.adjoint() + record.g.conjugate() * zt.transpose();
    let gram = zt * zt.adjoint() + zt.conjugate() * zt.transpose();
    check_conditioning(&gram, "RX current Gram matrix")?;
    let inv = gram.try_inverse().ok_or(Error::Singular("RX current Gram matrix"))?;
    let (m_hat, imag_residue) = truncate_real(&(num * inv));
    if !m_hat.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular("RX current Gram matrix"));
    }
    let resid = &record.g - m_hat.map(|v| C64::new(v, 0.0)) * zt;
    let j = (&resid * resid.adjoint()).trace().re;
    Ok(EstimationResult {
        normalized_mse: normalized_error(&scenario.mutual_tx_rx, &m_hat),
        m_hat,
        squared_error_j: Some(j),
        imag_residue,
    })
}

/// One TX-RX pair switched on per slot, `N Q` slots in all, each coupling
/// read off as `Re{(r_n i_n - v_n) / (jw i_rx)}` from a noisy RX current.
pub fn estimate_pairwise_benchmark<R: Rng + ?Sized>(
    scenario: &Scenario,
    voltage: f64,
    snr_db: f64,
    rng: &mut R,
) -> Result<EstimationResult> {
    let (n, q) = scenario.mutual_tx_rx.shape();
    let w = scenario.omega;
    let mut i_tx = DMatrix::<C64>::zeros(n, q);
    let mut i_rx = DMatrix::<C64>::zeros(n, q);
    for a in 0..n {
        for b in 0..q {
            let m = scenario.mutual_tx_rx[(a, b)];
            let r_rx = scenario.rx_resistance(b);
            let i = C64::new(voltage / (scenario.tx_resistance[a] + w * w * m * m / r_rx), 0.0);
            i_tx[(a, b)] = i;
            i_rx[(a, b)] = J * (w * m / r_rx) * i;
        }
    }
    let sigma2 = noise_variance(&i_rx, snr_db);
    let noisy = &i_rx + cscg(n, q, sigma2, rng);
    let m_hat = DMatrix::from_fn(n, q, |a, b| {
        let v = C64::new(voltage, 0.0);
        ((i_tx[(a, b)] * scenario.tx_resistance[a] - v) / (J * w * noisy[(a, b)])).re
    });
    Ok(EstimationResult {
        normalized_mse: normalized_error(&scenario.mutual_tx_rx, &m_hat),
        m_hat,
        squared_error_j: None,
        imag_residue: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Perfect,
    Ls,
    Pairwise,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsePoint {
    pub snr_db: f64,
    pub mse: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub trials: usize,
    pub estimator: Estimator,
    /// Training slots used.
    pub n_slots: usize,
}

/// Average normalized error over independent trials. Trial `k` draws from
/// ChaCha8 stream `(seed, k)`, so results do not depend on the thread count.
pub fn monte_carlo_mse(
    scenario: &Scenario,
    model: &ImpedanceModel,
    estimator: Estimator,
    protocol: &TrainingProtocol,
    snr_db: &[f64],
    trials: usize,
) -> Result<Vec<MsePoint>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let slots = match estimator {
        Estimator::Pairwise => scenario.n_tx() * scenario.n_rx(),
        _ => protocol.n_slots,
    };
    snr_db
        .iter()
        .enumerate()
        .map(|(k, &snr)| {
            let errs: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                    rng.set_stream(trial as u64);
                    let est = match estimator {
                        Estimator::Pairwise => {
                            estimate_pairwise_benchmark(scenario, protocol.active_voltage, snr, &mut rng)?
                        }
                        Estimator::Ls => estimate_ls(scenario, &simulate_training(scenario, model, protocol, snr, &mut rng)?)?,
                        Estimator::Perfect => {
                            estimate_perfect(scenario, &simulate_training(scenario, model, protocol, snr, &mut rng)?)?
                        }
                    };
                    Ok(est.normalized_mse)
                })
                .collect::<Result<_>>()?;
            let n = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / n;
            let var = if errs.len() > 1 {
                errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Ok(MsePoint {
                snr_db: snr,
                mse: mean,
                stderr: (var / n).sqrt(),
                trials,
                estimator,
                n_slots: slots,
            })
        })
        .collect()
}

/// SNR at which a curve sorted by SNR first falls to `level`, by linear
/// interpolation of `log10(mse)` in dB.
pub fn snr_at_mse(points: &[MsePoint], level: f64) -> Option<f64> {
    let target = level.log10();
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0].mse.log10(), w[1].mse.log10());
        if a >= target && b <= target && a != b {
            Some(w[0].snr_db + (w[1].snr_db - w[0].snr_db) * (a - target) / (a - b))
        } else {
            None
        }
    })
}

pub fn write_mse_csv<W: Write>(out: W, points: &[MsePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    w.write_record(["snr_db", "mse", "stderr", "trials", "estimator", "T"]).map_err(err)?;
    for p in points {
        let est = match p.estimator {
            Estimator::Perfect => "perfect",
            Estimator::Ls => "ls",
            Estimator::Pairwise => "pairwise",
        };
        w.write_record([
            p.snr_db.to_string(),
            p.mse.to_string(),
            p.stderr.to_string(),
            p.trials.to_string(),
            est.to_string(),
            p.n_slots.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}

/// Per-slot total TX power `Re{v^H y}/2` of a record, W.
pub fn slot_tx_powers(record: &TrainingRecord) -> DVector<f64> {
    DVector::from_fn(record.h.ncols(), |t, _| 0.5 * record.h.column(t).dotc(&record.y.column(t)).re)
}
