//! System description and its JSON file format.
//!
//! Files carry explicit units on every physical quantity:
//!
//! ```json
//! { "omega": { "value": 42.6e6, "unit": "rad/s" },
//!   "mutual_tx_rx": { "value": [[0.9468]], "unit": "uH" }, ... }
//! ```
//!
//! Everything is converted to SI on load. Serialization always writes SI
//! units, so load, save and load again reproduces the same bits.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ScenarioError;

pub const DEFAULT_PEAK_VOLTAGE: f64 = 50.0 * std::f64::consts::SQRT_2;
pub const DEFAULT_PEAK_CURRENT: f64 = 5.0 * std::f64::consts::SQRT_2;

/// Relative asymmetry of the TX-TX inductance matrix that is silently
/// averaged away on load.
pub const SYMMETRIZE_TOL: f64 = 1e-6;

const DESK_JSON: &str = include_str!("../data/desk.json");

/// Resistance used in the delivered-power formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadAccounting {
    /// Power dissipated in the whole RX resistance `r_rx,p + r_rx,l`.
    TotalRxResistance,
    /// Power dissipated in the load only.
    #[default]
    LoadOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    /// Angular frequency, rad/s.
    pub omega: f64,
    pub tx_resistance: DVector<f64>,
    pub rx_parasitic: DVector<f64>,
    pub rx_load: DVector<f64>,
    /// `M[n, q]`, henries.
    pub mutual_tx_rx: DMatrix<f64>,
    /// Symmetric with zero diagonal, henries.
    pub mutual_tx_tx: DMatrix<f64>,
    /// Stored for reference; no model uses RX-RX coupling.
    pub mutual_rx_rx: Option<DMatrix<f64>>,
    pub tx_self_inductance: Option<DVector<f64>>,
    pub rx_self_inductance: Option<DVector<f64>>,
    pub total_power_cap: f64,
    pub peak_voltage: DVector<f64>,
    pub peak_current: DVector<f64>,
    pub load_accounting: LoadAccounting,
}

/// A failed scenario invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Short stable name of the violated condition.
    pub condition: &'static str,
    /// Field path, e.g. `tx_resistance[2]`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.condition, self.field, self.message)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Quantity<T> {
    value: T,
    unit: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Entries {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    omega: Quantity<f64>,
    tx_resistance: Quantity<Entries>,
    rx_parasitic: Quantity<Entries>,
    rx_load: Quantity<Entries>,
    mutual_tx_rx: Quantity<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mutual_tx_tx: Option<Quantity<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mutual_rx_rx: Option<Quantity<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tx_self_inductance: Option<Quantity<Entries>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rx_self_inductance: Option<Quantity<Entries>>,
    total_power_cap: Quantity<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    peak_voltage: Option<Quantity<Entries>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    peak_current: Option<Quantity<Entries>>,
    #[serde(default)]
    load_accounting: LoadAccounting,
}

#[derive(Clone, Copy)]
enum Dim {
    Inductance,
    Resistance,
    Frequency,
    Power,
    Voltage,
    Current,
}

fn unit_factor(dim: Dim, unit: &str, field: &str) -> Result<f64, ScenarioError> {
    use std::f64::consts::TAU;
    let f = match (dim, unit) {
        (Dim::Inductance, "H") => 1.0,
        (Dim::Inductance, "mH") => 1e-3,
        (Dim::Inductance, "uH" | "µH" | "μH") => 1e-6,
        (Dim::Inductance, "nH") => 1e-9,
        (Dim::Resistance, "ohm" | "Ohm" | "Ω") => 1.0,
        (Dim::Resistance, "mohm" | "mΩ") => 1e-3,
        (Dim::Resistance, "kohm" | "kΩ") => 1e3,
        (Dim::Frequency, "rad/s") => 1.0,
        (Dim::Frequency, "Hz") => TAU,
        (Dim::Frequency, "kHz") => TAU * 1e3,
        (Dim::Frequency, "MHz") => TAU * 1e6,
        (Dim::Power, "W") => 1.0,
        (Dim::Power, "mW") => 1e-3,
        (Dim::Power, "kW") => 1e3,
        (Dim::Voltage, "V") => 1.0,
        (Dim::Voltage, "mV") => 1e-3,
        (Dim::Current, "A") => 1.0,
        (Dim::Current, "mA") => 1e-3,
        _ => {
            return Err(ScenarioError::UnknownUnit {
                field: field.to_string(),
                unit: unit.to_string(),
            })
        }
    };
    Ok(f)
}

fn scalar(q: &Quantity<f64>, dim: Dim, field: &str) -> Result<f64, ScenarioError> {
    Ok(q.value * unit_factor(dim, &q.unit, field)?)
}

fn entries(
    q: &Quantity<Entries>,
    len: usize,
    dim: Dim,
    field: &str,
) -> Result<DVector<f64>, ScenarioError> {
    let k = unit_factor(dim, &q.unit, field)?;
    match &q.value {
        Entries::Scalar(v) => Ok(DVector::from_element(len, v * k)),
        Entries::Vector(v) if v.len() == len => {
            Ok(DVector::from_iterator(len, v.iter().map(|x| x * k)))
        }
        Entries::Vector(v) => Err(ScenarioError::Shape {
            field: field.to_string(),
            detail: format!("expected {len} entries, found {}", v.len()),
        }),
    }
}

fn matrix(
    q: &Quantity<Vec<Vec<f64>>>,
    rows: usize,
    cols: usize,
    field: &str,
) -> Result<DMatrix<f64>, ScenarioError> {
    let k = unit_factor(Dim::Inductance, &q.unit, field)?;
    if q.value.len() != rows {
        return Err(ScenarioError::Shape {
            field: field.to_string(),
            detail: format!("expected {rows} rows, found {}", q.value.len()),
        });
    }
    for (i, row) in q.value.iter().enumerate() {
        if row.len() != cols {
            return Err(ScenarioError::Shape {
                field: format!("{field}[{i}]"),
                detail: format!("expected {cols} columns, found {}", row.len()),
            });
        }
    }
    Ok(DMatrix::from_fn(rows, cols, |r, c| q.value[r][c] * k))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

fn si<T>(value: T, unit: &str) -> Quantity<T> {
    Quantity {
        value,
        unit: unit.to_string(),
    }
}

fn si_vec(v: &DVector<f64>, unit: &str) -> Quantity<Entries> {
    si(Entries::Vector(v.iter().copied().collect()), unit)
}

impl Scenario {
    /// The bundled five-TX, four-RX table scenario.
    pub fn desk() -> Scenario {
        Scenario::from_json_str(DESK_JSON).expect("bundled scenario is valid")
    }

    pub fn n_tx(&self) -> usize {
        self.tx_resistance.len()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_load.len()
    }

    /// `r_rx,q = r_rx,p,q + r_rx,l,q`
    pub fn rx_resistance(&self, q: usize) -> f64 {
        self.rx_parasitic[q] + self.rx_load[q]
    }

    /// Fraction of RX power counted as delivered.
    pub fn delivered_fraction(&self, q: usize) -> f64 {
        match self.load_accounting {
            LoadAccounting::TotalRxResistance => 1.0,
            LoadAccounting::LoadOnly => self.rx_load[q] / self.rx_resistance(q),
        }
    }

    /// Column `q` of the TX-RX inductance matrix.
    pub fn m_vector(&self, q: usize) -> DVector<f64> {
        self.mutual_tx_rx.column(q).into_owned()
    }

    /// Keep only the listed receivers, in the given order.
    pub fn select_rx(&self, rx: &[usize]) -> Scenario {
        let pick = |v: &DVector<f64>| DVector::from_iterator(rx.len(), rx.iter().map(|&q| v[q]));
        let mut s = self.clone();
        s.rx_parasitic = pick(&self.rx_parasitic);
        s.rx_load = pick(&self.rx_load);
        s.mutual_tx_rx =
            DMatrix::from_fn(self.n_tx(), rx.len(), |n, k| self.mutual_tx_rx[(n, rx[k])]);
        s.mutual_rx_rx = self
            .mutual_rx_rx
            .as_ref()
            .map(|m| DMatrix::from_fn(rx.len(), rx.len(), |a, b| m[(rx[a], rx[b])]));
        s.rx_self_inductance = self.rx_self_inductance.as_ref().map(pick);
        s
    }

    /// Parse without invariant checks. Shapes and units are still enforced.
    pub fn parse_unchecked(json: &str) -> Result<Scenario, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(json);
        let file: ScenarioFile =
            serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        Self::from_file(file)
    }

    /// Parse, symmetrize the TX-TX matrix and check every invariant.
    pub fn from_json_str(json: &str) -> Result<Scenario, ScenarioError> {
        let mut s = Self::parse_unchecked(json)?;
        s.symmetrize();
        let v = s.violations();
        if v.is_empty() {
            Ok(s)
        } else {
            Err(ScenarioError::Invalid(v))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    fn from_file(f: ScenarioFile) -> Result<Scenario, ScenarioError> {
        let n = f.mutual_tx_rx.value.len();
        if n == 0 {
            return Err(ScenarioError::Shape {
                field: "mutual_tx_rx".into(),
                detail: "at least one TX row is required".into(),
            });
        }
        let q = f.mutual_tx_rx.value[0].len();
        let mutual_tx_rx = matrix(&f.mutual_tx_rx, n, q, "mutual_tx_rx")?;
        let mutual_tx_tx = match &f.mutual_tx_tx {
            Some(m) => matrix(m, n, n, "mutual_tx_tx")?,
            None => DMatrix::zeros(n, n),
        };
        let mutual_rx_rx = f
            .mutual_rx_rx
            .as_ref()
            .map(|m| matrix(m, q, q, "mutual_rx_rx"))
            .transpose()?;
        Ok(Scenario {
            name: f.name,
            omega: scalar(&f.omega, Dim::Frequency, "omega")?,
            tx_resistance: entries(&f.tx_resistance, n, Dim::Resistance, "tx_resistance")?,
            rx_parasitic: entries(&f.rx_parasitic, q, Dim::Resistance, "rx_parasitic")?,
            rx_load: entries(&f.rx_load, q, Dim::Resistance, "rx_load")?,
            mutual_tx_rx,
            mutual_tx_tx,
            mutual_rx_rx,
            tx_self_inductance: f
                .tx_self_inductance
                .as_ref()
                .map(|v| entries(v, n, Dim::Inductance, "tx_self_inductance"))
                .transpose()?,
            rx_self_inductance: f
                .rx_self_inductance
                .as_ref()
                .map(|v| entries(v, q, Dim::Inductance, "rx_self_inductance"))
                .transpose()?,
            total_power_cap: scalar(&f.total_power_cap, Dim::Power, "total_power_cap")?,
            peak_voltage: match &f.peak_voltage {
                Some(v) => entries(v, n, Dim::Voltage, "peak_voltage")?,
                None => DVector::from_element(n, DEFAULT_PEAK_VOLTAGE),
            },
            peak_current: match &f.peak_current {
                Some(v) => entries(v, n, Dim::Current, "peak_current")?,
                None => DVector::from_element(n, DEFAULT_PEAK_CURRENT),
            },
            load_accounting: f.load_accounting,
        })
    }

    fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            omega: si(self.omega, "rad/s"),
            tx_resistance: si_vec(&self.tx_resistance, "ohm"),
            rx_parasitic: si_vec(&self.rx_parasitic, "ohm"),
            rx_load: si_vec(&self.rx_load, "ohm"),
            mutual_tx_rx: si(rows_of(&self.mutual_tx_rx), "H"),
            mutual_tx_tx: Some(si(rows_of(&self.mutual_tx_tx), "H")),
            mutual_rx_rx: self.mutual_rx_rx.as_ref().map(|m| si(rows_of(m), "H")),
            tx_self_inductance: self.tx_self_inductance.as_ref().map(|v| si_vec(v, "H")),
            rx_self_inductance: self.rx_self_inductance.as_ref().map(|v| si_vec(v, "H")),
            total_power_cap: si(self.total_power_cap, "W"),
            peak_voltage: Some(si_vec(&self.peak_voltage, "V")),
            peak_current: Some(si_vec(&self.peak_current, "A")),
            load_accounting: self.load_accounting,
        }
    }

    /// Pretty JSON in SI units.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario serializes")
    }

    /// SHA-256 of the compact SI serialization, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(&self.to_file()).expect("scenario serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    /// Average `mutual_tx_tx` with its transpose when the asymmetry is
    /// within [`SYMMETRIZE_TOL`]. Larger asymmetry is left for
    /// [`Scenario::violations`] to report.
    pub fn symmetrize(&mut self) {
        let m = &self.mutual_tx_tx;
        let scale = m.amax();
        if scale == 0.0 {
            return;
        }
        if (m - m.transpose()).amax() <= SYMMETRIZE_TOL * scale {
            self.mutual_tx_tx = (m + m.transpose()) * 0.5;
        }
    }

    /// Every failed invariant, in a fixed order.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        fn push(out: &mut Vec<Violation>, condition: &'static str, field: String, message: String) {
            out.push(Violation {
                condition,
                field,
                message,
            })
        }
        let n = self.n_tx();

        let dims = [
            ("rx_parasitic", self.rx_parasitic.len(), self.n_rx()),
            ("peak_voltage", self.peak_voltage.len(), n),
            ("peak_current", self.peak_current.len(), n),
            ("mutual_tx_rx", self.mutual_tx_rx.nrows(), n),
            ("mutual_tx_rx", self.mutual_tx_rx.ncols(), self.n_rx()),
            ("mutual_tx_tx", self.mutual_tx_tx.nrows(), n),
            ("mutual_tx_tx", self.mutual_tx_tx.ncols(), n),
        ];
        for (field, found, expected) in dims {
            if found != expected {
                push(
                    &mut out,
                    "dimensions",
                    field.to_string(),
                    format!("expected {expected}, found {found}"),
                );
            }
        }
        if !out.is_empty() {
            return out;
        }

        if !(self.omega.is_finite() && self.omega > 0.0) {
            push(
                &mut out,
                "positive_frequency",
                "omega".into(),
                format!("omega = {}", self.omega),
            );
        }
        let positive = [
            ("tx_resistance", &self.tx_resistance),
            ("rx_parasitic", &self.rx_parasitic),
            ("rx_load", &self.rx_load),
        ];
        for (field, v) in positive {
            for (i, &x) in v.iter().enumerate() {
                if !(x.is_finite() && x > 0.0) {
                    push(
                        &mut out,
                        "positive_resistance",
                        format!("{field}[{i}]"),
                        format!("{x} ohm"),
                    );
                }
            }
        }
        if !(self.total_power_cap.is_finite() && self.total_power_cap > 0.0) {
            push(
                &mut out,
                "positive_power_cap",
                "total_power_cap".into(),
                format!("{} W", self.total_power_cap),
            );
        }
        for (field, v) in [
            ("peak_voltage", &self.peak_voltage),
            ("peak_current", &self.peak_current),
        ] {
            for (i, &x) in v.iter().enumerate() {
                if !(x.is_finite() && x > 0.0) {
                    push(
                        &mut out,
                        "positive_peak_limit",
                        format!("{field}[{i}]"),
                        format!("{x}"),
                    );
                }
            }
        }
        for (field, m) in [
            ("mutual_tx_rx", &self.mutual_tx_rx),
            ("mutual_tx_tx", &self.mutual_tx_tx),
        ] {
            if let Some(k) = m.iter().position(|x| !x.is_finite()) {
                let (r, c) = (k % m.nrows(), k / m.nrows());
                push(
                    &mut out,
                    "finite_inductance",
                    format!("{field}[{r}][{c}]"),
                    format!("{}", m[(r, c)]),
                );
            }
        }
        let mt = &self.mutual_tx_tx;
        let asym = (mt - mt.transpose()).amax();
        if asym > SYMMETRIZE_TOL * mt.amax() {
            push(
                &mut out,
                "reciprocity",
                "mutual_tx_tx".into(),
                format!("max |M - M^T| = {asym:.3e} H"),
            );
        }
        for i in 0..n {
            if mt[(i, i)] != 0.0 {
                push(
                    &mut out,
                    "zero_diagonal",
                    format!("mutual_tx_tx[{i}][{i}]"),
                    format!("{} H", mt[(i, i)]),
                );
            }
        }
        let budget: f64 = self
            .peak_voltage
            .iter()
            .zip(self.peak_current.iter())
            .map(|(v, a)| 0.5 * v * a)
            .sum();
        if !(budget > self.total_power_cap) {
            push(
                &mut out,
                "non_triviality",
                "total_power_cap".into(),
                format!(
                    "sum of V_n A_n / 2 = {budget} W does not exceed P_T = {} W",
                    self.total_power_cap
                ),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table() {
        let s = Scenario::desk();
        assert_eq!((s.n_tx(), s.n_rx()), (5, 4));
        assert!((s.mutual_tx_tx[(0, 4)] - 6.5741e-6).abs() < 1e-18);
        assert!((s.mutual_tx_rx[(0, 0)] - 0.9468e-6).abs() < 1e-18);
        assert!((s.rx_resistance(0) - 10.5367).abs() < 1e-12);
        assert_eq!(s.load_accounting, LoadAccounting::LoadOnly);
    }

    #[test]
    fn missing_peaks_get_defaults() {
        let json = r#"{
            "omega": {"value": 6.78, "unit": "MHz"},
            "tx_resistance": {"value": 13.44, "unit": "ohm"},
            "rx_parasitic": {"value": [0.5], "unit": "ohm"},
            "rx_load": {"value": [10], "unit": "ohm"},
            "mutual_tx_rx": {"value": [[1.0], [2.0]], "unit": "uH"},
            "total_power_cap": {"value": 100, "unit": "W"}
        }"#;
        let s = Scenario::from_json_str(json).unwrap();
        assert_eq!(s.peak_voltage.as_slice(), &[DEFAULT_PEAK_VOLTAGE; 2]);
        assert_eq!(s.peak_current.as_slice(), &[DEFAULT_PEAK_CURRENT; 2]);
        assert!((s.omega - 6.78e6 * std::f64::consts::TAU).abs() < 1e-3);
        assert_eq!(s.mutual_tx_tx, DMatrix::zeros(2, 2));
    }

    #[test]
    fn negative_resistance_rejected() {
        let json = DESK_JSON.replace(
            "\"rx_load\": { \"value\": [10.0,",
            "\"rx_load\": { \"value\": [-10.0,",
        );
        match Scenario::from_json_str(&json) {
            Err(ScenarioError::Invalid(v)) => {
                assert_eq!(v[0].condition, "positive_resistance");
                assert_eq!(v[0].field, "rx_load[0]");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_paths() {
        let json = DESK_JSON.replace("\"value\": 42.6e6", "\"value\": \"fast\"");
        match Scenario::from_json_str(&json) {
            Err(ScenarioError::Schema { path, .. }) => assert!(path.starts_with("omega"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
        let json = DESK_JSON.replace("\"unit\": \"rad/s\"", "\"unit\": \"furlong\"");
        assert!(matches!(
            Scenario::from_json_str(&json),
            Err(ScenarioError::UnknownUnit { .. })
        ));
    }

    #[test]
    fn asymmetric_coupling_rejected_small_asymmetry_averaged() {
        let mut s = Scenario::desk();
        s.mutual_tx_tx[(0, 1)] *= 1.0 + 1e-9;
        s.symmetrize();
        assert!(s.violations().is_empty());
        assert_eq!(s.mutual_tx_tx[(0, 1)], s.mutual_tx_tx[(1, 0)]);
        s.mutual_tx_tx[(0, 1)] *= 1.1;
        s.symmetrize();
        assert_eq!(s.violations()[0].condition, "reciprocity");
    }

    #[test]
    fn non_triviality_named() {
        let mut s = Scenario::desk();
        s.total_power_cap = 1e4;
        let v = s.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].condition, "non_triviality");
    }

    #[test]
    fn roundtrip_is_bit_identical() {
        let s = Scenario::desk();
        let back = Scenario::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.hash(), back.hash());
    }

    #[test]
    fn select_rx_keeps_columns() {
        let s = Scenario::desk().select_rx(&[1]);
        assert_eq!(s.n_rx(), 1);
        assert!((s.mutual_tx_rx[(1, 0)] - 0.5642e-6).abs() < 1e-18);
    }
}
