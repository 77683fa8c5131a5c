//! Mutual inductance of circular coils by the Neumann double line integral.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;
pub const DEFAULT_QUADRATURE_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoilGeometry {
    /// Meters.
    pub center: [f64; 3],
    /// Meters.
    pub radius: f64,
    pub turns: u32,
    /// Normal of the winding plane; winding is counterclockwise about it.
    #[serde(default = "vertical")]
    pub axis: [f64; 3],
}

fn vertical() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl CoilGeometry {
    pub fn horizontal(center: [f64; 3], radius: f64, turns: u32) -> Self {
        Self {
            center,
            radius,
            turns,
            axis: vertical(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("coil radius must be positive, got {}", self.radius)));
        }
        if self.turns == 0 {
            return Err(Error::InvalidArgument("coil needs at least one turn".into()));
        }
        let a = Vector3::from(self.axis);
        if !(a.norm() > 0.0 && a.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidArgument(format!("invalid coil axis {:?}", self.axis)));
        }
        if self.center.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid coil center {:?}", self.center)));
        }
        Ok(())
    }

    /// Sample points and tangent elements `dl` at `k` equally spaced angles.
    fn discretize(&self, k: usize) -> Vec<(Vector3<f64>, Vector3<f64>)> {
        let axis = Vector3::from(self.axis).normalize();
        let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = (helper - axis * axis.dot(&helper)).normalize();
        let e2 = axis.cross(&e1);
        let c = Vector3::from(self.center);
        let dt = std::f64::consts::TAU / k as f64;
        (0..k)
            .map(|i| {
                let t = i as f64 * dt;
                let (s, co) = t.sin_cos();
                (
                    c + (e1 * co + e2 * s) * self.radius,
                    (e2 * co - e1 * s) * (self.radius * dt),
                )
            })
            .collect()
    }
}

/// `N_a N_b mu_0 / 4 pi` times the double loop integral of
/// `dl_a . dl_b / |r_a - r_b|`, trapezoidal in both angles.
pub fn mutual_inductance(a: &CoilGeometry, b: &CoilGeometry, points: usize) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    if points < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 quadrature points, got {points}")));
    }
    let pa = a.discretize(points);
    let pb = b.discretize(points);
    let scale = a.radius.min(b.radius) * 1e-9;
    let mut sum = 0.0;
    for (ra, dla) in &pa {
        for (rb, dlb) in &pb {
            let d = (ra - rb).norm();
            if d <= scale {
                return Err(Error::InvalidArgument("coils intersect or coincide".into()));
            }
            sum += dla.dot(dlb) / d;
        }
    }
    Ok(sum * MU_0 / (4.0 * std::f64::consts::PI) * f64::from(a.turns) * f64::from(b.turns))
}

/// TX and RX coil positions of a layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoilLayout {
    pub tx: Vec<CoilGeometry>,
    pub rx: Vec<CoilGeometry>,
}

impl CoilLayout {
    /// Five charging coils under a table (four corners and the center), four
    /// phone coils 10 cm above.
    pub fn charging_table() -> Self {
        let tx = [[0.7, 0.7], [-0.7, 0.7], [-0.7, -0.7], [0.7, -0.7], [0.0, 0.0]]
            .iter()
            .map(|&[x, y]| CoilGeometry::horizontal([x, y, 0.0], 0.1, 250))
            .collect();
        let rx = [[0.7, 0.5], [-0.3, 0.6], [-0.2, -0.1], [0.3, -0.3]]
            .iter()
            .map(|&[x, y]| CoilGeometry::horizontal([x, y, 0.1], 0.02, 50))
            .collect();
        Self { tx, rx }
    }

    /// `(M, M̃)`: TX-RX couplings `N x Q` and TX-TX couplings `N x N` with
    /// zero diagonal, henries.
    pub fn inductances(&self, points: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let n = self.tx.len();
        let mut m = DMatrix::zeros(n, self.rx.len());
        for (i, t) in self.tx.iter().enumerate() {
            for (q, r) in self.rx.iter().enumerate() {
                m[(i, q)] = mutual_inductance(t, r, points)?;
            }
        }
        let mut mt = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = mutual_inductance(&self.tx[i], &self.tx[j], points)?;
                mt[(i, j)] = v;
                mt[(j, i)] = v;
            }
        }
        Ok((m, mt))
    }
}
