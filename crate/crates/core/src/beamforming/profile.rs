use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `sum(alpha) = 1` for [`PowerProfile::new`].
pub const PROFILE_SUM_TOL: f64 = 1e-12;

/// Share of the total delivered power assigned to each receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PowerProfile {
    alpha: Vec<f64>,
}

impl PowerProfile {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("empty power profile".into()));
        }
        if alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "profile entries must be nonnegative: {alpha:?}"
            )));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > PROFILE_SUM_TOL {
            return Err(Error::InvalidArgument(format!("profile sums to {sum}, not 1")));
        }
        Ok(Self { alpha })
    }

    /// Scale nonnegative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "profile weights must be nonnegative: {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidArgument("profile weights sum to zero".into()));
        }
        Ok(Self {
            alpha: weights.iter().map(|w| w / sum).collect(),
        })
    }

    /// All power to receiver `q` out of `len`.
    pub fn single(q: usize, len: usize) -> Self {
        let mut alpha = vec![0.0; len];
        alpha[q] = 1.0;
        Self { alpha }
    }

    /// Two-user grid `alpha_1 = k / g`, `k = 0..=g`.
    pub fn two_user_grid(g: usize) -> Vec<Self> {
        let g = g.max(1);
        (0..=g)
            .map(|k| {
                let a = k as f64 / g as f64;
                Self {
                    alpha: vec![a, 1.0 - a],
                }
            })
            .collect()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PowerProfile::new(vec![0.5, 0.5]).is_ok());
        assert!(PowerProfile::new(vec![0.5, 0.6]).is_err());
        assert!(PowerProfile::new(vec![1.5, -0.5]).is_err());
        let p = PowerProfile::normalized(vec![0.1227, 0.03615, 0.7836, 0.05752]).unwrap();
        assert!((p.alpha().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(PowerProfile::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn grid_has_g_plus_one_points() {
        let g = PowerProfile::two_user_grid(2);
        assert_eq!(g.len(), 3);
        assert_eq!(g[1].alpha(), &[0.5, 0.5]);
        assert_eq!(g[2].alpha(), &[1.0, 0.0]);
    }
}
