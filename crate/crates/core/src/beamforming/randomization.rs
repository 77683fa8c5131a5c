//! Gaussian randomization of a relaxed solution into single-slot currents.

use magbeam_conic::psd_eigendecomposition;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::profile::PowerProfile;
use super::solution::{BeamformingSolution, Method, Slot};
use crate::circuit::{ActiveConstraints, Excitation, ImpedanceModel, C64};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub const DEFAULT_DRAWS: usize = 4000;
pub const DEFAULT_SEED: u64 = 0x6d61_6762;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizationOptions {
    pub draws: usize,
    pub seed: u64,
    pub active: ActiveConstraints,
}

impl Default for RandomizationOptions {
    fn default() -> Self {
        Self {
            draws: DEFAULT_DRAWS,
            seed: DEFAULT_SEED,
            active: ActiveConstraints::ALL,
        }
    }
}

/// Feasible range `[lower, upper]` of `mu²` for scaled constraints
/// `mu² a_k >= need_k` and `mu² c_j <= cap_j`.
///
/// Returns `None` when a demand has `a_k = 0` or the range is empty.
pub fn scale_interval(demands: &[(f64, f64)], caps: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut lower = 0.0f64;
    for &(a, need) in demands {
        if need <= 0.0 {
            continue;
        }
        if !(a > 0.0) {
            return None;
        }
        lower = lower.max(need / a);
    }
    let mut upper = f64::INFINITY;
    for &(c, cap) in caps {
        if c > 0.0 {
            upper = upper.min(cap / c);
        }
    }
    (lower <= upper).then_some((lower, upper))
}

/// Draw `D` Gaussian vectors shaped by `X`, scale each to the cheapest
/// feasible point and keep the best.
///
/// Draw `d` uses its own ChaCha8 stream `(seed, d)`, so the result does
/// not depend on thread scheduling.
pub fn randomization_extract(
    scenario: &Scenario,
    model: &ImpedanceModel,
    x: &DMatrix<C64>,
    profile: &PowerProfile,
    p: f64,
    opts: &RandomizationOptions,
) -> Result<BeamformingSolution> {
    if opts.draws == 0 {
        return Err(Error::InvalidArgument("randomization needs at least one draw".into()));
    }
    if profile.len() != model.n_rx() {
        return Err(Error::Dimension {
            context: "power profile",
            expected: model.n_rx(),
            found: profile.len(),
        });
    }
    let n = model.n_tx();
    let eigen = psd_eigendecomposition(x)?;
    let shape = DMatrix::from_fn(n, n, |r, c| eigen.vectors[(r, c)] * eigen.values[c].max(0.0).sqrt());
    let b_bar = model.b_bar.map(|v| C64::new(v, 0.0));
    let needs: Vec<f64> = profile.alpha().iter().map(|a| a * p).collect();

    let evaluate = |d: usize| -> Option<(f64, DVector<C64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(d as u64);
        let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
        let w = DVector::from_fn(n, |_, _| C64::new(normal.sample(&mut rng), normal.sample(&mut rng)));
        let y = &shape * w;
        let demands: Vec<(f64, f64)> = (0..model.n_rx())
            .map(|q| {
                let s: C64 = model.m_vectors[q].iter().zip(y.iter()).map(|(&m, &v)| v * m).sum();
                (model.kappa[q] * s.norm_sqr(), needs[q])
            })
            .collect();
        let mut caps = Vec::new();
        if opts.active.peaks {
            for k in 0..n {
                caps.push((model.b_columns[k].dotc(&y).norm_sqr(), scenario.peak_voltage[k].powi(2)));
                caps.push((y[k].norm_sqr(), scenario.peak_current[k].powi(2)));
            }
        }
        let (mu2, _) = scale_interval(&demands, &caps)?;
        let cost = 0.5 * mu2 * y.dotc(&(&b_bar * &y)).re;
        Some((cost, y * C64::new(mu2.sqrt(), 0.0)))
    };

    let best = (0..opts.draws)
        .into_par_iter()
        .filter_map(|d| evaluate(d).map(|(cost, i)| (cost, d, i)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (_, _, currents) = best.ok_or_else(|| Error::Infeasible("no randomized draw is feasible".into()))?;
    let rank = eigen.rank(magbeam_conic::DEFAULT_RANK_TOL);
    BeamformingSolution::from_slots(
        model,
        vec![Slot {
            tau: 1.0,
            currents: Excitation { currents },
        }],
        Method::Randomization,
        rank,
        None,
    )
}
