//! Primal-dual path-following kernel.
//!
//! Standard form over `K = S^n_+ x R^p_+`:
//!
//! ```text
//! min  <C, X> + c_l' x      s.t.  <A_i, X> + (A_l x)_i = b_i,   X >= 0, x >= 0
//! max  b' y                 s.t.  C - sum_i y_i A_i = Z >= 0,   c_l - A_l' y = z >= 0
//! ```
//!
//! Infeasible start, NT scaling `W Z W = X` on the matrix block, Mehrotra
//! predictor-corrector, separate primal and dual step lengths.

use log::{debug, trace};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::{Status, Tolerances};

#[derive(Debug, Clone)]
pub(crate) struct ConeProgram {
    pub n: usize,
    pub c_s: DMatrix<f64>,
    pub a_s: Vec<DMatrix<f64>>,
    pub c_l: DVector<f64>,
    pub a_l: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct ConeOutcome {
    pub status: Status,
    pub x_s: DMatrix<f64>,
    pub x_l: DVector<f64>,
    pub y: DVector<f64>,
    pub z_s: DMatrix<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub rel_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl ConeProgram {
    fn rows(&self) -> usize {
        self.b.len()
    }

    fn p(&self) -> usize {
        self.c_l.len()
    }

    fn apply(&self, x_s: &DMatrix<f64>, x_l: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.a_l * x_l;
        if self.n > 0 {
            for (i, a) in self.a_s.iter().enumerate() {
                out[i] += a.dot(x_s);
            }
        }
        out
    }

    fn adjoint_s(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        if self.n > 0 {
            for (a, &yi) in self.a_s.iter().zip(y.iter()) {
                out += a * yi;
            }
        }
        out
    }
}

/// Solve after row and objective normalization; results are mapped back to
/// the caller's units.
pub(crate) fn solve(prog: &ConeProgram, tol: &Tolerances) -> ConeOutcome {
    let m = prog.rows();
    let p = prog.p();
    let n = prog.n;

    let mut keep = Vec::with_capacity(m);
    let mut row_scale = vec![0.0; m];
    for i in 0..m {
        let mut sq = prog.a_l.row(i).norm_squared();
        if n > 0 {
            sq += prog.a_s[i].norm_squared();
        }
        let s = sq.sqrt();
        if s == 0.0 {
            if prog.b[i].abs() > 0.0 {
                return trivial_outcome(prog, Status::Infeasible);
            }
            continue;
        }
        row_scale[i] = s;
        keep.push(i);
    }

    let c_norm = (prog.c_s.norm_squared() + prog.c_l.norm_squared()).sqrt();
    let c_scale = if c_norm > 0.0 { c_norm } else { 1.0 };

    let scaled = ConeProgram {
        n,
        c_s: &prog.c_s / c_scale,
        a_s: if n > 0 {
            keep.iter().map(|&i| &prog.a_s[i] / row_scale[i]).collect()
        } else {
            Vec::new()
        },
        c_l: &prog.c_l / c_scale,
        a_l: DMatrix::from_fn(keep.len(), p, |r, c| {
            prog.a_l[(keep[r], c)] / row_scale[keep[r]]
        }),
        b: DVector::from_iterator(keep.len(), keep.iter().map(|&i| prog.b[i] / row_scale[i])),
    };

    let mut out = kernel(&scaled, tol);

    let mut y = DVector::zeros(m);
    for (r, &i) in keep.iter().enumerate() {
        y[i] = out.y[r] * c_scale / row_scale[i];
    }
    out.y = y;
    out.z_s *= c_scale;
    out.primal_obj = prog.c_s.dot(&out.x_s) + prog.c_l.dot(&out.x_l);
    out.dual_obj = prog.b.dot(&out.y);
    out
}

fn trivial_outcome(prog: &ConeProgram, status: Status) -> ConeOutcome {
    ConeOutcome {
        status,
        x_s: DMatrix::zeros(prog.n, prog.n),
        x_l: DVector::zeros(prog.p()),
        y: DVector::zeros(prog.rows()),
        z_s: DMatrix::zeros(prog.n, prog.n),
        primal_obj: f64::NAN,
        dual_obj: f64::NAN,
        rel_gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        iterations: 0,
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Largest `a` with `X + a dX` PSD, given a Cholesky factor of `X`.
fn psd_step(chol: &Cholesky<f64, nalgebra::Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let half = match l.solve_lower_triangular(dx) {
        Some(h) => h,
        None => return 0.0,
    };
    let t = match l.solve_lower_triangular(&half.transpose()) {
        Some(t) => sym(t),
        None => return 0.0,
    };
    let lmin = SymmetricEigen::new(t).eigenvalues.min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn orthant_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&xi, &d)| -xi / d)
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dx_s: DMatrix<f64>,
    dx_l: DVector<f64>,
    dy: DVector<f64>,
    dz_s: DMatrix<f64>,
    dz_l: DVector<f64>,
}

enum SchurFactor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(SchurFactor::Chol(c));
        }
        let reg = 1e-13 * m.diagonal().amax().max(1e-300);
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += reg;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Some(SchurFactor::Chol(c));
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(SchurFactor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            SchurFactor::Chol(c) => Some(c.solve(rhs)),
            SchurFactor::Lu(lu) => lu.solve(rhs),
        }
    }
}

fn kernel(prog: &ConeProgram, tol: &Tolerances) -> ConeOutcome {
    let n = prog.n;
    let p = prog.p();
    let m = prog.rows();
    let dims = (n + p).max(1) as f64;
    let nu = (n + p) as f64;

    let b_norm = prog.b.norm();
    let c_norm = (prog.c_s.norm_squared() + prog.c_l.norm_squared()).sqrt();

    let b_max = prog.b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let xi = 10.0_f64.max(dims.sqrt()).max(dims * (1.0 + b_max) / 2.0);
    let eta = 10.0_f64.max(dims.sqrt()).max(c_norm);

    let mut x_s = DMatrix::<f64>::identity(n, n) * xi;
    let mut z_s = DMatrix::<f64>::identity(n, n) * eta;
    let mut x_l = DVector::from_element(p, xi);
    let mut z_l = DVector::from_element(p, eta);
    let mut y = DVector::<f64>::zeros(m);

    let mut status = Status::NumericalFailure;
    let mut iterations = 0;
    let (mut pobj, mut dobj, mut rel_gap, mut pinf, mut dinf);

    loop {
        let ax = prog.apply(&x_s, &x_l);
        let r_p = &prog.b - &ax;
        let aty_s = prog.adjoint_s(&y);
        let aty_l = prog.a_l.transpose() * &y;
        let r_d = &prog.c_s - &aty_s - &z_s;
        let r_dl = &prog.c_l - &aty_l - &z_l;

        pobj = prog.c_s.dot(&x_s) + prog.c_l.dot(&x_l);
        dobj = prog.b.dot(&y);
        let comp = x_s.dot(&z_s) + x_l.dot(&z_l);
        let mu = if nu > 0.0 { comp / nu } else { 0.0 };
        let denom = 1.0 + pobj.abs() + dobj.abs();
        rel_gap = ((pobj - dobj).abs() / denom).max(comp.abs() / denom);
        pinf = r_p.norm() / (1.0 + b_norm);
        dinf = (r_d.norm_squared() + r_dl.norm_squared()).sqrt() / (1.0 + c_norm);

        trace!(
            "iter {iterations:3} pobj {pobj:+.10e} dobj {dobj:+.10e} gap {rel_gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e}"
        );

        if rel_gap <= tol.gap && pinf <= tol.feasibility && dinf <= tol.feasibility {
            status = Status::Optimal;
            break;
        }
        if dobj > 0.0 {
            let ray = ((&aty_s + &z_s).norm_squared() + (&aty_l + &z_l).norm_squared()).sqrt() / dobj;
            if ray <= tol.infeasibility {
                status = Status::Infeasible;
                break;
            }
        }
        if pobj < 0.0 {
            let ray = ax.norm() / (-pobj);
            if ray <= tol.infeasibility {
                status = Status::Unbounded;
                break;
            }
        }
        if iterations >= tol.max_iterations {
            break;
        }
        iterations += 1;

        // Scaling.
        let (w, g, g_inv, v_vecs, v_vals, chol_x, chol_z) = if n > 0 {
            let chol_x = match Cholesky::new(x_s.clone()) {
                Some(c) => c,
                None => break,
            };
            let chol_z = match Cholesky::new(z_s.clone()) {
                Some(c) => c,
                None => break,
            };
            let l = chol_x.l();
            let s = sym(l.transpose() * &z_s * &l);
            let es = SymmetricEigen::new(s);
            if es.eigenvalues.min() <= 0.0 {
                break;
            }
            let inv_sqrt = DMatrix::from_diagonal(&es.eigenvalues.map(|v| 1.0 / v.sqrt()));
            let lq = &l * &es.eigenvectors;
            let w = sym(&lq * inv_sqrt * lq.transpose());
            let ew = SymmetricEigen::new(w.clone());
            if ew.eigenvalues.min() <= 0.0 {
                break;
            }
            let u = &ew.eigenvectors;
            let g = sym(u * DMatrix::from_diagonal(&ew.eigenvalues.map(f64::sqrt)) * u.transpose());
            let g_inv =
                sym(u * DMatrix::from_diagonal(&ew.eigenvalues.map(|v| 1.0 / v.sqrt())) * u.transpose());
            let v = sym(&g * &z_s * &g);
            let ev = SymmetricEigen::new(v);
            (
                w,
                g,
                g_inv,
                ev.eigenvectors,
                ev.eigenvalues,
                Some(chol_x),
                Some(chol_z),
            )
        } else {
            (
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
                DVector::zeros(0),
                None,
                None,
            )
        };

        let d_l = x_l.component_div(&z_l);

        let mut schur = DMatrix::<f64>::zeros(m, m);
        if n > 0 {
            let wa: Vec<DMatrix<f64>> = prog.a_s.iter().map(|a| &w * a * &w).collect();
            for i in 0..m {
                for j in i..m {
                    let v = prog.a_s[i].dot(&wa[j]);
                    schur[(i, j)] = v;
                    schur[(j, i)] = v;
                }
            }
        }
        if p > 0 {
            let scaled = DMatrix::from_fn(m, p, |r, c| prog.a_l[(r, c)] * d_l[c]);
            schur += scaled * prog.a_l.transpose();
        }
        let factor = match SchurFactor::new(schur) {
            Some(f) => f,
            None => break,
        };

        let wrw = if n > 0 { &w * &r_d * &w } else { DMatrix::zeros(0, 0) };
        let direction = |r_x: &DMatrix<f64>, r_cl: &DVector<f64>| -> Option<Direction> {
            let mut rhs = r_p.clone();
            if n > 0 {
                let t = r_x - &wrw;
                for i in 0..m {
                    rhs[i] -= prog.a_s[i].dot(&t);
                }
            }
            if p > 0 {
                let t = r_cl.component_div(&z_l) - d_l.component_mul(&r_dl);
                rhs -= &prog.a_l * t;
            }
            let dy = factor.solve(&rhs)?;
            let dz_s = &r_d - prog.adjoint_s(&dy);
            let dx_s = if n > 0 {
                sym(r_x - &w * &dz_s * &w)
            } else {
                DMatrix::zeros(0, 0)
            };
            let dz_l = &r_dl - prog.a_l.transpose() * &dy;
            let dx_l = (r_cl - x_l.component_mul(&dz_l)).component_div(&z_l);
            if !dy.iter().all(|v| v.is_finite()) {
                return None;
            }
            Some(Direction {
                dx_s,
                dx_l,
                dy,
                dz_s,
                dz_l,
            })
        };

        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = orthant_step(&x_l, &d.dx_l);
            let mut ad = orthant_step(&z_l, &d.dz_l);
            if let (Some(cx), Some(cz)) = (&chol_x, &chol_z) {
                ap = ap.min(psd_step(cx, &d.dx_s));
                ad = ad.min(psd_step(cz, &d.dz_s));
            }
            (ap, ad)
        };

        // Predictor.
        let r_x_aff = -&x_s;
        let r_cl_aff = -x_l.component_mul(&z_l);
        let aff = match direction(&r_x_aff, &r_cl_aff) {
            Some(d) => d,
            None => break,
        };
        let (ap_max, ad_max) = steps(&aff);
        let ap = ap_max.min(1.0);
        let ad = ad_max.min(1.0);
        let mu_aff = if nu > 0.0 {
            let xs = &x_s + &aff.dx_s * ap;
            let zs = &z_s + &aff.dz_s * ad;
            let xl = &x_l + &aff.dx_l * ap;
            let zl = &z_l + &aff.dz_l * ad;
            (xs.dot(&zs) + xl.dot(&zl)) / nu
        } else {
            0.0
        };
        let sigma = if mu > 0.0 {
            (mu_aff / mu).max(0.0).powi(3).min(1.0)
        } else {
            0.0
        };

        // Corrector.
        let r_x = if n > 0 {
            let dxt = &g_inv * &aff.dx_s * &g_inv;
            let dzt = &g * &aff.dz_s * &g;
            let vdiag = DMatrix::from_diagonal(&v_vals);
            let v = &v_vecs * &vdiag * v_vecs.transpose();
            let mut rt = DMatrix::<f64>::identity(n, n) * (2.0 * sigma * mu) - (&v * &v) * 2.0;
            rt -= &dxt * &dzt + &dzt * &dxt;
            let mut rh = v_vecs.transpose() * rt * &v_vecs;
            for i in 0..n {
                for j in 0..n {
                    rh[(i, j)] /= v_vals[i] + v_vals[j];
                }
            }
            let st = &v_vecs * rh * v_vecs.transpose();
            sym(&g * st * &g)
        } else {
            DMatrix::zeros(0, 0)
        };
        let r_cl = DVector::from_element(p, sigma * mu)
            - x_l.component_mul(&z_l)
            - aff.dx_l.component_mul(&aff.dz_l);
        let dir = match direction(&r_x, &r_cl) {
            Some(d) => d,
            None => break,
        };
        let (ap_max, ad_max) = steps(&dir);
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);

        x_s = sym(&x_s + &dir.dx_s * ap);
        x_l += &dir.dx_l * ap;
        y += &dir.dy * ad;
        z_s = sym(&z_s + &dir.dz_s * ad);
        z_l += &dir.dz_l * ad;

        if ap < 1e-12 && ad < 1e-12 {
            debug!("step lengths collapsed at iteration {iterations}");
            break;
        }
    }

    debug!(
        "ipm finished: {status:?} after {iterations} iterations (gap {rel_gap:.2e}, pinf {pinf:.2e}, dinf {dinf:.2e})"
    );

    ConeOutcome {
        status,
        x_s,
        x_l,
        y,
        z_s,
        primal_obj: pobj,
        dual_obj: dobj,
        rel_gap,
        primal_residual: pinf,
        dual_residual: dinf,
        iterations,
    }
}
