use nalgebra::{DMatrix, DVector};

use crate::ipm::{self, ConeProgram};
use crate::{ConicError, ConicSolution, Sense, Tolerances};

/// `coeffs . x sense rhs`
#[derive(Debug, Clone)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }
}

/// `min c . x  s.t.  rows,  x_j >= l_j` where `lower_bounds[j] == None`
/// marks a free variable.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LinearRow>,
    pub lower_bounds: Vec<Option<f64>>,
}

pub type LpSolution = ConicSolution<Vec<f64>>;

impl LpProblem {
    /// All variables nonnegative.
    pub fn nonnegative(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            rows: Vec::new(),
            lower_bounds: vec![Some(0.0); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.rows.push(LinearRow::new(coeffs, sense, rhs));
        self
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.num_vars();
        if self.lower_bounds.len() != n {
            return Err(ConicError::Dimension {
                expected: n,
                found: self.lower_bounds.len(),
                context: "lower bounds",
            });
        }
        if !self.objective.iter().all(|v| v.is_finite()) {
            return Err(ConicError::NonFinite("objective"));
        }
        if self.lower_bounds.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ConicError::NonFinite("lower bounds"));
        }
        if self.rows.is_empty() {
            return Err(ConicError::NoConstraints);
        }
        for r in &self.rows {
            if r.coeffs.len() != n {
                return Err(ConicError::Dimension {
                    expected: n,
                    found: r.coeffs.len(),
                    context: "row coefficients",
                });
            }
            if !r.rhs.is_finite() || !r.coeffs.iter().all(|v| v.is_finite()) {
                return Err(ConicError::NonFinite("row"));
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution, ConicError> {
        self.solve_with(&Tolerances::default())
    }

    pub fn solve_with(&self, tol: &Tolerances) -> Result<LpSolution, ConicError> {
        self.validate()?;
        let m = self.rows.len();

        // Column map: each original variable becomes one shifted column or a
        // pair (plus, minus) when free.
        let mut cols: Vec<(usize, f64)> = Vec::new();
        for (j, lb) in self.lower_bounds.iter().enumerate() {
            cols.push((j, 1.0));
            if lb.is_none() {
                cols.push((j, -1.0));
            }
        }
        let slack_rows: Vec<usize> = (0..m).filter(|&i| self.rows[i].sense != Sense::Eq).collect();
        let p = cols.len() + slack_rows.len();

        let mut a_l = DMatrix::zeros(m, p);
        let mut c_l = DVector::zeros(p);
        let mut b = DVector::zeros(m);
        for (k, &(j, sign)) in cols.iter().enumerate() {
            c_l[k] = sign * self.objective[j];
            for i in 0..m {
                a_l[(i, k)] = sign * self.rows[i].coeffs[j];
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            let shift: f64 = row
                .coeffs
                .iter()
                .zip(&self.lower_bounds)
                .map(|(a, lb)| a * lb.unwrap_or(0.0))
                .sum();
            b[i] = row.rhs - shift;
        }
        for (s, &i) in slack_rows.iter().enumerate() {
            a_l[(i, cols.len() + s)] = match self.rows[i].sense {
                Sense::Ge => -1.0,
                Sense::Le => 1.0,
                Sense::Eq => unreachable!(),
            };
        }

        let prog = ConeProgram {
            n: 0,
            c_s: DMatrix::zeros(0, 0),
            a_s: Vec::new(),
            c_l,
            a_l,
            b,
        };
        let out = ipm::solve(&prog, tol);

        let mut x: Vec<f64> = self.lower_bounds.iter().map(|lb| lb.unwrap_or(0.0)).collect();
        for (k, &(j, sign)) in cols.iter().enumerate() {
            x[j] += sign * out.x_l[k];
        }
        let value: f64 = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let const_obj: f64 = self
            .objective
            .iter()
            .zip(&self.lower_bounds)
            .map(|(c, lb)| c * lb.unwrap_or(0.0))
            .sum();
        Ok(ConicSolution {
            status: out.status,
            value,
            dual_value: out.dual_obj + const_obj,
            primal: x,
            duals: out.y.iter().copied().collect(),
            rel_gap: out.rel_gap,
            primal_residual: out.primal_residual,
            dual_residual: out.dual_residual,
            iterations: out.iterations,
        })
    }
}
