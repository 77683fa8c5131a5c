use nalgebra::{DMatrix, DVector};

use crate::ipm::{self, ConeProgram};
use crate::{ConicError, ConicSolution, Sense, Tolerances};

/// A linear constraint `<a, X> sense rhs` with symmetric `a`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub a: DMatrix<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(a: DMatrix<f64>, sense: Sense, rhs: f64) -> Self {
        Self { a, sense, rhs }
    }
}

/// `min 1/2 tr(C X)  s.t.  tr(A_i X) sense_i b_i,  X >= 0` over real symmetric `X`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub objective: DMatrix<f64>,
    pub constraints: Vec<Constraint>,
}

pub type SdpSolution = ConicSolution<DMatrix<f64>>;

pub(crate) const SYMMETRY_TOL: f64 = 1e-9;

pub(crate) fn check_symmetric(m: &DMatrix<f64>, n: usize, context: &'static str) -> Result<(), ConicError> {
    if m.nrows() != m.ncols() {
        return Err(ConicError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() != n {
        return Err(ConicError::Dimension {
            expected: n,
            found: m.nrows(),
            context,
        });
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(ConicError::NonFinite(context));
    }
    let asym = (m - m.transpose()).amax();
    let scale = m.amax().max(1.0);
    if asym > SYMMETRY_TOL * scale {
        return Err(ConicError::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

impl SdpProblem {
    pub fn new(objective: DMatrix<f64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.nrows()
    }

    pub fn push(&mut self, a: DMatrix<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint::new(a, sense, rhs));
        self
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.objective.nrows();
        check_symmetric(&self.objective, n, "objective")?;
        if self.constraints.is_empty() {
            return Err(ConicError::NoConstraints);
        }
        for c in &self.constraints {
            check_symmetric(&c.a, n, "constraint matrix")?;
            if !c.rhs.is_finite() {
                return Err(ConicError::NonFinite("constraint rhs"));
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<SdpSolution, ConicError> {
        self.solve_with(&Tolerances::default())
    }

    pub fn solve_with(&self, tol: &Tolerances) -> Result<SdpSolution, ConicError> {
        self.validate()?;
        let n = self.dim();
        let m = self.constraints.len();
        let slack_rows: Vec<usize> = (0..m)
            .filter(|&i| self.constraints[i].sense != Sense::Eq)
            .collect();
        let p = slack_rows.len();
        let mut a_l = DMatrix::zeros(m, p);
        for (col, &i) in slack_rows.iter().enumerate() {
            a_l[(i, col)] = match self.constraints[i].sense {
                Sense::Ge => -1.0,
                Sense::Le => 1.0,
                Sense::Eq => unreachable!(),
            };
        }
        let prog = ConeProgram {
            n,
            c_s: (&self.objective + self.objective.transpose()) * 0.25,
            a_s: self
                .constraints
                .iter()
                .map(|c| (&c.a + c.a.transpose()) * 0.5)
                .collect(),
            c_l: DVector::zeros(p),
            a_l,
            b: DVector::from_iterator(m, self.constraints.iter().map(|c| c.rhs)),
        };
        let out = ipm::solve(&prog, tol);
        Ok(ConicSolution {
            status: out.status,
            value: out.primal_obj,
            dual_value: out.dual_obj,
            primal: out.x_s,
            duals: out.y.iter().copied().collect(),
            rel_gap: out.rel_gap,
            primal_residual: out.primal_residual,
            dual_residual: out.dual_residual,
            iterations: out.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Status;

    #[test]
    fn one_by_one() {
        // min x / 2 s.t. x >= 2
        let mut p = SdpProblem::new(DMatrix::from_element(1, 1, 1.0));
        p.push(DMatrix::from_element(1, 1, 1.0), Sense::Ge, 2.0);
        let s = p.solve().unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal[(0, 0)] - 2.0).abs() < 1e-7);
        assert!((s.value - 1.0).abs() < 1e-7);
        assert!((s.duals[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_asymmetric() {
        let mut p = SdpProblem::new(DMatrix::identity(2, 2));
        p.push(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), Sense::Ge, 1.0);
        assert!(matches!(p.solve(), Err(ConicError::NotHermitian { .. })));
    }

    #[test]
    fn infeasible_detected() {
        // X >= 0 and trace(X) <= -1
        let mut p = SdpProblem::new(DMatrix::identity(2, 2));
        p.push(DMatrix::identity(2, 2), Sense::Le, -1.0);
        let s = p.solve().unwrap();
        assert_eq!(s.status, Status::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -X11 / 2 s.t. X22 = 1
        let mut p = SdpProblem::new(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]));
        p.push(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]), Sense::Eq, 1.0);
        let s = p.solve().unwrap();
        assert_eq!(s.status, Status::Unbounded);
    }

    #[test]
    fn zero_row_with_nonzero_rhs_is_infeasible() {
        let mut p = SdpProblem::new(DMatrix::identity(2, 2));
        p.push(DMatrix::zeros(2, 2), Sense::Eq, 1.0);
        assert_eq!(p.solve().unwrap().status, Status::Infeasible);
    }

    #[test]
    fn max_eigenvalue() {
        // min -tr(C X) s.t. tr X = 1 gives -lambda_max(C)
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let lmax = nalgebra::SymmetricEigen::new(c.clone()).eigenvalues.max();
        let mut p = SdpProblem::new(-c * 2.0);
        p.push(DMatrix::identity(3, 3), Sense::Eq, 1.0);
        let s = p.solve().unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value + lmax).abs() < 1e-7, "{} vs {}", s.value, -lmax);
    }
}
