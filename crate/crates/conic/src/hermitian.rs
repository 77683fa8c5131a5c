use nalgebra::{Complex, DMatrix};

use crate::sdp::{SdpProblem, SYMMETRY_TOL};
use crate::{ConicError, ConicSolution, Sense, Tolerances};

type C64 = Complex<f64>;

/// Real embedding `[Re -Im; Im Re]` of a complex square matrix.
pub fn embed_hermitian(a: &DMatrix<C64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`embed_hermitian`], averaging the redundant blocks.
pub fn extract_hermitian(x: &DMatrix<f64>) -> DMatrix<C64> {
    let n = x.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(i + n, j + n)]);
        let im = 0.5 * (x[(i + n, j)] - x[(i, j + n)]);
        C64::new(re, im)
    })
}

/// `Re tr(a X) sense rhs` with Hermitian `a`.
#[derive(Debug, Clone)]
pub struct HermitianConstraint {
    pub a: DMatrix<C64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min 1/2 Re tr(C X)  s.t.  Re tr(A_i X) sense_i b_i,  X >= 0` over Hermitian `X`.
#[derive(Debug, Clone)]
pub struct HermitianSdp {
    pub objective: DMatrix<C64>,
    pub constraints: Vec<HermitianConstraint>,
}

fn check_hermitian(m: &DMatrix<C64>, n: usize, context: &'static str) -> Result<(), ConicError> {
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
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(ConicError::NonFinite(context));
    }
    let diff = m - m.adjoint();
    let asym = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if asym > SYMMETRY_TOL * scale {
        return Err(ConicError::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

impl HermitianSdp {
    pub fn new(objective: DMatrix<C64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.nrows()
    }

    pub fn push(&mut self, a: DMatrix<C64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(HermitianConstraint { a, sense, rhs });
        self
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.dim();
        check_hermitian(&self.objective, n, "objective")?;
        for c in &self.constraints {
            check_hermitian(&c.a, n, "constraint matrix")?;
        }
        Ok(())
    }

    /// The equivalent real program in dimension `2n`.
    pub fn to_real(&self) -> Result<SdpProblem, ConicError> {
        self.validate()?;
        let herm = |m: &DMatrix<C64>| (m + m.adjoint()) * C64::new(0.5, 0.0);
        let mut p = SdpProblem::new(embed_hermitian(&herm(&self.objective)) * 0.5);
        for c in &self.constraints {
            p.push(embed_hermitian(&herm(&c.a)) * 0.5, c.sense, c.rhs);
        }
        Ok(p)
    }

    pub fn solve(&self) -> Result<ConicSolution<DMatrix<C64>>, ConicError> {
        self.solve_with(&Tolerances::default())
    }

    pub fn solve_with(&self, tol: &Tolerances) -> Result<ConicSolution<DMatrix<C64>>, ConicError> {
        let real = self.to_real()?.solve_with(tol)?;
        Ok(ConicSolution {
            status: real.status,
            value: real.value,
            dual_value: real.dual_value,
            primal: extract_hermitian(&real.primal),
            duals: real.duals,
            rel_gap: real.rel_gap,
            primal_residual: real.primal_residual,
            dual_residual: real.dual_residual,
            iterations: real.iterations,
        })
    }
}
