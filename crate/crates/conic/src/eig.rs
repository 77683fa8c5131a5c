use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::ConicError;

type C64 = Complex<f64>;

/// Relative threshold used by [`numerical_rank`] when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// descending. Column `k` of `vectors` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.vectors.column(k).into_owned()
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        numerical_rank(&self.values, rel_tol)
    }

    /// `sqrt(max(lambda_k, 0)) u_k`
    pub fn scaled_vector(&self, k: usize) -> DVector<C64> {
        self.vector(k) * C64::new(self.values[k].max(0.0).sqrt(), 0.0)
    }
}

pub fn psd_eigendecomposition(x: &DMatrix<C64>) -> Result<Eigen, ConicError> {
    if x.nrows() != x.ncols() {
        return Err(ConicError::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(ConicError::NonFinite("eigendecomposition input"));
    }
    let h = (x + x.adjoint()) * C64::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(x.nrows(), order.len(), |i, k| e.eigenvectors[(i, order[k])]);
    Ok(Eigen { values, vectors })
}

/// Number of eigenvalues above `rel_tol * lambda_max`. Zero for a matrix
/// with no positive eigenvalue.
pub fn numerical_rank(values: &[f64], rel_tol: f64) -> usize {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return 0;
    }
    values.iter().filter(|&&v| v > rel_tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&[1.0, 1e-9, 0.0], DEFAULT_RANK_TOL), 1);
        assert_eq!(numerical_rank(&[2.0, 1e-3, -1e-12], DEFAULT_RANK_TOL), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], DEFAULT_RANK_TOL), 0);
    }

    #[test]
    fn sorted_and_reconstructs() {
        let x = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        );
        let e = psd_eigendecomposition(&x).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(2, e.values.iter().map(|&v| C64::new(v, 0.0))));
        let rec = &e.vectors * lam * e.vectors.adjoint();
        assert!((rec - x).iter().all(|z| z.norm() < 1e-12));
    }
}
