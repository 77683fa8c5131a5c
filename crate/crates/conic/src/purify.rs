//! Rank reduction of SDP solutions along the optimal face.

use nalgebra::{Complex, DMatrix};

use crate::eig::psd_eigendecomposition;
use crate::ConicError;

type C64 = Complex<f64>;

/// Basis of `r x r` Hermitian matrices: real diagonal units, then the
/// symmetric and skew pairs for each `i < j`.
fn hermitian_basis(r: usize) -> Vec<DMatrix<C64>> {
    let mut basis = Vec::with_capacity(r * r);
    for i in 0..r {
        let mut e = DMatrix::zeros(r, r);
        e[(i, i)] = C64::new(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let mut s = DMatrix::zeros(r, r);
            s[(i, j)] = C64::new(1.0, 0.0);
            s[(j, i)] = C64::new(1.0, 0.0);
            basis.push(s);
            let mut k = DMatrix::zeros(r, r);
            k[(i, j)] = C64::new(0.0, 1.0);
            k[(j, i)] = C64::new(0.0, -1.0);
            basis.push(k);
        }
    }
    basis
}

/// Drop the spectrum of `x` below `rank_tol * lambda_max`, then lower the
/// rank while `Re tr(A_i X)` stays fixed for every `A_i`, until
/// `rank^2 <= constraints.len()`.
///
/// Each step writes `X = V V^H` and moves to `V (I - D) V^H`, where the
/// Hermitian `D` lies in the null space of the maps `D -> Re tr(V^H A_i V D)`
/// and is scaled so that its largest eigenvalue is one. Any linear objective
/// that is constant on the optimal face is preserved as well.
pub fn reduce_rank(x: &DMatrix<C64>, constraints: &[DMatrix<C64>], rank_tol: f64) -> Result<DMatrix<C64>, ConicError> {
    let n = x.nrows();
    for a in constraints {
        if a.nrows() != n || a.ncols() != n {
            return Err(ConicError::Dimension {
                expected: n,
                found: a.nrows(),
                context: "rank reduction constraint",
            });
        }
    }
    let mut eig = psd_eigendecomposition(x)?;
    let mut r = eig.rank(rank_tol);
    let mut v = DMatrix::from_fn(n, r, |i, k| eig.vectors[(i, k)] * eig.values[k].max(0.0).sqrt());
    while r > 1 && r * r > constraints.len() {
        let basis = hermitian_basis(r);
        let dim = basis.len();
        let reduced: Vec<DMatrix<C64>> = constraints.iter().map(|a| v.adjoint() * a * &v).collect();
        let mut k = DMatrix::<f64>::zeros(dim, dim);
        for (row, ar) in reduced.iter().enumerate() {
            for (col, e) in basis.iter().enumerate() {
                k[(row, col)] = (ar * e).trace().re;
            }
        }
        let svd = k.svd(false, true);
        let vt = svd.v_t.ok_or(ConicError::NonFinite("rank reduction SVD"))?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        let mut d = DMatrix::<C64>::zeros(r, r);
        for (c, e) in basis.iter().enumerate() {
            d += e * C64::new(vt[(imin, c)], 0.0);
        }
        let de = psd_eigendecomposition(&d)?;
        let top = de.values[0];
        let bottom = de.values[r - 1];
        let scale = if top.abs() >= bottom.abs() { top } else { bottom };
        if scale == 0.0 {
            break;
        }
        let step = DMatrix::<C64>::identity(r, r) - d * C64::new(1.0 / scale, 0.0);
        let next = &v * step * v.adjoint();
        eig = psd_eigendecomposition(&next)?;
        let next_r = eig.rank(rank_tol).min(r - 1);
        v = DMatrix::from_fn(n, next_r, |i, k| eig.vectors[(i, k)] * eig.values[k].max(0.0).sqrt());
        r = next_r;
    }
    Ok(&v * v.adjoint())
}
