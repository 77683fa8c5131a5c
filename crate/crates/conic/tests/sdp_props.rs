use magbeam_conic::{
    embed_hermitian, extract_hermitian, numerical_rank, psd_eigendecomposition, HermitianSdp, SdpProblem, Sense,
    Status, DEFAULT_RANK_TOL,
};
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use proptest::prelude::*;

type C64 = Complex<f64>;

fn sym_from(v: &[f64], n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |i, j| v[i * n + j]);
    (&m + m.transpose()) * 0.5
}

fn herm_from(re: &[f64], im: &[f64], n: usize) -> DMatrix<C64> {
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(re[i * n + j], im[i * n + j]));
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Optimal points satisfy primal feasibility, dual feasibility and a
    /// vanishing gap.
    #[test]
    fn kkt_holds(
        n in 2usize..5,
        cvals in proptest::collection::vec(-1.0f64..1.0, 16),
        avals in proptest::collection::vec(-1.0f64..1.0, 48),
        x0vals in proptest::collection::vec(-1.0f64..1.0, 16),
    ) {
        let c = sym_from(&cvals, n);
        let g = DMatrix::from_fn(n, n, |i, j| x0vals[i * n + j]);
        let x0 = &g * g.transpose() + DMatrix::identity(n, n) * 0.1;
        let mut p = SdpProblem::new(c.clone());
        p.push(DMatrix::identity(n, n), Sense::Eq, x0.trace());
        for k in 0..3 {
            let a = sym_from(&avals[k * 16..], n);
            let sense = if k % 2 == 0 { Sense::Le } else { Sense::Ge };
            p.push(a.clone(), sense, a.dot(&x0));
        }
        let s = p.solve().unwrap();
        prop_assert_eq!(s.status, Status::Optimal);
        let x = &s.primal;
        prop_assert!(min_eig(x) >= -1e-7 * x.norm().max(1.0));
        for (con, &y) in p.constraints.iter().zip(&s.duals) {
            let lhs = con.a.dot(x);
            let tol = 1e-6 * (1.0 + con.rhs.abs());
            match con.sense {
                Sense::Le => { prop_assert!(lhs <= con.rhs + tol); prop_assert!(y <= 1e-7); }
                Sense::Ge => { prop_assert!(lhs >= con.rhs - tol); prop_assert!(y >= -1e-7); }
                Sense::Eq => prop_assert!((lhs - con.rhs).abs() <= tol),
            }
        }
        let mut z = &c * 0.5;
        for (con, &y) in p.constraints.iter().zip(&s.duals) {
            z -= &con.a * y;
        }
        prop_assert!(min_eig(&z) >= -1e-6);
        prop_assert!((s.value - s.dual_value).abs() <= 1e-6 * (1.0 + s.value.abs()));
        // Optimal value can be no worse than the known feasible point.
        prop_assert!(s.value <= 0.5 * c.dot(&x0) + 1e-6);
    }

    #[test]
    fn embedding_is_multiplicative(
        n in 1usize..5,
        a in proptest::collection::vec(-1.0f64..1.0, 32),
        b in proptest::collection::vec(-1.0f64..1.0, 32),
    ) {
        let ma = DMatrix::from_fn(n, n, |i, j| C64::new(a[i * n + j], a[16 + i * n + j]));
        let mb = DMatrix::from_fn(n, n, |i, j| C64::new(b[i * n + j], b[16 + i * n + j]));
        let lhs = embed_hermitian(&(&ma * &mb));
        let rhs = embed_hermitian(&ma) * embed_hermitian(&mb);
        prop_assert!((lhs - rhs).amax() < 1e-12);
        let adj = embed_hermitian(&ma.adjoint());
        prop_assert!((adj - embed_hermitian(&ma).transpose()).amax() < 1e-15);
        prop_assert!((extract_hermitian(&embed_hermitian(&ma)) - ma).iter().all(|z| z.norm() < 1e-15));
    }

    /// A Hermitian program and its embedded real form share the optimum, and
    /// the embedded solution has twice the rank.
    #[test]
    fn hermitian_matches_embedding(
        n in 2usize..4,
        re in proptest::collection::vec(-1.0f64..1.0, 9),
        im in proptest::collection::vec(-1.0f64..1.0, 9),
    ) {
        let c = herm_from(&re, &im, n);
        let mut p = HermitianSdp::new(c.clone());
        p.push(DMatrix::identity(n, n), Sense::Eq, 1.0);
        let s = p.solve().unwrap();
        prop_assert_eq!(s.status, Status::Optimal);
        let e = psd_eigendecomposition(&c).unwrap();
        let lmin = *e.values.last().unwrap();
        prop_assert!((s.value - 0.5 * lmin).abs() < 1e-6);

        let real = p.to_real().unwrap().solve().unwrap();
        prop_assert!((real.value - s.value).abs() < 1e-7);
        let ex = psd_eigendecomposition(&s.primal).unwrap();
        let gap = e.values[n - 2] - lmin;
        if gap > 1e-2 {
            prop_assert_eq!(ex.rank(DEFAULT_RANK_TOL.max(1e-4)), 1);
            let rx = SymmetricEigen::new(real.primal.clone()).eigenvalues;
            prop_assert_eq!(numerical_rank(rx.as_slice(), 1e-4), 2);
        }
    }

    #[test]
    fn eigen_reconstructs(
        n in 1usize..6,
        re in proptest::collection::vec(-1.0f64..1.0, 25),
        im in proptest::collection::vec(-1.0f64..1.0, 25),
    ) {
        let x = herm_from(&re, &im, n);
        let e = psd_eigendecomposition(&x).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let mut rec = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let u = e.vector(k);
            rec += &u * u.adjoint() * C64::new(e.values[k], 0.0);
        }
        prop_assert!((rec - x).iter().all(|z| z.norm() < 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Rank reduction keeps every constraint value, stays PSD and reaches
    /// `rank^2 <= m`.
    #[test]
    fn reduce_rank_keeps_constraints(
        n in 2usize..6,
        m in 1usize..5,
        gre in proptest::collection::vec(-1.0f64..1.0, 36),
        gim in proptest::collection::vec(-1.0f64..1.0, 36),
        are in proptest::collection::vec(-1.0f64..1.0, 4 * 36),
        aim in proptest::collection::vec(-1.0f64..1.0, 4 * 36),
    ) {
        let g = DMatrix::from_fn(n, n, |i, j| C64::new(gre[i * 6 + j], gim[i * 6 + j]));
        let x = &g * g.adjoint();
        let cons: Vec<_> = (0..m).map(|k| herm_from(&are[k * 36..], &aim[k * 36..], n)).collect();
        let y = magbeam_conic::reduce_rank(&x, &cons, 1e-12).unwrap();
        let e = psd_eigendecomposition(&y).unwrap();
        let r = e.rank(1e-9);
        prop_assert!(r * r <= m.max(1) || r == 1);
        prop_assert!(e.values.iter().all(|&v| v >= -1e-9 * e.values[0].max(1.0)));
        for a in &cons {
            let before = (a * &x).trace().re;
            let after = (a * &y).trace().re;
            prop_assert!((before - after).abs() <= 1e-8 * (1.0 + x.norm() * a.norm()));
        }
    }
}
