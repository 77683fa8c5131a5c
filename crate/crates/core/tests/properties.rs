use magbeam::beamforming::{
    p1_rank_bound, randomization_extract, scale_interval, solve_p1_sdr, solve_p2_sdr, time_sharing_from_sdr,
    PowerProfile, RandomizationOptions,
};
use magbeam::circuit::{build_impedance, ActiveConstraints, Excitation, C64};
use magbeam::estimation::{estimate_ls, estimate_perfect, simulate_training, TrainingProtocol};
use magbeam::synth::random_scenario;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn excitation(re: &[f64], im: &[f64], n: usize) -> Excitation {
    Excitation {
        currents: DVector::from_fn(n, |k, _| C64::new(re[k], im[k])),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Power drawn from the sources is the ohmic loss over all coils.
    #[test]
    fn energy_conservation(
        seed in any::<u64>(),
        n in 1usize..7,
        q in 1usize..5,
        re in proptest::collection::vec(-3.0f64..3.0, 6),
        im in proptest::collection::vec(-3.0f64..3.0, 6),
    ) {
        let s = random_scenario(&mut ChaCha8Rng::seed_from_u64(seed), n, q);
        let model = build_impedance(&s).unwrap();
        let i = excitation(&re, &im, n);
        prop_assume!(i.currents.norm() > 1e-3);
        let v = model.tx_voltages(&i).unwrap();
        let p_in: f64 = v.iter().zip(i.currents.iter()).map(|(v, i)| 0.5 * (v.conj() * i).re).sum();
        let i_rx = model.rx_currents(&i).unwrap();
        let loss = (0..n).map(|k| 0.5 * s.tx_resistance[k] * i.currents[k].norm_sqr()).sum::<f64>()
            + (0..q).map(|k| 0.5 * s.rx_resistance(k) * i_rx[k].norm_sqr()).sum::<f64>();
        prop_assert!(rel(p_in, loss) <= 1e-10);
        prop_assert!(rel(model.tx_total_power(&i).unwrap(), loss) <= 1e-10);
        let back = model.currents_for_voltages(&v).unwrap();
        prop_assert!((back - &i.currents).norm() <= 1e-9 * i.currents.norm());
    }

    /// A common phase on all TX currents changes no power or magnitude.
    #[test]
    fn global_phase_invariance(
        seed in any::<u64>(),
        n in 1usize..7,
        q in 1usize..5,
        theta in 0.0f64..std::f64::consts::TAU,
        re in proptest::collection::vec(-3.0f64..3.0, 6),
        im in proptest::collection::vec(-3.0f64..3.0, 6),
    ) {
        let s = random_scenario(&mut ChaCha8Rng::seed_from_u64(seed), n, q);
        let model = build_impedance(&s).unwrap();
        let i = excitation(&re, &im, n);
        let r = i.scaled(C64::from_polar(1.0, theta));
        for (a, b) in model.delivered_powers(&i).unwrap().iter().zip(model.delivered_powers(&r).unwrap()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        }
        let (a, b) = (model.constraint_slacks(&s, &i).unwrap(), model.constraint_slacks(&s, &r).unwrap());
        prop_assert!((a.total_power - b.total_power).abs() <= 1e-9 * a.total_power.abs().max(1.0));
        for (x, y) in a.voltage.iter().zip(&b.voltage) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    /// Any scaling inside the interval meets every demand and cap.
    #[test]
    fn scale_interval_is_feasible(
        demands in proptest::collection::vec((0.01f64..10.0, 0.0f64..5.0), 1..5),
        caps in proptest::collection::vec((0.0f64..10.0, 0.1f64..50.0), 0..5),
        t in 0.0f64..1.0,
    ) {
        if let Some((lo, hi)) = scale_interval(&demands, &caps) {
            let mu2 = if hi.is_finite() { lo + t * (hi - lo) } else { lo * (1.0 + t) };
            for &(a, need) in &demands {
                prop_assert!(mu2 * a >= need * (1.0 - 1e-12));
            }
            for &(c, cap) in &caps {
                prop_assert!(mu2 * c <= cap * (1.0 + 1e-12));
            }
        } else {
            let lo = demands.iter().map(|&(a, n)| n / a).fold(0.0, f64::max);
            prop_assert!(caps.iter().any(|&(c, cap)| c > 0.0 && lo > cap / c));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Relaxation value <= extracted TX power, with time sharing exact.
    #[test]
    fn relaxation_sandwich(
        seed in any::<u64>(),
        n in 2usize..6,
        q in 2usize..6,
        weights in proptest::collection::vec(0.05f64..1.0, 5),
        p in 0.5f64..5.0,
    ) {
        let s = random_scenario(&mut ChaCha8Rng::seed_from_u64(seed), n, q);
        let model = build_impedance(&s).unwrap();
        let profile = PowerProfile::normalized(weights[..q].to_vec()).unwrap();
        let (sdr, extracted) = solve_p2_sdr(&model, &profile, p, 1e-6).unwrap();
        let ts = time_sharing_from_sdr(&model, &sdr.x, 1e-6).unwrap();
        prop_assert!(rel(ts.tx_power, sdr.value) <= 1e-8);
        for (k, &a) in profile.alpha().iter().enumerate() {
            prop_assert!(ts.per_rx_power[k] >= a * p * (1.0 - 1e-6));
        }
        if let Some(x) = extracted {
            prop_assert!(rel(x.tx_power, sdr.value) <= 1e-8);
        }
        let opts = RandomizationOptions { draws: 100, seed, active: ActiveConstraints::NO_PEAKS };
        let rnd = randomization_extract(&s, &model, &sdr.x, &profile, p, &opts).unwrap();
        prop_assert!(sdr.value <= rnd.tx_power * (1.0 + 1e-7));
    }

    /// Peak-constrained relaxations never exceed the rank bound.
    #[test]
    fn peak_constrained_rank_bound(
        seed in any::<u64>(),
        n in 2usize..6,
        q in 1usize..5,
        weights in proptest::collection::vec(0.05f64..1.0, 4),
        p in 0.01f64..0.5,
    ) {
        let s = random_scenario(&mut ChaCha8Rng::seed_from_u64(seed), n, q);
        let model = build_impedance(&s).unwrap();
        let profile = PowerProfile::normalized(weights[..q].to_vec()).unwrap();
        match solve_p1_sdr(&s, &model, &profile, p, 1e-6) {
            Ok(sdr) => {
                prop_assert!(sdr.rank <= p1_rank_bound(q, n));
                prop_assert!(sdr.within_rank_bound());
            }
            Err(magbeam::Error::Infeasible(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    /// Without noise both estimators return the true couplings.
    #[test]
    fn noiseless_estimators_are_exact(
        seed in any::<u64>(),
        n in 1usize..7,
        q in 1usize..5,
        extra in 0usize..6,
    ) {
        prop_assume!(q <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scenario(&mut rng, n, q);
        let model = build_impedance(&s).unwrap();
        let rec = simulate_training(&s, &model, &TrainingProtocol::random(q, seed), f64::INFINITY, &mut rng).unwrap();
        prop_assert!(estimate_perfect(&s, &rec).unwrap().normalized_mse.sqrt() <= 1e-9);
        let rec = simulate_training(&s, &model, &TrainingProtocol::random(q + extra, seed ^ 1), f64::INFINITY, &mut rng).unwrap();
        let e = estimate_ls(&s, &rec).unwrap();
        prop_assert!(e.normalized_mse.sqrt() <= 1e-9);
        prop_assert!(e.squared_error_j.unwrap() <= 1e-18 * rec.g.norm_squared().max(1e-30));
    }

    /// More RXs than TXs leaves the couplings unidentifiable.
    #[test]
    fn too_many_receivers_is_singular(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scenario(&mut rng, n, n + 1);
        let model = build_impedance(&s).unwrap();
        let rec = simulate_training(&s, &model, &TrainingProtocol::random(n + 1, seed), f64::INFINITY, &mut rng).unwrap();
        prop_assert!(matches!(estimate_perfect(&s, &rec), Err(magbeam::Error::Singular(_))));
    }
}
