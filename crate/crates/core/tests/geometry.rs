use magbeam::geometry::*;
use magbeam::Scenario;

/// Arithmetic-geometric mean based complete elliptic integrals `K(k)`, `E(k)`.
fn elliptic(k: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0, (1.0 - k * k).sqrt());
    let mut c_sum = 0.5 * k * k;
    let mut pow = 0.5;
    for _ in 0..40 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let c = 0.5 * (a - b);
        let (na, nb) = (0.5 * (a + b), (a * b).sqrt());
        a = na;
        b = nb;
        pow *= 2.0;
        c_sum += pow * c * c;
    }
    let kk = std::f64::consts::FRAC_PI_2 / a;
    (kk, kk * (1.0 - c_sum))
}

/// Maxwell's closed form for coaxial circular loops.
fn coaxial(a: f64, b: f64, d: f64, turns: f64) -> f64 {
    let k = (4.0 * a * b / ((a + b).powi(2) + d * d)).sqrt();
    let (kk, ee) = elliptic(k);
    turns * MU_0 * (a * b).sqrt() * ((2.0 / k - k) * kk - 2.0 / k * ee)
}

#[test]
fn elliptic_oracle_sanity() {
    let (k0, e0) = elliptic(0.0);
    assert!((k0 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!((e0 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    // Tabulated K(1/sqrt 2) and E(1/sqrt 2).
    let (k, e) = elliptic(std::f64::consts::FRAC_1_SQRT_2);
    assert!((k - 1.854_074_677_301_372).abs() < 1e-13);
    assert!((e - 1.350_643_881_047_675).abs() < 1e-13);
}

#[test]
fn coaxial_matches_closed_form() {
    let tx = CoilGeometry::horizontal([0.0, 0.0, 0.0], 0.1, 250);
    for d in [0.05, 0.1, 0.3] {
        let rx = CoilGeometry::horizontal([0.0, 0.0, d], 0.02, 50);
        let m = mutual_inductance(&tx, &rx, DEFAULT_QUADRATURE_POINTS).unwrap();
        let oracle = coaxial(0.1, 0.02, d, 250.0 * 50.0);
        assert!(m > 0.0);
        assert!(((m - oracle) / oracle).abs() < 1e-9, "d={d}: {m} vs {oracle}");
    }
}

#[test]
fn symmetric_in_arguments() {
    let a = CoilGeometry::horizontal([0.7, 0.7, 0.0], 0.1, 250);
    let b = CoilGeometry {
        center: [0.5, 0.6, 0.1],
        radius: 0.02,
        turns: 50,
        axis: [0.1, 0.0, 1.0],
    };
    let ab = mutual_inductance(&a, &b, 256).unwrap();
    let ba = mutual_inductance(&b, &a, 256).unwrap();
    assert!(((ab - ba) / ab).abs() < 1e-12);
}

#[test]
fn decays_with_separation() {
    let tx = CoilGeometry::horizontal([0.0, 0.0, 0.0], 0.1, 250);
    let mut last = f64::INFINITY;
    for d in [0.2, 0.4, 0.8, 1.6, 3.2] {
        let rx = CoilGeometry::horizontal([0.0, 0.0, d], 0.02, 50);
        let m = mutual_inductance(&tx, &rx, 256).unwrap();
        assert!(m > 0.0 && m < last, "{d}: {m}");
        last = m;
    }
    // Far field approaches the coaxial dipole limit mu_0 pi a² b² N_a N_b / (2 d³).
    let dipole = MU_0 * std::f64::consts::PI * 0.01 * 4e-4 * 12500.0 / (2.0 * 3.2f64.powi(3));
    assert!(((last - dipole) / dipole).abs() < 1e-2, "{last} vs {dipole}");
}

#[test]
fn coincident_and_invalid_rejected() {
    let a = CoilGeometry::horizontal([0.0, 0.0, 0.0], 0.1, 1);
    assert!(mutual_inductance(&a, &a, 64).is_err());
    let bad = CoilGeometry::horizontal([0.0, 0.0, 1.0], -0.1, 1);
    assert!(mutual_inductance(&a, &bad, 64).is_err());
    let none = CoilGeometry::horizontal([0.0, 0.0, 1.0], 0.1, 0);
    assert!(mutual_inductance(&a, &none, 64).is_err());
}

#[test]
fn quadrature_converges_on_layout() {
    let layout = CoilLayout::charging_table();
    let (m1, t1) = layout.inductances(256).unwrap();
    let (m2, t2) = layout.inductances(512).unwrap();
    for (a, b) in m1.iter().zip(m2.iter()).chain(t1.iter().zip(t2.iter())) {
        if *b != 0.0 {
            assert!(((a - b) / b).abs() < 1e-3);
        }
    }
}

#[test]
fn layout_reproduces_bundled_magnitudes() {
    // The bundled table lists magnitudes; the side-by-side geometry gives
    // negative couplings under a shared winding sense.
    let layout = CoilLayout::charging_table();
    let (m, mt) = layout.inductances(256).unwrap();
    let s = Scenario::desk();
    for (g, t) in m.iter().zip(s.mutual_tx_rx.iter()) {
        assert!(((g.abs() - t) / t).abs() < 0.02, "{g} vs {t}");
    }
    for (g, t) in mt.iter().zip(s.mutual_tx_tx.iter()) {
        if *t != 0.0 {
            assert!(((g.abs() - t) / t).abs() < 0.02, "{g} vs {t}");
        }
    }
}
