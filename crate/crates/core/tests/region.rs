use magbeam::beamforming::PowerProfile;
use magbeam::region::*;
use magbeam::{build_impedance, Scenario};

fn two_user() -> Scenario {
    Scenario::desk().select_rx(&[0, 1])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn corners_with_and_without_peaks() {
    let s = two_user();
    let model = build_impedance(&s).unwrap();
    let opts = RegionOptions::default();
    let free = boundary_point(&s, &model, &PowerProfile::single(1, 2), false, &opts).unwrap();
    assert!(rel(free.p_star, 77.5) < 0.03, "{}", free.p_star);
    let peaks = boundary_point(&s, &model, &PowerProfile::single(1, 2), true, &opts).unwrap();
    assert!(rel(peaks.p_star, 57.5) < 0.03, "{}", peaks.p_star);
    assert!(peaks.p_star <= free.p_star);
    assert!((peaks.per_rx[1] - peaks.p_star).abs() <= 1e-6 * peaks.p_star);
}

#[test]
fn uncoupled_receiver_gives_zero() {
    let mut s = two_user();
    s.mutual_tx_rx.column_mut(0).fill(0.0);
    let model = build_impedance(&s).unwrap();
    let p = boundary_point(&s, &model, &PowerProfile::single(0, 2), true, &RegionOptions::default()).unwrap();
    assert_eq!(p.p_star, 0.0);
}

#[test]
fn sweep_properties() {
    let s = two_user();
    let model = build_impedance(&s).unwrap();
    let opts = RegionOptions::default();
    let grid = PowerProfile::two_user_grid(8);
    let peaks = sweep_region(&s, &model, &grid, true, true, &opts).unwrap();
    let free = sweep_region(&s, &model, &grid, false, false, &opts).unwrap();
    assert_eq!(free.len(), 9);
    assert_eq!(peaks.len(), 18);
    let bf: Vec<_> = peaks.iter().filter(|p| p.scheme == Scheme::Beamforming).collect();
    let bm: Vec<_> = peaks.iter().filter(|p| p.scheme == Scheme::Benchmark).collect();
    for k in 0..9 {
        assert_eq!(bf[k].alpha, grid[k]);
        // Peak limits never help, and coordination never hurts.
        assert!(bf[k].p_star <= free[k].p_star + 1e-9);
        assert!(bf[k].p_star >= bm[k].p_star);
        for (q, a) in grid[k].alpha().iter().enumerate() {
            assert!(bf[k].per_rx[q] >= a * bf[k].p_star - opts.eps, "{k} {q} {:?} {}", bf[k].per_rx, bf[k].p_star);
        }
    }
    // Trade-off along the sweep, with slack for the bisection tolerance.
    for w in free.windows(2) {
        let tol = 2.0 * opts.eps;
        assert!(w[1].alpha.alpha()[0] * w[1].p_star >= w[0].alpha.alpha()[0] * w[0].p_star - tol);
        assert!(w[1].alpha.alpha()[1] * w[1].p_star <= w[0].alpha.alpha()[1] * w[0].p_star + tol);
    }
    // Midpoints of adjacent boundary points lie inside the region.
    let pts: Vec<(f64, f64)> = free
        .iter()
        .map(|p| (p.alpha.alpha()[0] * p.p_star, p.alpha.alpha()[1] * p.p_star))
        .collect();
    for w in pts.windows(2) {
        let mid = (0.5 * (w[0].0 + w[1].0), 0.5 * (w[0].1 + w[1].1));
        let along = PowerProfile::normalized(vec![mid.0, mid.1]).unwrap();
        let p = boundary_point(&s, &model, &along, false, &opts).unwrap();
        assert!(p.p_star >= mid.0 + mid.1 - 2.0 * opts.eps, "{} < {}", p.p_star, mid.0 + mid.1);
    }
}

#[test]
fn grid_and_csv() {
    let s = two_user();
    let model = build_impedance(&s).unwrap();
    let grid = PowerProfile::two_user_grid(2);
    let pts = sweep_region(&s, &model, &grid, true, false, &RegionOptions::default()).unwrap();
    assert_eq!(pts.len(), 3);
    let alphas: Vec<f64> = pts.iter().map(|p| p.alpha.alpha()[0]).collect();
    assert_eq!(alphas, vec![0.0, 0.5, 1.0]);
    let mut buf = Vec::new();
    write_csv(&mut buf, &pts).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha_1,alpha_2,p_star,p_rx_1,p_rx_2,method,rank,constrained,scheme"
    );
    assert_eq!(lines.count(), 3);
    let summary = RegionSummary::new(&s, &pts, true, false, &RegionOptions::default());
    assert_eq!(summary.scenario_hash, s.hash());
    assert!(summary.benchmark_max_per_rx.is_none());
}

#[test]
fn four_user_single_point() {
    let s = Scenario::desk();
    let model = build_impedance(&s).unwrap();
    let alpha = PowerProfile::normalized(vec![0.1227, 0.03615, 0.7836, 0.05752]).unwrap();
    let pts = sweep_region(&s, &model, &[alpha.clone()], true, true, &RegionOptions::default()).unwrap();
    assert_eq!(pts.len(), 2);
    assert!(pts[0].p_star > pts[1].p_star);
    assert!(rel(pts[1].p_star, 0.8) < 0.1, "{}", pts[1].p_star);
}
