use gcb_core::ldpc_curves::{
    curve_scan, d2h_domega2, ensemble_enumerator, h_curve, omega_derivative, omega_of_s, random_regular_matrix,
    s_of_omega, theta, to_csv, Curvature,
};
use gcb_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

#[test]
fn theta_examples() {
    assert!((theta(6, 0.0).unwrap() - 32f64.ln()).abs() < 1e-14);
    assert!((theta(4, 0.0).unwrap() - 8f64.ln()).abs() < 1e-14);
    assert!(theta(6, -50.0).unwrap().abs() < 1e-20);
    assert!(theta(6, -5.0).unwrap() > theta(6, -50.0).unwrap());
    assert!(matches!(theta(1, 0.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn omega_examples() {
    for d_r in [4, 6] {
        assert!((omega_of_s(d_r, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(omega_of_s(d_r, -60.0).unwrap() < 1e-20);
    }
    let h = 1e-5;
    for s in [-3.0, -1.0, -0.2, 0.0, 0.7, 2.5] {
        let fd = (theta(6, s + h).unwrap() - theta(6, s - h).unwrap()) / (2.0 * h) / 6.0;
        assert!((fd - omega_of_s(6, s).unwrap()).abs() < 1e-6, "s={s}");
        let fd = (omega_of_s(6, s + h).unwrap() - omega_of_s(6, s - h).unwrap()) / (2.0 * h);
        assert!((fd - omega_derivative(6, s).unwrap()).abs() < 1e-6, "s={s}");
    }
}

#[test]
fn s_of_omega_inverts_omega() {
    for omega in [1e-4, 0.01, 0.2, 0.5, 0.8, 0.99] {
        let s = s_of_omega(6, omega).unwrap();
        assert!((omega_of_s(6, s).unwrap() - omega).abs() < 1e-10, "omega={omega}");
    }
    assert!(s_of_omega(6, 0.0).is_err());
    assert!(s_of_omega(6, 1.0).is_err());
}

#[test]
fn h_curve_examples() {
    let peak = h_curve(3, 6, 0.0).unwrap();
    assert_eq!(peak.omega, 0.5);
    assert!((peak.h - 0.5 * LN_2).abs() < 1e-14);
    assert!((peak.h_bits() - 0.5).abs() < 1e-14);
    let small = h_curve(3, 6, s_of_omega(6, 0.01).unwrap()).unwrap();
    assert!(small.omega > 0.0 && small.h < 0.0);
    for k in 1..200 {
        let p = h_curve(2, 4, s_of_omega(4, k as f64 / 200.0).unwrap()).unwrap();
        assert!(p.h >= 0.0, "omega={}: h={}", p.omega, p.h);
    }
    assert!(h_curve(3, 3, 0.0).is_err());
    assert!(h_curve(1, 4, 0.0).is_err());
}

#[test]
fn h_vanishes_at_the_zero_codeword() {
    for s in [-20.0, -25.0, -40.0, -100.0] {
        assert!(h_curve(3, 6, s).unwrap().h.abs() < 1e-9, "s={s}");
        assert!(h_curve(2, 4, s).unwrap().h.abs() < 1e-9, "s={s}");
    }
}

#[test]
fn analytic_curvature_matches_the_scan() {
    let scan = curve_scan(3, 6, -3.0, 3.0, 601).unwrap();
    for p in scan.points[50..=550].iter().step_by(50) {
        let exact = d2h_domega2(3, 6, p.s).unwrap();
        let approx = p.d2h.unwrap();
        assert!((exact - approx).abs() <= 1e-3 * exact.abs().max(1.0), "s={}: {exact} vs {approx}", p.s);
    }
}

#[test]
fn curve_scan_reports() {
    let scan = curve_scan(3, 6, -3.0, 3.0, 601).unwrap();
    let report = &scan.report;
    assert!(report.negative_near_zero);
    assert!(!report.nonnegative);
    assert_eq!(report.regions.first().map(|r| r.0), Some(Curvature::Convex));
    assert_eq!(report.curvature_at(0.5), Some(Curvature::Concave));
    assert!((report.peak.omega - 0.5).abs() < 1e-12);
    assert!((report.peak.h_bits() - 0.5).abs() < 1e-12);

    let scan = curve_scan(2, 4, -3.0, 3.0, 601).unwrap();
    assert!(scan.report.nonnegative);
    assert!(!scan.report.negative_near_zero);
    assert!(scan.report.is_concave());

    let text = scan.report.render();
    assert!(text.starts_with("d_l=2\nd_r=4\n"));
    assert!(text.contains("nonnegative=true"));
    assert!(curve_scan(3, 6, 0.0, 1.0, 2).is_err());
    assert!(curve_scan(3, 6, 1.0, 0.0, 10).is_err());
}

#[test]
fn csv_has_the_documented_columns() {
    let scan = curve_scan(3, 6, -1.0, 1.0, 5).unwrap();
    let csv = to_csv(&scan.points);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,omega,h_nats,h_bits,d2h_domega2");
    assert_eq!(lines.len(), 6);
    let middle: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(middle[0], 0.0);
    assert!((middle[1] - 0.5).abs() < 1e-15);
    assert!((middle[3] - 0.5).abs() < 1e-14);
}

#[test]
fn random_regular_matrices_have_the_right_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows = random_regular_matrix(3, 6, 12, &mut rng).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.len() == 12));
    // Repeated connections cancel in pairs, so degrees keep their parity.
    for r in &rows {
        assert_eq!(r.iter().map(|&v| v as u32).sum::<u32>() % 2, 0);
    }
    for i in 0..12 {
        assert_eq!(rows.iter().map(|r| r[i] as u32).sum::<u32>() % 2, 1);
    }
    assert!(random_regular_matrix(3, 6, 11, &mut rng).is_err());
}

#[test]
fn ensemble_enumerator_soft_check() {
    let ensemble = ensemble_enumerator(3, 6, 10, 400, 7).unwrap();
    assert_eq!(ensemble, ensemble_enumerator(3, 6, 10, 400, 7).unwrap());
    assert_eq!(ensemble.average.first(), Some(&(0, 1.0)));
    // Five checks on ten symbols leave at least 2^5 codewords.
    let total: f64 = ensemble.average.iter().map(|a| a.1).sum();
    assert!(total >= 32.0);
    let rows = ensemble.compare(3, 6).unwrap();
    assert!(!rows.is_empty());
    let above = rows.iter().filter(|(_, rate, h)| h >= rate).count();
    println!("curve above the ensemble rate at {above} of {} weights", rows.len());
    for (omega, rate, h) in &rows {
        println!("omega={omega:.1} log(avg)/n={rate:.4} h={h:.4}");
    }
    assert!(ensemble_enumerator(3, 6, 24, 1, 0).is_err());
}

proptest! {
    // Beyond |s| = 10 the gap 1 - omega drops below double resolution for d_R = 2.
    #[test]
    fn omega_is_strictly_increasing(a in -10.0f64..10.0, gap in 1e-3f64..5.0, d_r in 2u32..12) {
        prop_assert!(omega_of_s(d_r, a).unwrap() < omega_of_s(d_r, a + gap).unwrap());
        let w = omega_of_s(d_r, a).unwrap();
        prop_assert!(w > 0.0 && w < 1.0);
    }
}
