use diffract::kernel::{KernelPoint, ModeParams, Region};
use diffract::oracle::*;
use proptest::prelude::*;

fn pt(r1: f64, t: f64) -> KernelPoint {
    KernelPoint::new(r1, 1.0, t).unwrap()
}

#[test]
fn config_checks() {
    let cfg = FDConfig::new(4.0, 1e-2, 2.0, 0.5).unwrap();
    assert!(matches!(FDConfig { dt: 0.95e-2, ..cfg }.validate(), Err(OracleError::CflViolation { .. })));
    // the origin cell's potential tightens the limit for large ν
    assert!(matches!(FDConfig { dt: 0.5e-2, nu: 3.0, ..cfg }.validate(), Err(OracleError::CflViolation { .. })));
    assert!(cfg.with_width(0.03).is_err());
    assert!(matches!(solve_mode(&FDConfig { t_end: 2.9, ..cfg }, 1.0), Err(OracleError::BoundaryContamination { .. })));
    assert!(solve_mode(&cfg, 0.1).is_err());
}

#[test]
fn zero_data_stays_zero() {
    let cfg = FDConfig::new(2.0, 1e-2, 1.0, 1.5).unwrap();
    let field = solve_initial_velocity(&cfg, &vec![0.0; 200]).unwrap();
    assert!(field.slices.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn mollifier_has_unit_mass() {
    let cfg = FDConfig::new(4.0, 1e-3, 2.0, 0.5).unwrap().with_width(0.02).unwrap();
    let g = mollifier(&cfg, 1.3);
    let mass: f64 = g.iter().enumerate().map(|(j, v)| v * (j as f64 + 0.5) * 1e-6).sum();
    assert!((mass - 1.0).abs() < 1e-12);
    let support = g.iter().filter(|v| **v != 0.0).count();
    assert!((120..=121).contains(&support));
}

#[test]
fn energy_is_conserved() {
    let cfg = FDConfig::new(4.0, 2e-3, 2.5, 0.5).unwrap().with_width(0.02).unwrap();
    let field = solve_mode(&cfg, 1.0).unwrap();
    assert!(field.energy.len() > 100);
    assert!(field.energy_drift() < 1e-3, "{}", field.energy_drift());
}

#[test]
fn finite_speed() {
    let cfg = FDConfig::new(4.0, 2e-3, 0.5, 0.5).unwrap().with_width(0.02).unwrap();
    let field = solve_mode(&cfg, 2.0).unwrap();
    let peak = field.peak();
    let t = 0.3;
    for r in [0.5, 1.0, 1.5, 2.4, 2.9] {
        let v = field.value(r, t).unwrap();
        if (r - 2.0f64).abs() > t + cfg.support() + 0.1 {
            assert!(v.abs() < 1e-10 * peak, "r = {r}: {v}");
        }
    }
}

#[test]
fn interpolation_hits_stored_nodes() {
    let cfg = FDConfig::new(4.0, 2e-3, 1.0, 0.5).unwrap().with_width(0.02).unwrap();
    let field = solve_mode(&cfg, 1.0).unwrap();
    let k = 40;
    for j in [100, 500, 700] {
        let v = field.value(field.r[j], field.times[k]).unwrap();
        assert!((v - field.slices[k][j]).abs() < 1e-12);
    }
    assert!(field.value(5.0, 0.5).is_none());
    assert!(field.value(1.0, 1.5).is_none());
}

#[test]
fn free_mode_matches_closed_form() {
    let m = ModeParams::new(0, 0.0).unwrap();
    let cfg = FDConfig::new(4.0, 1e-3, 2.6, 0.0).unwrap().with_width(0.02).unwrap();
    let samples = [pt(0.5, 1.0), pt(1.0, 1.0), pt(1.6, 1.2), pt(2.0, 2.5), pt(0.4, 2.0), pt(2.5, 0.5)];
    let report = compare_kernel(m, &cfg, &samples).unwrap();
    assert!(report.max_rel_err < 0.02, "{report:?}");
    assert!(report.max_leakage < 1e-3);
}

#[test]
fn inverse_square_mode_matches_closed_form() {
    let m = ModeParams::new(0, 0.25).unwrap();
    let cfg = FDConfig::new(4.0, 2e-3, 2.6, 0.5).unwrap().with_width(0.02).unwrap();
    let samples = [pt(0.3, 0.5), pt(0.7, 1.0), pt(1.5, 1.5), pt(0.3, 2.5), pt(1.2, 2.5), pt(3.2, 2.5)];
    let report = compare_kernel(m, &cfg, &samples).unwrap();
    assert_eq!(report.rows[0].region, Region::I);
    assert_eq!(report.rows[3].region, Region::III);
    assert!(report.max_rel_err < 0.02, "{report:?}");
    assert!(report.max_leakage < 1e-3);
    assert!(report.energy_drift < 1e-3);
}

#[test]
fn comparison_input_checks() {
    let m = ModeParams::new(0, 0.25).unwrap();
    let cfg = FDConfig::new(4.0, 2e-3, 2.6, 0.5).unwrap().with_width(0.02).unwrap();
    assert!(matches!(compare_kernel(m, &cfg, &[pt(1.0, 2.01)]), Err(OracleError::SampleNearCone { .. })));
    let other = ModeParams::new(1, 0.25).unwrap();
    assert!(compare_kernel(other, &cfg, &[pt(1.0, 1.0)]).is_err());
    let mixed = [pt(1.0, 1.0), KernelPoint::new(1.0, 1.2, 1.0).unwrap()];
    assert!(compare_kernel(m, &cfg, &mixed).is_err());
}

#[test]
fn second_order_in_dr() {
    let m = ModeParams::new(0, 0.25).unwrap();
    let base = FDConfig::new(4.0, 8e-3, 2.0, 0.5).unwrap().with_width(0.04).unwrap();
    let samples = [pt(0.7, 1.0), pt(1.5, 1.0), pt(2.0, 1.5), pt(1.0, 1.8)];
    let study = convergence_study(m, &base, &[8e-3, 4e-3, 2e-3], &samples).unwrap();
    for order in &study.orders {
        assert!((order - 2.0).abs() < 0.3, "{study:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mollifier_mass_property(r0 in 0.5f64..3.0, cells in 4.0f64..20.0) {
        let dr = 2e-3;
        let cfg = FDConfig::new(4.0, dr, 0.5, 0.5).unwrap().with_width(cells * dr).unwrap();
        let g = mollifier(&cfg, r0);
        let mass: f64 = g.iter().enumerate().map(|(j, v)| v * (j as f64 + 0.5) * dr * dr).sum();
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }
}
