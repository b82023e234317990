use std::f64::consts::PI;

use diffract::quadrature::integrate_endpoint_singular_split;
use diffract::specfun::*;
use proptest::prelude::*;

fn order(nu: f64) -> BesselOrder {
    BesselOrder::new(nu).unwrap()
}

fn j(nu: f64, z: f64) -> f64 {
    bessel_j(order(nu), z).unwrap()
}

/// Poisson integral representation, evaluated by tanh-sinh with the
/// endpoint factors (1-t)(1+t) passed exactly.
fn bessel_poisson(nu: f64, z: f64) -> f64 {
    let r = integrate_endpoint_singular_split(|t, da, db| (da * db).powf(nu - 0.5) * (z * t).cos(), -1.0, 1.0, 1e-14)
        .unwrap();
    (0.5 * z).powf(nu) / (PI.sqrt() * gamma(nu + 0.5).unwrap()) * r.value
}

#[test]
fn gamma_known_values() {
    assert_eq!(gamma(1.0).unwrap(), 1.0);
    assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-12);
    assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-12);
    // Γ(7.5) = 13!! / 2^7 √π
    let v = 135135.0 / 128.0 * PI.sqrt();
    assert!(((gamma(7.5).unwrap() - v) / v).abs() < 1e-13);
    assert!(matches!(gamma(0.0), Err(SpecError::Domain { .. })));
    assert!(matches!(gamma(-1.5), Err(SpecError::Domain { .. })));
}

#[test]
fn gamma_recurrence_on_grid() {
    let mut x = 0.5;
    while x <= 30.0 {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        assert!(((lhs - rhs) / lhs).abs() < 1e-12, "x = {x}");
        x += 0.173;
    }
}

#[test]
fn bessel_trivial_and_half_integer() {
    assert_eq!(j(0.0, 0.0), 1.0);
    assert_eq!(j(2.5, 0.0), 0.0);
    assert!(j(0.5, PI).abs() < 1e-10);
    for &z in &[0.3, 2.0, 7.7, 13.1, 19.0, 33.3, 48.0] {
        let exact = (2.0 / (PI * z)).sqrt() * z.sin();
        assert!((j(0.5, z) - exact).abs() < 1e-13, "z = {z}");
        let exact = (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos());
        assert!((j(1.5, z) - exact).abs() < 1e-13, "z = {z}");
    }
    assert!(matches!(bessel_j(order(1.0), -1.0), Err(SpecError::Domain { .. })));
    assert!(BesselOrder::new(-0.1).is_err());
}

#[test]
fn bessel_matches_poisson_integral() {
    assert!((j(2.3, 1.7) - bessel_poisson(2.3, 1.7)).abs() < 1e-8);
    for &(nu, z) in &[(0.0, 5.0), (0.3, 14.0), (4.4, 16.5), (3.0, 21.0), (12.0, 13.0)] {
        let (a, b) = (j(nu, z), bessel_poisson(nu, z));
        assert!((a - b).abs() < 1e-10, "nu {nu} z {z}: {a} vs {b}");
    }
}

#[test]
fn bessel_frozen_high_precision_values() {
    // reference digits from a 30-digit arbitrary precision evaluation
    let table = [
        (0.0, 1.0, 0.765_197_686_557_966_6),
        (0.5, 3.0, 0.065_008_182_877_375_78),
        (2.3, 1.7, 0.204_797_228_537_508_1),
        (0.0, 15.0, -0.014_224_472_826_780_773),
        (1.2, 14.5, 0.161_057_678_229_215_5),
        (3.7, 20.0, 0.069_738_918_576_184_73),
        (12.0, 30.0, 0.148_253_351_099_660_1),
        (12.0, 24.0, 0.072_990_089_308_733_56),
        (0.25, 45.0, 0.117_372_383_366_401_5),
        (7.5, 50.0, 0.108_561_370_653_427_46),
        (10.0, 12.5, 0.278_871_746_593_535_7),
        (0.0, 100.0, 0.019_985_850_304_223_122),
        (12.0, 40.0, -0.126_977_996_117_848_06),
        (9.0, 21.0, -0.031_753_462_940_730_46),
        (11.9, 3.3, 8.411_720_146_729_316e-7),
    ];
    for (nu, z, want) in table {
        let got = j(nu, z);
        assert!((got - want).abs() < 1e-10, "J_{nu}({z}) = {got}, want {want}");
    }
}

#[test]
fn bessel_crossovers_are_continuous() {
    for &nu in &[0.0, 0.5, 1.7, 3.0, 6.2, 11.5] {
        for &z in &[12.0, 24.0] {
            let lo = j(nu, z - 1e-13);
            let hi = j(nu, z + 1e-13);
            assert!((lo - hi).abs() < 1e-10, "nu {nu} z {z}: {lo} vs {hi}");
        }
    }
}

#[test]
fn legendre_q_closed_forms() {
    let q0 = |z: f64| 0.5 * ((z + 1.0) / (z - 1.0)).ln();
    let q1 = |z: f64| 0.5 * z * ((z + 1.0) / (z - 1.0)).ln() - 1.0;
    assert!((legendre_q_shifted(order(0.5), 2.0).unwrap() - 0.549_306_144_3).abs() < 1e-9);
    assert!((legendre_q_shifted(order(1.5), 2.0).unwrap() - 0.098_612_288_7).abs() < 1e-9);
    for &z in &[1.0 + 1e-6, 1.001, 1.3, 4.0, 50.0, 1e3] {
        assert!((legendre_q_shifted(order(0.5), z).unwrap() - q0(z)).abs() < 1e-9, "Q0({z})");
        assert!((legendre_q_shifted(order(1.5), z).unwrap() - q1(z)).abs() < 1e-9, "Q1({z})");
    }
    assert!(matches!(legendre_q_shifted(order(1.0), 1.0), Err(SpecError::Domain { .. })));
}

#[test]
fn legendre_q_frozen_values() {
    let table = [
        (0.8, 1.000_001, 6.846_305_873_297_467),
        (3.7, 1.5, 0.016_778_691_577_960_395),
        (0.0, 1000.0, 0.070_248_160_481_942_09),
        (2.2, 10.0, 0.000_349_551_441_471_333_35),
    ];
    for (nu, z, want) in table {
        let got = legendre_q_shifted(order(nu), z).unwrap();
        assert!((got - want).abs() < 1e-9, "Q at nu {nu} Z {z}: {got} vs {want}");
    }
}

#[test]
fn legendre_q_decreases_in_z() {
    for &nu in &[0.0, 0.5, 1.3, 4.0] {
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let z = 1.0 + 1e-4 * 1.6_f64.powi(k);
            let q = legendre_q_shifted(order(nu), z).unwrap();
            assert!(q < prev, "nu {nu} Z {z}");
            prev = q;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bessel_recurrence(nu in 1.0f64..10.0, z in 0.1f64..40.0) {
        let lhs = j(nu - 1.0, z) + j(nu + 1.0, z);
        let rhs = 2.0 * nu / z * j(nu, z);
        prop_assert!((lhs - rhs).abs() < 1e-8);
    }

    #[test]
    fn bessel_bounded_by_one(nu in 0.0f64..12.0, z in 0.0f64..60.0) {
        prop_assert!(j(nu, z).abs() <= 1.0);
    }

    // Rounding in J is amplified by 4/h² = 4e8 in the second difference,
    // so the residual check is held where J is close to correctly rounded.
    #[test]
    fn bessel_ode_residual(nu in 0.0f64..10.0, z in 0.5f64..3.0) {
        let h = 1e-4;
        let (jm, j0, jp) = (j(nu, z - h), j(nu, z), j(nu, z + h));
        let d2 = (jp - 2.0 * j0 + jm) / (h * h);
        let d1 = (jp - jm) / (2.0 * h);
        let res = z * z * d2 + z * d1 + (z * z - nu * nu) * j0;
        prop_assert!(res.abs() < 1e-6, "residual {}", res);
    }

    #[test]
    fn gamma_recurrence(x in 0.5f64..30.0) {
        let lhs = gamma(x + 1.0).unwrap();
        prop_assert!(((lhs - x * gamma(x).unwrap()) / lhs).abs() < 1e-12);
    }
}
