use std::f64::consts::{FRAC_PI_2, PI};

use diffract::kernel::*;
use diffract::quadrature::integrate_adaptive;
use proptest::prelude::*;

fn pt(r1: f64, r2: f64, t: f64) -> KernelPoint {
    KernelPoint::new(r1, r2, t).unwrap()
}

fn mode(n: i64, a: f64) -> ModeParams {
    ModeParams::new(n, a).unwrap()
}

#[test]
fn regions() {
    assert_eq!(classify_region(pt(2.0, 0.5, 1.0), 1e-9), Region::I);
    assert_eq!(classify_region(pt(1.0, 1.0, 1.0), 1e-9), Region::II);
    assert_eq!(classify_region(pt(1.0, 1.0, 3.0), 1e-9), Region::III);
    assert_eq!(classify_region(pt(2.0, 0.5, 1.5), 1e-9), Region::MainCone);
    assert_eq!(classify_region(pt(1.0, 1.0, 2.0 + 1e-10), 1e-9), Region::DiffractiveCone);
    assert!(KernelPoint::new(0.0, 1.0, 1.0).is_err());
    assert!(ModeParams::new(0, -1.0).is_err());
    assert_eq!(mode(3, 16.0).nu, 5.0);
}

#[test]
fn cone_points_are_refused() {
    let err = mode_kernel(mode(0, 0.25), pt(1.0, 1.0, 2.0)).unwrap_err();
    assert!(matches!(err, KernelError::ConeProximity { region: Region::DiffractiveCone, .. }));
    let err = mode_kernel(mode(0, 0.25), pt(1.5, 0.5, 1.0)).unwrap_err();
    assert!(matches!(err, KernelError::ConeProximity { region: Region::MainCone, .. }));
}

#[test]
fn region_one_is_zero() {
    for n in 0..5 {
        assert_eq!(mode_kernel(mode(n, 0.7), pt(3.0, 0.5, 1.2)).unwrap(), 0.0);
    }
}

// For ν = 1/2, ∫ sin(tλ) J_½(λr₁) J_½(λr₂) dλ has the closed form
// 1/(2√(r₁r₂)) between the cones and 0 inside the inner cone.
#[test]
fn half_order_closed_form() {
    let m = mode(0, 0.25);
    for (r1, r2, t) in [(1.0, 1.0, 1.0), (0.3, 2.0, 2.0), (1.7, 0.9, 1.1), (5.0, 4.0, 8.9), (1.0, 1.0, 1.999)] {
        let k = mode_kernel(m, pt(r1, r2, t)).unwrap();
        let exact = 0.5 / (r1 * r2).sqrt();
        assert!((k - exact).abs() < 1e-11 * exact, "{r1} {r2} {t}: {k} vs {exact}");
    }
    for (r1, r2, t) in [(1.0, 1.0, 2.5), (0.2, 0.3, 10.0), (1.0, 1.0, 2.001)] {
        let k = mode_kernel(m, pt(r1, r2, t)).unwrap();
        assert!(k.abs() < 1e-11, "{r1} {r2} {t}: {k}");
    }
}

#[test]
fn free_mode_region_three_is_plain_integral() {
    // in region III the denominator never vanishes, so a dense adaptive rule
    // on the raw integrand is an independent check
    let (r1, r2, t) = (0.8, 1.3, 2.6);
    for n in [0i64, 1, 4] {
        let raw = integrate_adaptive(
            |s: f64| (n as f64 * s).cos() / (t * t - r1 * r1 - r2 * r2 + 2.0 * r1 * r2 * s.cos()).sqrt(),
            0.0,
            PI,
            1e-13,
        )
        .unwrap()
        .value
            / PI;
        let k = mode_kernel(mode(n, 0.0), pt(r1, r2, t)).unwrap();
        assert!((k - raw).abs() < 1e-11, "n = {n}: {k} vs {raw}");
    }
}

#[test]
fn diffractive_integral_small_beta() {
    // ∫₀^β e^{-sν}(β²-s²)^{-1/2} ds = π/2 - νβ + O(β²)
    for nu in [0.5, 1.2, 3.7] {
        let beta = 1e-4;
        let v = diffractive_integral(nu, beta).unwrap();
        assert!((v - (FRAC_PI_2 - nu * beta)).abs() < 1e-7, "{nu}: {v}");
    }
    assert!((diffractive_integral(2.0, 1e-9).unwrap() - FRAC_PI_2).abs() < 1e-8);
    assert!(diffractive_integral(1.0, 0.0).is_err());
}

#[test]
fn diffractive_integral_substitution_oracle() {
    // s = β sin φ removes the endpoint singularity
    for (nu, beta) in [(0.0, 1.0), (0.7, 2.5), (3.0, 0.1)] {
        let f = |phi: f64| {
            let x = beta * phi.sin();
            let c = phi.cos();
            let gap = beta * c * c / (1.0 + phi.sin());
            let denom = 4.0 * (0.5 * (beta + x)).sinh() * (0.5 * gap).sinh();
            (-nu * x).exp() * beta * c / denom.sqrt()
        };
        let oracle = integrate_adaptive(f, 0.0, FRAC_PI_2, 1e-13).unwrap().value;
        let v = diffractive_integral(nu, beta).unwrap();
        assert!((v - oracle).abs() < 1e-8, "{nu} {beta}: {v} vs {oracle}");
    }
}

#[test]
fn jump_formula_and_flags() {
    assert_eq!(diffractive_jump(mode(0, 0.25), 1.0, 1.0), -0.5);
    for n in 0..6 {
        assert_eq!(diffractive_jump(mode(n, 0.0), 1.3, 0.4), 0.0);
    }
    assert_eq!(diffractive_jump(mode(1, 3.0), 1.0, 1.0), 0.0);
    assert!(!is_mode_jump_nonzero(1, 3.0));
    assert!(is_mode_jump_nonzero(0, 0.25));
    assert!(!is_mode_jump_nonzero(2, 0.0));
    // a = m² + 2|n|m
    assert!(!is_mode_jump_nonzero(3, 2.0 * 3.0 * 2.0 + 4.0));
    assert!(is_mode_jump_nonzero(3, 2.0 * 3.0 * 2.0 + 4.5));
}

#[test]
fn cone_scan_reproduces_jump() {
    let scan = cone_limits(mode(0, 0.25), 1.0, 2.0, &default_deltas(1.0, 2.0)).unwrap();
    assert_eq!(scan.samples.len(), 3);
    assert!((scan.jump_estimate + 0.5).abs() < 1e-6, "{}", scan.jump_estimate);

    // the jump carries the (r₁r₂)^{-1/2} prefactor
    let scan = cone_limits(mode(0, 0.25), 0.5, 2.0, &default_deltas(0.5, 2.0)).unwrap();
    assert!((scan.jump_estimate + 0.5 / 0.75f64.sqrt()).abs() < 1e-6);
}

#[test]
fn free_case_has_no_jump() {
    for n in 0..=10 {
        let scan = cone_limits(mode(n, 0.0), 1.0, 2.0, &default_deltas(1.0, 2.0)).unwrap();
        assert!(scan.jump_estimate.abs() < 1e-6, "n = {n}: {}", scan.jump_estimate);
    }
}

#[test]
fn jump_consistency_grid() {
    for a in [0.25, 0.5, 2.0, 3.0] {
        for n in 0..3 {
            for (r2, t) in [(0.5, 2.0), (1.0, 3.0), (2.0, 2.5)] {
                let m = mode(n, a);
                let scan = cone_limits(m, r2, t, &default_deltas(r2, t)).unwrap();
                let expected = diffractive_jump(m, t - r2, r2);
                assert!((scan.jump_estimate - expected).abs() < 1e-6, "{a} {n} {r2} {t}");
            }
        }
    }
}

#[test]
fn cone_scan_input_checks() {
    let m = mode(0, 0.25);
    assert!(cone_limits(m, 2.0, 1.0, &[1e-3]).is_err());
    assert!(cone_limits(m, 1.0, 2.0, &[1e-3, 2e-3]).is_err());
    assert!(cone_limits(m, 1.0, 2.0, &[]).is_err());
}

#[test]
fn extrapolation_removes_log_term() {
    let f = |d: f64| 0.3 + 2.0 * d * d.ln() - 5.0 * d;
    let xs = [1e-2, 5e-3, 2.5e-3];
    let ys: Vec<f64> = xs.iter().map(|&d| f(d)).collect();
    assert!((extrapolate_to_zero(&xs, &ys) - 0.3).abs() < 1e-13);
}

#[test]
fn free_synthesis_matches_propagator() {
    let (r1, r2, dth) = (1.0, 1.5, 0.3);
    let dist2 = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * f64::cos(dth);
    let free = |t: f64| 1.0 / (2.0 * PI * (t * t - dist2).sqrt());

    // smooth in angle inside the inner cone: geometric convergence
    let s = synthesize_kernel(0.0, pt(r1, r2, 3.0), dth, 40).unwrap();
    assert!((s.value.re - free(3.0)).abs() < 1e-12);

    // between the cones the angular profile has inverse square-root edges
    let mut last = f64::INFINITY;
    for n_max in [50, 100, 200, 400] {
        let s = synthesize_kernel(0.0, pt(r1, r2, 1.0), dth, n_max).unwrap();
        let err = (s.fejer.re - free(1.0)).abs() / free(1.0);
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-3, "{last}");
}

#[test]
fn synthesis_region_one_and_reality() {
    let s = synthesize_kernel(0.5, pt(3.0, 1.0, 1.0), 0.7, 20).unwrap();
    assert_eq!(s.value.re, 0.0);
    assert_eq!(s.value.im, 0.0);
    let s = synthesize_kernel(0.5, pt(1.0, 1.2, 1.5), 0.0, 30).unwrap();
    assert_eq!(s.value.im, 0.0);
    assert_eq!(s.modes.len(), 31);
}

#[test]
fn modes_decay() {
    let s = synthesize_kernel(0.5, pt(1.0, 1.2, 3.0), 0.0, 40).unwrap();
    let mags: Vec<f64> = s.modes.iter().map(|k| k.abs()).collect();
    // monotone until the quadrature rounding floor
    let resolved: Vec<f64> = mags.iter().copied().take_while(|m| *m > 1e-12 * mags[0]).collect();
    assert!(resolved.len() > 10);
    assert!(resolved.windows(2).all(|w| w[1] <= w[0]));
    assert!(s.last_mode < 1e-6 * mags[0]);
}

#[test]
fn lipschitz_hankel_examples() {
    let lh = verify_lipschitz_hankel(0.5, 1.0, 1.0, 1.0).unwrap();
    assert!(lh.residual < 1e-6);
    // at ν = 1/2 the left side is (2π√(r₁r₂))⁻¹ ln((t²+(r₁+r₂)²)/(t²+(r₁-r₂)²))
    let closed = (5.0f64).ln() / (2.0 * PI);
    assert!((lh.lhs - closed).abs() < 1e-10);
    let lh = verify_lipschitz_hankel(0.8, 0.7, 1.3, 2.0).unwrap();
    assert!(lh.residual < 1e-6);
    let swapped = verify_lipschitz_hankel(0.8, 1.3, 0.7, 2.0).unwrap();
    assert!(swapped.residual < 1e-6);
    assert!((swapped.rhs - lh.rhs).abs() < 1e-14);
}

fn region_point() -> impl Strategy<Value = KernelPoint> {
    (0.1f64..3.0, 0.1f64..3.0, 0.05f64..8.0).prop_map(|(r1, r2, t)| pt(r1, r2, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric(p in region_point(), n in 0i64..6, a in 0.0f64..4.0) {
        let m = mode(n, a);
        match (mode_kernel(m, p), mode_kernel(m, p.swapped())) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn half_order_vanishes_inside(r1 in 0.1f64..3.0, r2 in 0.1f64..3.0, gap in 1e-3f64..5.0) {
        let k = mode_kernel(mode(0, 0.25), pt(r1, r2, r1 + r2 + gap)).unwrap();
        prop_assert!(k.abs() < 1e-10 / (r1 * r2).sqrt());
    }

    #[test]
    fn diffractive_integral_decreases_in_nu(beta in 1e-3f64..5.0, nu in 0.0f64..5.0, dnu in 0.01f64..2.0) {
        let lo = diffractive_integral(nu, beta).unwrap();
        let hi = diffractive_integral(nu + dnu, beta).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn lipschitz_hankel_holds(nu in 0.0f64..4.0, r1 in 0.3f64..2.0, r2 in 0.3f64..2.0, t in 0.5f64..3.0) {
        let lh = verify_lipschitz_hankel(nu, r1, r2, t).unwrap();
        prop_assert!(lh.residual < 1e-6, "{:?}", lh);
    }
}
