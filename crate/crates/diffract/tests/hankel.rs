use diffract::hankel::*;
use diffract::specfun::{bessel_j, BesselOrder};
use proptest::prelude::*;

fn gaussian_field(h: f64) -> RadialField {
    let grid = RadialGrid::graded(h, 12.0).unwrap();
    RadialField::sample(&grid, |r| (-0.5 * r * r).exp()).unwrap()
}

fn bump(r: f64) -> f64 {
    // smooth, supported on [1, 4], vanishing to all orders at the ends
    if r <= 1.0 || r >= 4.0 {
        0.0
    } else {
        let x = (2.0 * r - 5.0) / 3.0;
        (-1.0 / (1.0 - x * x)).exp()
    }
}

#[test]
fn grids_validate() {
    assert!(RadialGrid::new(vec![0.0, 1.0]).is_err());
    assert!(RadialGrid::new(vec![1.0, 1.0]).is_err());
    let g = RadialGrid::graded(0.05, 12.0).unwrap();
    assert!(g.points()[0] > 0.0 && (g.r_max() - 12.0).abs() < 1e-12);
    assert!(g.points().windows(2).all(|w| w[1] - w[0] <= 0.05 * 1.0000001));
    let f = RadialField::new(g.clone(), vec![0.0; 3]);
    assert!(matches!(f, Err(HankelError::LengthMismatch { .. })));
}

#[test]
fn gaussian_is_self_reciprocal() {
    let g = gaussian_field(0.05);
    let lam = RadialGrid::uniform(0.05, 4.0).unwrap();
    let h = hankel_transform(&g, BesselOrder::new(0.0).unwrap(), &lam).unwrap();
    let err = lam.points().iter().zip(&h.values).map(|(l, v)| (v - (-0.5 * l * l).exp()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "max error {err:e}");
}

#[test]
fn zero_field_and_linearity() {
    let grid = RadialGrid::graded(0.1, 12.0).unwrap();
    let zero = RadialField::sample(&grid, |_| 0.0).unwrap();
    let order = BesselOrder::new(1.3).unwrap();
    let lam = RadialGrid::uniform(0.25, 4.0).unwrap();
    assert!(hankel_transform(&zero, order, &lam).unwrap().values.iter().all(|v| *v == 0.0));
    assert_eq!(verify_involution(&zero, order).unwrap(), 0.0);
    let g = RadialField::sample(&grid, |r| r * (-r * r).exp()).unwrap();
    let g2 = RadialField::sample(&grid, |r| 2.0 * r * (-r * r).exp()).unwrap();
    let a = hankel_transform(&g, order, &lam).unwrap();
    let b = hankel_transform(&g2, order, &lam).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert_eq!(2.0 * x, *y);
    }
}

#[test]
fn fat_tail_is_rejected() {
    let grid = RadialGrid::graded(0.1, 12.0).unwrap();
    let g = RadialField::sample(&grid, |r| 1.0 / (1.0 + r * r)).unwrap();
    let e = hankel_transform(&g, BesselOrder::new(0.0).unwrap(), &grid).unwrap_err();
    assert!(matches!(e, HankelError::TailTooFat { .. }));
}

#[test]
fn radial_operator_examples() {
    let grid = RadialGrid::uniform(1e-2, 3.0).unwrap();
    let c = RadialField::sample(&grid, |_| 2.5).unwrap();
    let out = apply_radial_operator(&c, 0.0).unwrap();
    assert!(out.field.values[1..grid.len() - 1].iter().all(|v| v.abs() < 1e-9));
    assert_eq!(out.one_sided, vec![0, grid.len() - 1]);
    let sq = RadialField::sample(&grid, |r| r * r).unwrap();
    let out = apply_radial_operator(&sq, 0.0).unwrap();
    assert!(out.field.values.iter().all(|v| (v - 4.0).abs() < 1e-8));
    let small = RadialGrid::uniform(0.1, 1.0).unwrap();
    let f = RadialField::sample(&small, |r| r).unwrap();
    assert!(matches!(apply_radial_operator(&f, 0.0), Err(HankelError::GridTooCoarse(10))));
}

#[test]
fn bessel_is_an_eigenfunction_of_the_radial_operator() {
    let grid = RadialGrid::uniform(1e-3, 10.0).unwrap();
    for &(nu, lam) in &[(0.5, 1.0), (1.7, 2.0), (3.0, 0.7)] {
        let order = BesselOrder::new(nu).unwrap();
        let f = RadialField::sample(&grid, |r| bessel_j(order, lam * r).unwrap()).unwrap();
        let lf = apply_radial_operator(&f, nu).unwrap().field;
        let interior = 1..grid.len() - 1;
        let (mut num, mut den) = (0.0, 0.0);
        for i in interior {
            let r = grid.points()[i];
            let want = -lam * lam * f.values[i];
            num += (lf.values[i] - want).powi(2) * r;
            den += want * want * r;
        }
        assert!((num / den).sqrt() < 1e-2, "nu {nu}: {}", (num / den).sqrt());
    }
}

#[test]
fn involution_defect_is_small_and_shrinks() {
    let order = BesselOrder::new(0.0).unwrap();
    let coarse = verify_involution(&gaussian_field(0.1), order).unwrap();
    let fine = verify_involution(&gaussian_field(0.05), order).unwrap();
    assert!(fine < 1e-3, "{fine:e}");
    assert!(fine < coarse, "{fine:e} vs {coarse:e}");
}

#[test]
fn eigen_relation_and_plancherel() {
    let grid = RadialGrid::uniform(1e-2, 6.0).unwrap();
    let g = RadialField::sample(&grid, bump).unwrap();
    let lam = RadialGrid::uniform(0.25, 4.0).unwrap();
    for &nu in &[0.0, 0.5, 2.2] {
        let d = eigen_relation_defect(&g, BesselOrder::new(nu).unwrap(), &lam).unwrap();
        assert!(d < 1e-2, "nu {nu}: {d:e}");
    }
    let mut last = f64::INFINITY;
    for &h in &[0.4, 0.2, 0.1] {
        let lam = RadialGrid::uniform(h, 25.0).unwrap();
        let hg = hankel_transform(&g, BesselOrder::new(1.0).unwrap(), &lam).unwrap();
        let gap = (hg.norm() - g.norm()).abs() / g.norm();
        assert!(gap <= last);
        last = gap;
    }
    assert!(last < 1e-3, "{last:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transform_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, nu in 0.0f64..4.0) {
        let grid = RadialGrid::graded(0.2, 10.0).unwrap();
        let order = BesselOrder::new(nu).unwrap();
        let lam = RadialGrid::uniform(0.5, 3.0).unwrap();
        let f = |r: f64| (-r * r).exp();
        let g = |r: f64| r * r * (-0.5 * r * r).exp();
        let hf = hankel_transform(&RadialField::sample(&grid, f).unwrap(), order, &lam).unwrap();
        let hg = hankel_transform(&RadialField::sample(&grid, g).unwrap(), order, &lam).unwrap();
        let hs = hankel_transform(&RadialField::sample(&grid, |r| a * f(r) + b * g(r)).unwrap(), order, &lam).unwrap();
        for i in 0..lam.len() {
            prop_assert!((hs.values[i] - a * hf.values[i] - b * hg.values[i]).abs() < 1e-12);
        }
    }
}
