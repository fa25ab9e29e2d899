mod common;

use habitat_core::special_functions::{bessel_j, bessel_k, eval_k, BesselOrder, J0_FIRST_ZERO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn log_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

#[test]
fn j_matches_exact_series() {
    for x in log_grid(50, 1e-3, 20.0) {
        for (order, n) in [(BesselOrder::Zero, 0), (BesselOrder::One, 1)] {
            let got = bessel_j(order, x).unwrap();
            let want = common::bessel_j_exact(n, x);
            // J has zeros on the grid range; near them compare absolutely.
            let err = (got - want).abs() / want.abs().max(1e-3);
            assert!(err < 1e-9, "J{n}({x}) = {got}, series {want}");
        }
    }
}

#[test]
fn k_matches_integral_representation() {
    for x in log_grid(50, 1e-3, 20.0) {
        for (order, nu) in [(BesselOrder::Zero, 0.0), (BesselOrder::One, 1.0)] {
            let got = bessel_k(order, x).unwrap();
            let want = common::bessel_k_quadrature(nu, x);
            assert!((got / want - 1.0).abs() < 1e-9, "K{nu}({x}) = {got}, quadrature {want}");
        }
    }
}

#[test]
fn k_at_one_reference() {
    let want = common::bessel_k_quadrature(0.0, 1.0);
    assert!((bessel_k(BesselOrder::Zero, 1.0).unwrap() / want - 1.0).abs() < 1e-10);
    assert!((want - 0.421_024_438_240_708_3).abs() < 1e-12);
}

#[test]
fn derivative_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let step = 1e-5;
    for _ in 0..100 {
        let x: f64 = rng.gen_range(0.05..50.0);
        let d = |o, f: fn(BesselOrder, f64) -> habitat_core::Result<f64>| {
            (f(o, x + step).unwrap() - f(o, x - step).unwrap()) / (2.0 * step)
        };
        let dj0 = d(BesselOrder::Zero, bessel_j);
        assert!((dj0 + bessel_j(BesselOrder::One, x).unwrap()).abs() < 1e-6, "J at {x}");
        let dk0 = d(BesselOrder::Zero, bessel_k);
        assert!((dk0 + bessel_k(BesselOrder::One, x).unwrap()).abs() < 1e-6, "K at {x}");
    }
}

#[test]
fn k_strictly_decreasing() {
    for order in [BesselOrder::Zero, BesselOrder::One] {
        let values: Vec<f64> = log_grid(400, 1e-6, 690.0)
            .into_iter()
            .map(|x| bessel_k(order, x).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        assert!(values.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn first_zero_of_j0() {
    assert!(bessel_j(BesselOrder::Zero, J0_FIRST_ZERO).unwrap().abs() < 1e-14);
    assert!((J0_FIRST_ZERO - 2.404_825_557_695_773).abs() < 1e-15);
    // Sign change straddles the constant.
    assert!(bessel_j(BesselOrder::Zero, J0_FIRST_ZERO - 1e-9).unwrap() > 0.0);
    assert!(bessel_j(BesselOrder::Zero, J0_FIRST_ZERO + 1e-9).unwrap() < 0.0);
}

#[test]
fn k_relative_error_bound_on_wide_range() {
    for x in log_grid(40, 1e-3, 600.0) {
        let e = eval_k(BesselOrder::Zero, x).unwrap();
        assert!(!e.underflow);
        if x <= 60.0 {
            let want = common::bessel_k_quadrature(0.0, x);
            assert!((e.value / want - 1.0).abs() < 1e-10, "K0({x})");
        }
    }
}
