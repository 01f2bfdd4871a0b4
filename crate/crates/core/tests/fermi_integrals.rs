mod common;

use gravistat_core::fermi::{
    fermi_derivative, fermi_eval, fermi_half_excess, fermi_inverse_half, FermiEvalConfig,
    FermiOrder,
};
use gravistat_core::Error;
use proptest::prelude::*;

const ORDERS: [FermiOrder; 3] = [
    FermiOrder::MinusHalf,
    FermiOrder::Half,
    FermiOrder::ThreeHalves,
];

fn cfg() -> FermiEvalConfig {
    FermiEvalConfig::default()
}

fn f(order: FermiOrder, z: f64) -> f64 {
    fermi_eval(order, z, &cfg()).unwrap()
}

#[test]
fn eta_oracle_is_self_consistent() {
    // η(1) = ln 2 and η(2) = π²/12 pin down the acceleration.
    assert!((common::dirichlet_eta(1.0) - std::f64::consts::LN_2).abs() < 1e-15);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((common::dirichlet_eta(2.0) - pi2 / 12.0).abs() < 1e-15);
}

#[test]
fn values_at_zero_match_eta_series() {
    let half = f(FermiOrder::Half, 0.0);
    let minus = f(FermiOrder::MinusHalf, 0.0);
    assert!((half - common::fermi_half_at_zero()).abs() < 1e-8, "{half}");
    assert!(
        (minus - common::fermi_minus_half_at_zero()).abs() < 1e-8,
        "{minus}"
    );
    assert!((half - 0.678_093_8).abs() < 1e-6);
    assert!((minus - 1.072_154_9).abs() < 1e-6);
}

#[test]
fn boltzmann_tail() {
    let v = f(FermiOrder::Half, -30.0);
    let oracle = common::boltzmann_series(0.5, FermiOrder::Half.gamma_alpha_plus_one(), -30.0);
    assert!(((v - oracle) / oracle).abs() < 1e-10, "{v} vs {oracle}");
    assert!((v - 8.2925e-14).abs() < 1e-17);
    for order in ORDERS {
        for z in [-5.0, -12.0, -24.0, -26.0, -40.0] {
            let v = f(order, z);
            let oracle = common::boltzmann_series(order.alpha(), order.gamma_alpha_plus_one(), z);
            assert!(
                ((v - oracle) / oracle).abs() < 1e-9,
                "{order:?} at {z}: {v} vs {oracle}"
            );
        }
        let ratio = f(order, -50.0) / (order.gamma_alpha_plus_one() * (-50f64).exp());
        assert!((ratio - 1.0).abs() < 1e-12);
    }
}

#[test]
fn degenerate_limit() {
    let z = 1e4;
    let v = f(FermiOrder::Half, z);
    assert!((3.0 * v / (2.0 * z.powf(1.5)) - 1.0).abs() < 1e-7);
    for order in ORDERS {
        let a1 = order.alpha() + 1.0;
        let z: f64 = 200.0;
        let leading = z.powf(a1) / a1;
        let a = order.alpha();
        let correction = std::f64::consts::PI.powi(2) * a * (a + 1.0) / (6.0 * z * z);
        let rel = f(order, z) / leading - 1.0;
        assert!(
            (rel - correction).abs() < 1e-8,
            "{order:?}: {rel} vs {correction}"
        );
    }
}

#[test]
fn appendix_inequality_on_log_grid() {
    let grid = common::symmetric_log_grid(40.0, 1001);
    assert_eq!(grid.len(), 1001);
    for z in grid {
        let lhs = f(FermiOrder::MinusHalf, z);
        let rhs = 2.0 * f(FermiOrder::Half, z);
        assert!(lhs <= rhs, "f_-1/2({z}) = {lhs} > 2 f_1/2 = {rhs}");
        let excess = fermi_half_excess(z, &cfg()).unwrap();
        assert!(excess > 0.0);
        assert!(((rhs - lhs) - 2.0 * excess).abs() <= 1e-8 * rhs.max(1.0));
    }
}

#[test]
fn derivative_examples() {
    let d32 = fermi_derivative(FermiOrder::ThreeHalves, 0.0, &cfg()).unwrap();
    assert!((d32 - 1.017_140_7).abs() < 1e-5);
    let d12 = fermi_derivative(FermiOrder::Half, 0.0, &cfg()).unwrap();
    assert!((d12 - 0.536_077_5).abs() < 1e-5);
    let tail = fermi_derivative(FermiOrder::Half, -20.0, &cfg()).unwrap();
    let v = f(FermiOrder::Half, -20.0);
    assert!(((tail - v) / v).abs() < 1e-6);
    assert!(matches!(
        fermi_derivative(FermiOrder::MinusHalf, 0.0, &cfg()),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn derivative_matches_central_differences() {
    let h = 1e-4;
    for order in [FermiOrder::Half, FermiOrder::ThreeHalves] {
        for i in 0..=40 {
            let z = -10.0 + 0.5 * i as f64;
            let fd = (f(order, z + h) - f(order, z - h)) / (2.0 * h);
            let d = fermi_derivative(order, z, &cfg()).unwrap();
            assert!((fd - d).abs() < 1e-5, "{order:?} at {z}: {d} vs {fd}");
        }
    }
}

#[test]
fn inverse_examples() {
    let v = f(FermiOrder::Half, 3.0);
    assert!((fermi_inverse_half(v, &cfg()).unwrap() - 3.0).abs() < 1e-8);
    assert!(fermi_inverse_half(0.678_093_8, &cfg()).unwrap().abs() < 1e-5);
    let big = fermi_inverse_half(2.0 / 3.0 * 1e6, &cfg()).unwrap();
    assert!((big / 1e4 - 1.0).abs() < 1e-3);
    for v in [0.0, -1.0, f64::NAN] {
        assert!(fermi_inverse_half(v, &cfg()).is_err());
    }
}

#[test]
fn round_trip_on_grid() {
    for i in 0..=400 {
        let z = -20.0 + 0.1 * i as f64;
        let back = fermi_inverse_half(f(FermiOrder::Half, z), &cfg()).unwrap();
        assert!((back - z).abs() < 1e-8, "{z} -> {back}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strictly_increasing(a in -50.0f64..50.0, b in -50.0f64..50.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for order in ORDERS {
            prop_assert!(f(order, lo) < f(order, hi));
        }
    }

    #[test]
    fn positive_everywhere(z in -700.0f64..700.0) {
        for order in ORDERS {
            prop_assert!(f(order, z) > 0.0);
        }
    }

    #[test]
    fn inverse_is_monotone(a in 1e-8f64..1e5, b in 1e-8f64..1e5) {
        prop_assume!((a / b - 1.0).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(fermi_inverse_half(lo, &cfg()).unwrap() < fermi_inverse_half(hi, &cfg()).unwrap());
    }

    #[test]
    fn round_trip(z in -20.0f64..20.0) {
        let back = fermi_inverse_half(f(FermiOrder::Half, z), &cfg()).unwrap();
        prop_assert!((back - z).abs() < 1e-8);
    }
}
