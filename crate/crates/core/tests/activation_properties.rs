use hybridact::activation::{
    eval, eval_batch, eval_derivative, gate_alpha, properties_table, ActivationKind, ActivationParams, K_GRID,
};
use hybridact::gradcheck::{central_difference, declared_exclusions};
use proptest::prelude::*;

fn p(k: f64) -> ActivationParams {
    ActivationParams::with_k(k)
}

fn kind_strategy() -> impl Strategy<Value = ActivationKind> {
    (0..ActivationKind::ALL.len()).prop_map(|i| ActivationKind::ALL[i])
}

/// Values computed with 40-digit arithmetic: (kind, k, x, f(x), f'(x)).
const HIGH_PRECISION: [(ActivationKind, f64, f64, f64, f64); 6] = [
    (ActivationKind::S4Literal, 30.0, -0.14, 0.456_371_932_405_023_42, -2.325_853_339_111_805_5e-4),
    (ActivationKind::S4Rescaled, 10.0, 0.3, 0.613_442_900_610_070_92, 0.311_916_586_186_811_41),
    (ActivationKind::S4Rescaled, 50.0, -0.05, 0.486_644_486_124_722_8, 0.225_642_812_333_424_15),
    (ActivationKind::Swish, 15.0, 1.5, 1.226_361_714_290_465_5, 1.041_294_154_299_142_9),
    (ActivationKind::Softplus, 15.0, -3.0, 0.048_587_351_573_742_06, 0.047_425_873_177_566_78),
    (ActivationKind::Elu, 15.0, -2.0, -0.864_664_716_763_387_3, 0.135_335_283_236_612_7),
];

#[test]
fn matches_high_precision_values() {
    for (kind, k, x, f, df) in HIGH_PRECISION {
        let got = eval(kind, &p(k), x).unwrap();
        let dgot = eval_derivative(kind, &p(k), x).unwrap();
        assert!((got - f).abs() <= 4.0 * f64::EPSILON * f.abs(), "{kind} f({x}) = {got}, want {f}");
        assert!((dgot - df).abs() <= 1e-13 * df.abs(), "{kind} f'({x}) = {dgot}, want {df}");
    }
}

#[test]
fn s4_literal_derivative_near_its_zero_is_accurate() {
    // The analytic value is right; the central difference carries the
    // truncation error h²f'''/6 that dominates this small derivative.
    let (kind, k, x, _, df) = HIGH_PRECISION[0];
    let fd = central_difference(|t| eval(kind, &p(k), t).unwrap(), x, 1e-5).unwrap();
    assert!((eval_derivative(kind, &p(k), x).unwrap() - df).abs() < 1e-15);
    assert!((fd - df).abs() > 1e-9);
}

#[test]
fn flagged_monotonic_kinds_are_nondecreasing_on_grid() {
    for kind in ActivationKind::ALL {
        // The literal S3 row is carried as published; its value jump at the
        // origin is checked separately below.
        if !properties_table(kind).monotonic || kind == ActivationKind::S3Literal {
            continue;
        }
        for k in K_GRID {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..2001 {
                let x = -10.0 + 20.0 * i as f64 / 2000.0;
                let v = eval(kind, &p(k), x).unwrap();
                assert!(v >= prev, "{kind} k={k} decreases at x={x}");
                prev = v;
            }
        }
    }
}

#[test]
fn s3_literal_flag_disagrees_with_its_values() {
    let k = p(5.0);
    assert!(properties_table(ActivationKind::S3Literal).monotonic);
    let left = eval(ActivationKind::S3Literal, &k, -0.01).unwrap();
    let right = eval(ActivationKind::S3Literal, &k, 0.01).unwrap();
    assert!(right < left);
}

#[test]
fn s4_literal_is_not_monotonic_for_steep_gates() {
    assert!(!properties_table(ActivationKind::S4Literal).monotonic);
    assert!(eval_derivative(ActivationKind::S4Literal, &p(10.0), 0.0).unwrap() < 0.0);
}

#[test]
fn s4_rescaled_derivative_has_no_zero_on_wide_grid() {
    for k in K_GRID {
        for i in 0..=200_000 {
            let x = -100.0 + 200.0 * i as f64 / 200_000.0;
            let d = eval_derivative(ActivationKind::S4Rescaled, &p(k), x).unwrap();
            assert!(d > 0.0, "k={k}: derivative {d} at x={x}");
        }
    }
}

#[test]
fn s3_literal_value_jumps_and_s3_continuous_does_not() {
    let f = |kind, x| eval(kind, &p(15.0), x).unwrap();
    assert_eq!(f(ActivationKind::S3Literal, 0.0), 0.5);
    assert!(f(ActivationKind::S3Literal, 1e-12) < 1e-11);
    assert!((f(ActivationKind::S3Continuous, 1e-12) - 0.5).abs() < 1e-9);
    assert!((f(ActivationKind::S3Continuous, -1e-12) - 0.5).abs() < 1e-9);
}

proptest! {
    #[test]
    fn gate_is_symmetric(k in 0.1f64..100.0, x in -50.0f64..50.0) {
        let s = gate_alpha(k, x).unwrap() + gate_alpha(k, -x).unwrap();
        prop_assert!((s - 1.0).abs() <= 1e-15, "sum {s}");
    }

    #[test]
    fn batch_is_bit_identical_to_scalar(
        kind in kind_strategy(),
        k in 1.0f64..60.0,
        xs in prop::collection::vec(-50.0f64..50.0, 0..64),
    ) {
        let mut out = vec![0.0; xs.len()];
        eval_batch(kind, &p(k), &xs, &mut out).unwrap();
        for (&x, &o) in xs.iter().zip(&out) {
            prop_assert_eq!(o.to_bits(), eval(kind, &p(k), x).unwrap().to_bits());
        }
    }

    #[test]
    fn derivative_matches_central_difference(kind in kind_strategy(), k in 1.0f64..60.0, x in -8.0f64..8.0) {
        let excl = declared_exclusions(kind);
        prop_assume!(excl.iter().all(|&e| (x - e).abs() > 1e-3));
        let fd = central_difference(|t| eval(kind, &p(k), t).unwrap(), x, 1e-5).unwrap();
        let d = eval_derivative(kind, &p(k), x).unwrap();
        // Absolute: covers steep gates where h²f'''/6 reaches ~1e-8.
        prop_assert!((fd - d).abs() <= 1e-7 * (1.0 + k * k / 100.0), "{} k={} x={}: {} vs {}", kind, k, x, d, fd);
    }

    #[test]
    fn s4_is_continuous(k in 1.0f64..60.0, x in -5.0f64..5.0, dx in 0.0f64..1e-9) {
        for kind in [ActivationKind::S4Literal, ActivationKind::S4Rescaled] {
            let a = eval(kind, &p(k), x).unwrap();
            let b = eval(kind, &p(k), x + dx).unwrap();
            // Lipschitz constant of S4 is below 1 + k/4.
            prop_assert!((a - b).abs() <= (1.0 + k / 4.0) * dx + 1e-15);
        }
    }

    #[test]
    fn s4_derivative_is_continuous_across_zero(k in 1.0f64..60.0, eps in 1e-12f64..1e-8) {
        for kind in [ActivationKind::S4Literal, ActivationKind::S4Rescaled] {
            let l = eval_derivative(kind, &p(k), -eps).unwrap();
            let r = eval_derivative(kind, &p(k), eps).unwrap();
            prop_assert!((l - r).abs() < 1e-5, "{}: {} vs {}", kind, l, r);
        }
    }

    #[test]
    fn bounded_kinds_stay_in_range(kind in kind_strategy(), k in 1.0f64..60.0, x in -700.0f64..700.0) {
        let props = properties_table(kind);
        let v = eval(kind, &p(k), x).unwrap();
        prop_assert!(v.is_finite());
        prop_assert!(v >= props.range_lo && v <= props.range_hi, "{} at {} = {}", kind, x, v);
    }
}
