use hybridact::activation::{Activation, ActivationKind, Variant};
use hybridact::data::{generate_synthetic_binary, SyntheticSpec, Targets, Task};
use hybridact::experiments::{mean_ci95, paired_t_test, t_quantile_975, RunResult, SeedRun, TaskKind};
use hybridact::matrix::Matrix;
use hybridact::nn::{
    adam_step, gradient_health, init_network, train, AdamState, Gradients, Layer, NetworkConfig, TrainConfig,
};
use proptest::prelude::*;

#[test]
fn t_quantiles_match_closed_forms() {
    // df = 1 is Cauchy; df = 2 has q = (2p − 1)·sqrt(2 / (1 − (2p − 1)²)).
    let cauchy = (std::f64::consts::PI * 0.475).tan();
    assert!((t_quantile_975(1.0) - cauchy).abs() < 1e-9 * cauchy);
    assert!((t_quantile_975(2.0) - 4.302_652_729_749_464).abs() < 1e-9);
    // df = 30 from a 30-digit root of the regularized incomplete beta CDF.
    assert!((t_quantile_975(30.0) - 2.042_272_456_301_238_3).abs() < 1e-9);
}

#[test]
fn ci_half_width_by_hand() {
    let (mean, half) = mean_ci95(&[0.90, 0.95, 1.00]).unwrap();
    assert!((mean - 0.95).abs() < 1e-15);
    // s = 0.05, n = 3.
    let want = 4.302_652_729_749_464 * 0.05 / 3f64.sqrt();
    assert!((half.unwrap() - want).abs() < 1e-9);
    assert_eq!(mean_ci95(&[0.7]), Some((0.7, None)));
    assert_eq!(mean_ci95(&[]), None);
}

#[test]
fn paired_t_test_closed_form() {
    // Differences 0.06, 0.05, 0.07: t = 0.06 / (0.01/√3) = 6√3, and with two
    // degrees of freedom the two-sided p is 1 − t/√(2 + t²).
    let r = paired_t_test(&[0.96, 0.97, 0.95], &[0.90, 0.92, 0.88]).unwrap();
    let t = 6.0 * 3f64.sqrt();
    assert!((r.t.unwrap() - t).abs() < 1e-9);
    assert!((r.p.unwrap() - 0.009_132_611_386_275_455).abs() < 1e-9);
    assert!(r.significant && !r.degenerate);
}

#[test]
fn constant_differences_are_degenerate() {
    // Every difference is 0.06 up to rounding: no spread, no t.
    let r = paired_t_test(&[0.96, 0.97, 0.95], &[0.90, 0.91, 0.89]).unwrap();
    assert!(r.degenerate && r.t.is_none() && !r.significant);
    assert!((r.mean_diff - 0.06).abs() < 1e-12);
}

fn scalar_net() -> hybridact::nn::DenseNetwork {
    let c = NetworkConfig::for_task(1, &[1], Task::Regression, Activation::plain(ActivationKind::Tanh));
    init_network(&c, 3).unwrap()
}

fn filled(net: &hybridact::nn::DenseNetwork, g: f64) -> Gradients {
    Gradients {
        layers: net
            .layers()
            .iter()
            .map(|l| Layer {
                weights: vec![g; l.weights.len()],
                bias: vec![g; l.bias.len()],
                ..l.clone()
            })
            .collect(),
    }
}

#[test]
fn adam_two_steps_by_hand() {
    let mut net = scalar_net();
    let start: Vec<f64> = (0..net.parameter_count()).map(|i| net.param(i)).collect();
    let mut state = AdamState::new(&net);
    let tc = TrainConfig::default();
    // Step 1: m̂ = g, v̂ = g², so the move is lr·g/(|g| + ε).
    let g = filled(&net, 0.5);
    adam_step(&mut net, &g, &mut state, &tc).unwrap();
    for (i, s) in start.iter().enumerate() {
        assert!((net.param(i) - s - -9.999_999_800_000_004e-4).abs() < 1e-17);
    }
    // Step 2 with g = −0.25: m = 0.02, v = 3.1225e-4, corrections 0.19 and
    // 1.999e-3.
    let g = filled(&net, -0.25);
    adam_step(&mut net, &g, &mut state, &tc).unwrap();
    for (i, s) in start.iter().enumerate() {
        assert!((net.param(i) - s - -1.266_337_012_921_538_4e-3).abs() < 1e-15);
    }
    assert_eq!(state.t, 2);
}

/// Plain gradient-descent logistic regression with an intercept.
fn logistic_fit(x: &Matrix, y: &[usize], epochs: usize, lr: f64) -> Vec<f64> {
    let d = x.cols();
    let mut w = vec![0.0; d + 1];
    for _ in 0..epochs {
        let mut g = vec![0.0; d + 1];
        for (row, &label) in x.iter_rows().zip(y) {
            let z = w[d] + row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            let err = 1.0 / (1.0 + (-z).exp()) - label as f64;
            for j in 0..d {
                g[j] += err * row[j];
            }
            g[d] += err;
        }
        let n = y.len() as f64;
        w.iter_mut().zip(&g).for_each(|(wi, gi)| *wi -= lr * gi / n);
    }
    w
}

fn accuracy(w: &[f64], x: &Matrix, y: &[usize]) -> f64 {
    let d = x.cols();
    let hits = x
        .iter_rows()
        .zip(y)
        .filter(|(row, &label)| {
            let z = w[d] + row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            usize::from(z > 0.0) == label
        })
        .count();
    hits as f64 / y.len() as f64
}

#[test]
fn generator_difficulty_under_logistic_probe() {
    for seed in 1..=10 {
        let ds = generate_synthetic_binary(&SyntheticSpec::with_seed(seed)).unwrap();
        let Targets::Classes(y) = &ds.targets else { panic!("binary targets") };
        let cut = ds.len() * 4 / 5;
        let train_idx: Vec<usize> = (0..cut).collect();
        let test_idx: Vec<usize> = (cut..ds.len()).collect();
        let (xt, xv) = (ds.features.select_rows(&train_idx), ds.features.select_rows(&test_idx));
        let w = logistic_fit(&xt, &y[..cut], 500, 0.5);
        let acc = accuracy(&w, &xv, &y[cut..]);
        assert!((0.90..=0.99).contains(&acc), "seed {seed}: probe accuracy {acc}");
    }
}

#[test]
fn sigmoid_gradients_vanish_with_depth() {
    let ds = generate_synthetic_binary(&SyntheticSpec::default()).unwrap();
    let rows: Vec<usize> = (0..256).collect();
    let batch = ds.subset(&rows);
    for depth in [4, 5] {
        for seed in 1..=3 {
            let c = NetworkConfig::for_task(20, &vec![100; depth], Task::Binary, Activation::plain(ActivationKind::Sigmoid));
            let net = init_network(&c, seed).unwrap();
            let h = gradient_health(&net, &batch.features, &batch.targets).unwrap();
            let ratio = h[0].mean_abs_grad / h[3].mean_abs_grad;
            assert!(ratio < 0.1, "depth {depth} seed {seed}: ratio {ratio}");
        }
    }
}

fn small_synthetic(seed: u64) -> hybridact::data::Dataset {
    generate_synthetic_binary(&SyntheticSpec {
        n: 300,
        ..SyntheticSpec::with_seed(seed)
    })
    .unwrap()
}

#[test]
fn training_is_deterministic() {
    let ds = small_synthetic(5);
    let c = NetworkConfig::for_task(20, &[16, 8], Task::Binary, Activation::s4(Variant::Rescaled, 10.0));
    let tc = TrainConfig {
        max_epochs: 8,
        ..TrainConfig::with_seed(4)
    };
    let (a, ha) = train(&c, &ds, &tc).unwrap();
    let (b, hb) = train(&c, &ds, &tc).unwrap();
    for i in 0..a.parameter_count() {
        assert_eq!(a.param(i).to_bits(), b.param(i).to_bits());
    }
    assert_eq!(ha, hb);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn early_stopping_honors_patience(seed in 1u64..1000, patience in 1usize..4, max_epochs in 4usize..12) {
        let ds = small_synthetic(seed);
        let c = NetworkConfig::for_task(20, &[8], Task::Binary, Activation::plain(ActivationKind::Relu));
        let tc = TrainConfig { max_epochs, patience, learning_rate: 0.05, ..TrainConfig::with_seed(seed) };
        let (_, h) = train(&c, &ds, &tc).unwrap();
        prop_assert!(h.epochs_run() <= max_epochs);
        prop_assert!(h.epochs_run() <= h.best_epoch + 1 + patience);
        if h.stopped_early {
            prop_assert_eq!(h.epochs_run(), h.best_epoch + 1 + patience);
        }
        let min = h.epochs.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(h.best_val_loss, min);
    }

    #[test]
    fn reported_mean_is_mean_of_seeds(metrics in prop::collection::vec(0.0f64..1.0, 1..8)) {
        let runs = metrics
            .iter()
            .enumerate()
            .map(|(i, &m)| SeedRun {
                seed: i as u64 + 1,
                metric: Some(m),
                epochs_to_convergence: Some(1),
                epochs_run: 1,
                best_epoch: Some(0),
                wall_clock_s: 0.0,
                error: None,
            })
            .collect();
        let r = RunResult::from_runs(TaskKind::Binary, Activation::plain(ActivationKind::Relu), "8".into(), runs);
        let n = metrics.len() as f64;
        let mean = metrics.iter().sum::<f64>() / n;
        prop_assert!((r.mean.unwrap() - mean).abs() <= 1e-15);
        if metrics.len() >= 2 {
            let s = (metrics.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let want = t_quantile_975(n - 1.0) * s / n.sqrt();
            prop_assert!((r.ci95.unwrap() - want).abs() <= 1e-12);
        } else {
            prop_assert!(r.ci95.is_none());
        }
    }
}
