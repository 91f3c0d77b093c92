//! Finite-difference oracle for activation derivatives and backpropagated
//! network gradients.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::activation::{eval, eval_derivative, ActivationKind, ActivationParams};
use crate::data::{Targets, Task};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{backward, init_network, loss_value, DenseNetwork, LossKind, NetworkConfig};
use crate::rng::{seeded, stream};

pub const DEFAULT_STEP: f64 = 1e-5;
pub const ACTIVATION_TOL: f64 = 1e-6;
pub const NETWORK_TOL: f64 = 1e-4;
/// Grid points closer than this to a declared kink are skipped.
pub const EXCLUSION_RADIUS: f64 = 1e-3;
const REL_FLOOR: f64 = 1e-8;

/// `(f(x + h) − f(x − h)) / 2h`, with `2h` taken as the rounded distance
/// between the two evaluation points.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    // Divide by the step actually taken after rounding x ± h.
    let (xp, xm) = (x + h, x - h);
    let (hi, lo) = (f(xp), f(xm));
    for value in [hi, lo] {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                value,
                context: "central difference",
            });
        }
    }
    Ok((hi - lo) / (xp - xm))
}

/// `|a − b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub kind: ActivationKind,
    pub params: ActivationParams,
    pub grid_points: usize,
    /// Over included points only.
    pub max_rel_error: f64,
    /// NaN only when every grid point was excluded.
    pub worst_x: f64,
    pub excluded_points: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Points the derivative check skips for `kind`: kinks, where no derivative
/// exists, and curvature breaks, where a central difference is only
/// first-order accurate.
pub fn declared_exclusions(kind: ActivationKind) -> Vec<f64> {
    kind.kink_points()
        .iter()
        .chain(kind.curvature_breaks())
        .copied()
        .collect()
}

/// Compares the analytic derivative with a central difference on `n`
/// evenly spaced points of `[lo, hi]`.
pub fn check_activation(
    kind: ActivationKind,
    params: &ActivationParams,
    lo: f64,
    hi: f64,
    n: usize,
    h: f64,
    tol: f64,
) -> Result<GradCheckReport> {
    if !(lo < hi) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs lo < hi and n >= 2, got [{lo}, {hi}] with n = {n}"
        )));
    }
    params.validate()?;
    let exclusions = declared_exclusions(kind);
    let mut excluded_points = Vec::new();
    let mut max_rel_error = 0.0;
    let mut worst_x = f64::NAN;
    let f = |x: f64| eval(kind, params, x).unwrap_or(f64::NAN);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        if exclusions.iter().any(|&p| (x - p).abs() <= EXCLUSION_RADIUS) {
            excluded_points.push(x);
            continue;
        }
        let err = match (eval_derivative(kind, params, x), central_difference(f, x, h)) {
            (Ok(a), Ok(b)) => relative_error(a, b),
            _ => f64::INFINITY,
        };
        if worst_x.is_nan() || !(err <= max_rel_error) {
            max_rel_error = err;
            worst_x = x;
        }
    }
    Ok(GradCheckReport {
        kind,
        params: *params,
        grid_points: n,
        max_rel_error,
        worst_x,
        excluded_points,
        tol,
        passed: max_rel_error < tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetCheckOptions {
    pub h: f64,
    pub tol: f64,
    /// Parameters sampled; all of them when the network has fewer.
    pub samples: usize,
    pub seed: u64,
}

impl Default for NetCheckOptions {
    fn default() -> Self {
        Self {
            h: DEFAULT_STEP,
            tol: NETWORK_TOL,
            samples: 128,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCheckReport {
    pub activation: String,
    pub loss: LossKind,
    pub params_checked: usize,
    pub max_rel_error: f64,
    /// Flat index of the parameter with the largest error.
    pub worst_param: usize,
    pub tol: f64,
    pub passed: bool,
}

/// Perturbs a seeded sample of parameters by `±h` and compares the loss
/// quotient with the backpropagated gradient. The network is not modified.
pub fn check_network_gradients(
    net: &DenseNetwork,
    inputs: &Matrix,
    targets: &Targets,
    loss: LossKind,
    opts: &NetCheckOptions,
) -> Result<NetworkCheckReport> {
    if inputs.rows() == 0 {
        return Err(Error::contract("gradient check needs a nonempty batch"));
    }
    if !net.all_finite() {
        return Err(Error::contract("gradient check needs finite parameters"));
    }
    let trace = net.forward(inputs)?;
    let grads = backward(net, &trace, targets, loss)?;

    let total = net.parameter_count();
    let mut rng = seeded(opts.seed, stream::GRADCHECK);
    let mut picked = if opts.samples >= total {
        (0..total).collect::<Vec<_>>()
    } else {
        index::sample(&mut rng, total, opts.samples).into_vec()
    };
    picked.sort_unstable();

    let mut probe = net.clone();
    let mut loss_at = |idx: usize, value: f64| -> Result<f64> {
        probe.set_param(idx, value);
        let trace = probe.forward(inputs)?;
        loss_value(loss, trace.logits(), targets)
    };
    let mut max_rel_error = 0.0;
    let mut worst_param = 0;
    for &idx in &picked {
        let theta = net.param(idx);
        let (tp, tm) = (theta + opts.h, theta - opts.h);
        let up = loss_at(idx, tp)?;
        let down = loss_at(idx, tm)?;
        loss_at(idx, theta)?;
        let numeric = (up - down) / (tp - tm);
        let err = relative_error(grads.get(idx), numeric);
        if !(err <= max_rel_error) {
            max_rel_error = err;
            worst_param = idx;
        }
    }
    Ok(NetworkCheckReport {
        activation: net.config().hidden_activation.id(),
        loss,
        params_checked: picked.len(),
        max_rel_error,
        worst_param,
        tol: opts.tol,
        passed: max_rel_error < opts.tol,
    })
}

/// Classes used by the cross-entropy probe batch.
pub const PROBE_CLASSES: usize = 3;

/// The task whose output head matches `loss`, for probe batches.
pub fn probe_task(loss: LossKind) -> Task {
    match loss {
        LossKind::Bce => Task::Binary,
        LossKind::Ce => Task::Multiclass {
            num_classes: PROBE_CLASSES,
        },
        LossKind::Mse => Task::Regression,
    }
}

/// A seeded batch of standard-normal inputs with targets shaped for `loss`:
/// labels in {0, 1}, labels in `0..PROBE_CLASSES`, or standard-normal values.
pub fn probe_batch(loss: LossKind, rows: usize, features: usize, seed: u64) -> (Matrix, Targets) {
    let mut rng = seeded(seed, stream::GRADCHECK);
    let data: Vec<f64> = (0..rows * features).map(|_| rng.sample(StandardNormal)).collect();
    let targets = match loss {
        LossKind::Bce => Targets::Classes((0..rows).map(|_| rng.random_range(0..2)).collect()),
        LossKind::Ce => Targets::Classes((0..rows).map(|_| rng.random_range(0..PROBE_CLASSES)).collect()),
        LossKind::Mse => Targets::Values((0..rows).map(|_| rng.sample(StandardNormal)).collect()),
    };
    (Matrix::from_vec(rows, features, data), targets)
}

/// Builds a freshly initialized network with `hidden` layers for `loss` and
/// checks its gradients on a probe batch.
pub fn check_fresh_network(
    activation: crate::activation::Activation,
    hidden: &[usize],
    loss: LossKind,
    rows: usize,
    features: usize,
    opts: &NetCheckOptions,
) -> Result<NetworkCheckReport> {
    let config = NetworkConfig::for_task(features, hidden, probe_task(loss), activation);
    let net = init_network(&config, opts.seed)?;
    let (inputs, targets) = probe_batch(loss, rows, features, opts.seed);
    check_network_gradients(&net, &inputs, &targets, loss, opts)
}
