use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::{NetworkConfig, OutputHead, TrainConfig};
use super::network::{backward_detailed, head_outputs, init_network, loss_value, summarize_health, DenseNetwork, LayerHealth};
use super::optim::{adam_step, AdamState};
use crate::data::{split_indices, Dataset, SplitSpec, Targets, Task};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, stream};

/// Rows used for the per-epoch gradient statistics.
const PROBE_ROWS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// Mean training loss over the epoch's minibatches.
    pub train_loss: f64,
    pub val_loss: f64,
    /// Accuracy for classification, MSE in original units for regression.
    pub val_metric: f64,
    /// One entry per hidden layer; empty when tracking is off.
    pub layer_stats: Vec<LayerHealth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Zero-based index into `epochs` of the lowest validation loss.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
    /// Derivative evaluations that landed exactly on a kink.
    pub kink_hits: u64,
}

impl TrainHistory {
    pub fn epochs_run(&self) -> usize {
        self.epochs.len()
    }
}

/// First epoch (1-based) whose validation loss is within 1% relative of the
/// run's minimum validation loss.
pub fn epochs_to_convergence(history: &TrainHistory) -> usize {
    let min = history
        .epochs
        .iter()
        .map(|e| e.val_loss)
        .fold(f64::INFINITY, f64::min);
    let threshold = min + 0.01 * min.abs();
    history
        .epochs
        .iter()
        .position(|e| e.val_loss <= threshold)
        .map_or(0, |i| i + 1)
}

fn check_task(config: &NetworkConfig, task: Task) -> Result<()> {
    let (head, dim) = OutputHead::for_task(task);
    if head != config.output_head || dim != config.output_dim {
        return Err(Error::contract(format!(
            "task {task:?} needs a {head:?} head with {dim} output(s), config has {:?} with {}",
            config.output_head, config.output_dim
        )));
    }
    Ok(())
}

/// Carves the validation rows out of `data`: stratified for classification,
/// the trailing rows for regression.
fn validation_split(data: &Dataset, tc: &TrainConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    let (train, val) = if data.task.is_classification() {
        let spec = SplitSpec::new(1.0 - tc.val_fraction, derive_seed(tc.seed, stream::VALIDATION), true);
        split_indices(data, &spec)?
    } else {
        let n = data.len();
        let n_val = (n as f64 * tc.val_fraction + 1e-9).floor() as usize;
        ((0..n - n_val).collect(), (n - n_val..n).collect())
    };
    if train.is_empty() || val.is_empty() {
        return Err(Error::contract(format!(
            "{} rows leave an empty training or validation split",
            data.len()
        )));
    }
    Ok((train, val))
}

/// Task metric for a network on a dataset: accuracy for classification, MSE
/// in the original target units for regression.
pub fn evaluate(net: &DenseNetwork, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::contract("cannot evaluate on an empty dataset"));
    }
    check_task(net.config(), data.task)?;
    let trace = net.forward(&data.features)?;
    Ok(metric_from_logits(net.config().output_head, trace.logits(), data))
}

fn metric_from_logits(head: OutputHead, logits: &crate::matrix::Matrix, data: &Dataset) -> f64 {
    let n = data.len() as f64;
    match &data.targets {
        Targets::Classes(c) => {
            let correct = c
                .iter()
                .enumerate()
                .filter(|&(b, &y)| predicted_class(head, logits.row(b)) == y)
                .count();
            correct as f64 / n
        }
        Targets::Values(v) => {
            let out = head_outputs(head, logits);
            let d = out.cols() as f64;
            let unscale = |z: f64| data.target_scaling.map_or(z, |s| s.inverse(z));
            let sse: f64 = out
                .as_slice()
                .iter()
                .zip(v)
                .map(|(&p, &y)| {
                    let e = unscale(p) - unscale(y);
                    e * e
                })
                .sum();
            sse / (n * d)
        }
    }
}

fn predicted_class(head: OutputHead, logits: &[f64]) -> usize {
    match head {
        OutputHead::SigmoidBinary => usize::from(logits[0] >= 0.0),
        _ => {
            let mut best = 0;
            for (i, &z) in logits.iter().enumerate() {
                if z > logits[best] {
                    best = i;
                }
            }
            best
        }
    }
}

/// Trains a freshly initialized network with Adam and early stopping, and
/// returns it with the best-epoch weights restored.
pub fn train(config: &NetworkConfig, data: &Dataset, tc: &TrainConfig) -> Result<(DenseNetwork, TrainHistory)> {
    config.validate()?;
    tc.validate()?;
    check_task(config, data.task)?;
    let net = init_network(config, tc.seed)?;
    train_from(net, data, tc)
}

/// Like [`train`], but continues from an existing network.
pub fn train_from(mut net: DenseNetwork, data: &Dataset, tc: &TrainConfig) -> Result<(DenseNetwork, TrainHistory)> {
    tc.validate()?;
    check_task(net.config(), data.task)?;
    let (mut train_idx, val_idx) = validation_split(data, tc)?;
    let val = data.subset(&val_idx);
    let probe = data.subset(&train_idx[..train_idx.len().min(PROBE_ROWS)]);
    let loss_kind = net.config().output_head.loss();

    let mut rng = seeded(tc.seed, stream::SHUFFLE);
    let mut adam = AdamState::new(&net);
    let mut epochs = Vec::with_capacity(tc.max_epochs);
    let mut best: Option<(usize, f64, DenseNetwork)> = None;
    let mut since_best = 0;
    let mut stopped_early = false;
    let mut kink_hits = 0u64;

    for epoch in 0..tc.max_epochs {
        train_idx.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in train_idx.chunks(tc.batch_size) {
            let x = data.features.select_rows(chunk);
            let y = data.targets.select(chunk);
            let trace = net.forward(&x)?;
            loss_sum += loss_value(loss_kind, trace.logits(), &y)? * chunk.len() as f64;
            let out = backward_detailed(&net, &trace, &y, loss_kind)?;
            kink_hits += out.kink_hits;
            adam_step(&mut net, &out.grads, &mut adam, tc)?;
        }
        if !net.all_finite() {
            return Err(Error::NonFinite {
                value: f64::NAN,
                context: "network parameters after an epoch",
            });
        }
        let val_trace = net.forward(&val.features)?;
        let val_loss = loss_value(loss_kind, val_trace.logits(), &val.targets)?;
        let val_metric = metric_from_logits(net.config().output_head, val_trace.logits(), &val);
        let layer_stats = if tc.track_gradients {
            let trace = net.forward(&probe.features)?;
            let out = backward_detailed(&net, &trace, &probe.targets, loss_kind)?;
            summarize_health(&out, probe.len())
        } else {
            Vec::new()
        };
        epochs.push(EpochRecord {
            train_loss: loss_sum / train_idx.len() as f64,
            val_loss,
            val_metric,
            layer_stats,
        });

        let improved = best.as_ref().is_none_or(|(_, b, _)| val_loss < *b);
        if improved {
            best = Some((epoch, val_loss, net.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= tc.patience {
                stopped_early = true;
                break;
            }
        }
    }

    if kink_hits > 0 {
        log::info!(
            "{}: {kink_hits} derivative evaluations hit a kink exactly; used the left derivative",
            net.config().hidden_activation.id()
        );
    }
    let (best_epoch, best_val_loss, best_net) = best.expect("max_epochs >= 1");
    Ok((
        best_net,
        TrainHistory {
            epochs,
            best_epoch,
            best_val_loss,
            stopped_early,
            kink_hits,
        },
    ))
}

/// Validation rows `train` would hold out for this dataset and config.
pub fn validation_rows(data: &Dataset, tc: &TrainConfig) -> Result<Dataset> {
    let (_, val) = validation_split(data, tc)?;
    Ok(data.subset(&val))
}
