use serde::{Deserialize, Serialize};

use super::runs::{architecture_id, parallel_map, run_prepared, ExperimentSpec, RunResult, DEFAULT_SEEDS};
use super::tasks::{prepare_task, DataOptions, TaskKind};
use crate::activation::{Activation, ActivationKind, Variant, K_GRID};
use crate::error::{Error, Result};
use crate::nn::{gradient_health, init_network, train_from, LayerHealth, NetworkConfig, TrainConfig};

/// The three architecture families of the convergence comparison.
pub fn convergence_architectures() -> Vec<Vec<usize>> {
    vec![vec![10], vec![50, 50], vec![100, 100, 100]]
}

/// Convergence table id: width, then depth (`100-3`).
pub fn convergence_id(hidden: &[usize]) -> String {
    match hidden.first() {
        Some(w) if hidden.iter().all(|h| h == w) => format!("{w}-{}", hidden.len()),
        _ => architecture_id(hidden),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSpec {
    pub task: TaskKind,
    pub architectures: Vec<Vec<usize>>,
    pub activations: Vec<Activation>,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub data: DataOptions,
}

impl ConvergenceSpec {
    /// S4 (k = 5), Swish and ReLU on the synthetic task, 30 epochs.
    pub fn new(variant: Variant) -> Self {
        Self {
            task: TaskKind::Binary,
            architectures: convergence_architectures(),
            activations: vec![
                Activation::s4(variant, 5.0),
                Activation::plain(ActivationKind::Swish),
                Activation::plain(ActivationKind::Relu),
            ],
            seeds: DEFAULT_SEEDS.to_vec(),
            train: TrainConfig {
                max_epochs: 30,
                ..TrainConfig::default()
            },
            data: DataOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub architecture: String,
    pub activation: Activation,
    pub epochs_per_seed: Vec<Option<usize>>,
    /// Mean over successful seeds.
    pub mean_epochs: Option<f64>,
    pub result: RunResult,
}

pub fn run_convergence_study(spec: &ConvergenceSpec, jobs: usize) -> Result<Vec<ConvergenceRecord>> {
    if spec.architectures.is_empty() {
        return Err(Error::InvalidParameter("no architectures given".into()));
    }
    let prepared = prepare_task(spec.task, &spec.data)?;
    let mut records = Vec::new();
    for hidden in &spec.architectures {
        let exp = ExperimentSpec {
            task: spec.task,
            activations: spec.activations.clone(),
            hidden_layers: hidden.clone(),
            seeds: spec.seeds.clone(),
            train: spec.train.clone(),
            data: spec.data.clone(),
        };
        for mut result in run_prepared(&prepared, &exp, jobs)? {
            result.architecture = convergence_id(hidden);
            records.push(ConvergenceRecord {
                architecture: result.architecture.clone(),
                activation: result.activation,
                epochs_per_seed: result.per_seed.iter().map(|s| s.epochs_to_convergence).collect(),
                mean_epochs: result.mean_epochs_to_convergence(),
                result,
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStage {
    Init,
    Trained,
}

impl ProbeStage {
    pub fn name(self) -> &'static str {
        match self {
            ProbeStage::Init => "init",
            ProbeStage::Trained => "trained",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradFlowSpec {
    pub task: TaskKind,
    pub depths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub seeds: Vec<u64>,
    pub width: usize,
    pub batch_rows: usize,
    pub train_epochs: usize,
    pub data: DataOptions,
}

impl GradFlowSpec {
    pub fn new(activations: Vec<Activation>) -> Self {
        Self {
            task: TaskKind::Binary,
            depths: vec![2, 3, 4, 5],
            activations,
            seeds: DEFAULT_SEEDS.to_vec(),
            width: 100,
            batch_rows: 256,
            train_epochs: 5,
            data: DataOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientHealthRecord {
    pub depth: usize,
    pub activation: Activation,
    pub seed: u64,
    pub stage: ProbeStage,
    /// One entry per hidden layer, input side first.
    pub layers: Vec<LayerHealth>,
    pub min_mean_grad: f64,
    pub max_mean_grad: f64,
    pub max_dead_fraction: f64,
}

impl GradientHealthRecord {
    fn new(depth: usize, activation: Activation, seed: u64, stage: ProbeStage, layers: Vec<LayerHealth>) -> Self {
        let means = layers.iter().map(|l| l.mean_abs_grad);
        let min_mean_grad = means.clone().fold(f64::INFINITY, f64::min);
        let max_mean_grad = means.fold(f64::NEG_INFINITY, f64::max);
        let max_dead_fraction = layers.iter().map(|l| l.dead_fraction).fold(0.0, f64::max);
        Self {
            depth,
            activation,
            seed,
            stage,
            layers,
            min_mean_grad,
            max_mean_grad,
            max_dead_fraction,
        }
    }
}

/// Gradient statistics of width-`width` networks of every depth, on a fixed
/// batch of standardized training rows, at initialization and after
/// `train_epochs` epochs of training.
pub fn run_gradient_flow_probe(spec: &GradFlowSpec, jobs: usize) -> Result<Vec<GradientHealthRecord>> {
    if spec.depths.contains(&0) || spec.width == 0 || spec.batch_rows == 0 || spec.train_epochs == 0 {
        return Err(Error::InvalidParameter("depths, width, batch and epochs must be >= 1".into()));
    }
    let prepared = prepare_task(spec.task, &spec.data)?;
    let train = &prepared.train;
    let rows: Vec<usize> = (0..spec.batch_rows.min(train.len())).collect();
    let batch = train.subset(&rows);
    let cases: Vec<(usize, Activation, u64)> = spec
        .depths
        .iter()
        .flat_map(|&d| {
            spec.activations
                .iter()
                .flat_map(move |&a| spec.seeds.iter().map(move |&s| (d, a, s)))
        })
        .collect();
    let out = parallel_map(jobs, &cases, |&(depth, act, seed)| -> Result<[GradientHealthRecord; 2]> {
        let hidden = vec![spec.width; depth];
        let config = NetworkConfig::for_task(train.num_features(), &hidden, train.task, act);
        let net = init_network(&config, seed)?;
        let at_init = gradient_health(&net, &batch.features, &batch.targets)?;
        let tc = TrainConfig {
            max_epochs: spec.train_epochs,
            patience: spec.train_epochs,
            track_gradients: false,
            ..TrainConfig::with_seed(seed)
        };
        let (trained, _) = train_from(net, train, &tc)?;
        let after = gradient_health(&trained, &batch.features, &batch.targets)?;
        Ok([
            GradientHealthRecord::new(depth, act, seed, ProbeStage::Init, at_init),
            GradientHealthRecord::new(depth, act, seed, ProbeStage::Trained, after),
        ])
    });
    let mut records = Vec::with_capacity(out.len() * 2);
    for r in out {
        records.extend(r?);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepSpec {
    pub task: TaskKind,
    pub k_values: Vec<f64>,
    pub variant: Variant,
    pub hidden_layers: Vec<usize>,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub data: DataOptions,
}

impl KSweepSpec {
    pub fn new(task: TaskKind, variant: Variant) -> Self {
        Self {
            task,
            k_values: K_GRID.to_vec(),
            variant,
            hidden_layers: super::runs::DEFAULT_HIDDEN.to_vec(),
            seeds: DEFAULT_SEEDS.to_vec(),
            train: TrainConfig::default(),
            data: DataOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepResult {
    pub task: TaskKind,
    pub k_values: Vec<f64>,
    /// Seed-mean metric per k.
    pub metrics: Vec<Option<f64>>,
    /// Best k by seed-mean metric; the smallest such k on ties.
    pub argbest: Option<f64>,
    pub results: Vec<RunResult>,
}

/// Index of the best score, preferring the first on ties; `None` entries are
/// skipped.
pub fn argbest(values: &[Option<f64>], higher_is_better: bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            let better = match best {
                None => true,
                Some((_, b)) => {
                    if higher_is_better {
                        v > b
                    } else {
                        v < b
                    }
                }
            };
            if better {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

pub fn run_k_sweep(spec: &KSweepSpec, jobs: usize) -> Result<KSweepResult> {
    if spec.k_values.is_empty() {
        return Err(Error::InvalidParameter("the k grid is empty".into()));
    }
    let exp = ExperimentSpec {
        task: spec.task,
        activations: spec.k_values.iter().map(|&k| Activation::s4(spec.variant, k)).collect(),
        hidden_layers: spec.hidden_layers.clone(),
        seeds: spec.seeds.clone(),
        train: spec.train.clone(),
        data: spec.data.clone(),
    };
    let prepared = prepare_task(spec.task, &spec.data)?;
    let results = run_prepared(&prepared, &exp, jobs)?;
    let metrics: Vec<Option<f64>> = results.iter().map(|r| r.mean).collect();
    let best = argbest(&metrics, spec.task.higher_is_better());
    Ok(KSweepResult {
        task: spec.task,
        k_values: spec.k_values.clone(),
        argbest: best.map(|i| spec.k_values[i]),
        metrics,
        results,
    })
}
