use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::mean_ci95;
use super::tasks::{prepare_task, DataOptions, PreparedTask, TaskKind};
use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::nn::{epochs_to_convergence, evaluate, train, NetworkConfig, TrainConfig};

/// Default hidden stack for the task benchmarks.
pub const DEFAULT_HIDDEN: [usize; 3] = [64, 32, 16];
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub task: TaskKind,
    pub activations: Vec<Activation>,
    pub hidden_layers: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Its `seed` is replaced by each entry of `seeds`.
    pub train: TrainConfig,
    pub data: DataOptions,
}

impl ExperimentSpec {
    pub fn new(task: TaskKind, activations: Vec<Activation>) -> Self {
        Self {
            task,
            activations,
            hidden_layers: DEFAULT_HIDDEN.to_vec(),
            seeds: DEFAULT_SEEDS.to_vec(),
            train: TrainConfig::default(),
            data: DataOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.activations.is_empty() {
            return Err(Error::InvalidParameter("an experiment needs at least one seed and one activation".into()));
        }
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return Err(Error::InvalidParameter("hidden layer widths must be >= 1".into()));
        }
        for a in &self.activations {
            a.params.validate()?;
        }
        self.train.validate()
    }
}

/// Architecture id such as `64-32-16`.
pub fn architecture_id(hidden: &[usize]) -> String {
    hidden.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

/// Outcome of one (activation, seed) training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    /// Test metric; `None` when training aborted.
    pub metric: Option<f64>,
    pub epochs_to_convergence: Option<usize>,
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
    pub wall_clock_s: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub task: TaskKind,
    pub activation: Activation,
    pub architecture: String,
    pub per_seed: Vec<SeedRun>,
    /// Mean over the successful seeds.
    pub mean: Option<f64>,
    /// 95% t-interval half-width; `None` with fewer than two successful seeds.
    pub ci95: Option<f64>,
}

impl RunResult {
    pub fn from_runs(task: TaskKind, activation: Activation, architecture: String, per_seed: Vec<SeedRun>) -> Self {
        let metrics: Vec<f64> = per_seed.iter().filter_map(|r| r.metric).collect();
        let (mean, ci95) = match mean_ci95(&metrics) {
            Some((m, ci)) => (Some(m), ci),
            None => (None, None),
        };
        Self {
            task,
            activation,
            architecture,
            per_seed,
            mean,
            ci95,
        }
    }

    pub fn metrics(&self) -> Vec<f64> {
        self.per_seed.iter().filter_map(|r| r.metric).collect()
    }

    /// Mean epochs-to-convergence over successful seeds.
    pub fn mean_epochs_to_convergence(&self) -> Option<f64> {
        let e: Vec<f64> = self
            .per_seed
            .iter()
            .filter_map(|r| r.epochs_to_convergence.map(|e| e as f64))
            .collect();
        (!e.is_empty()).then(|| e.iter().sum::<f64>() / e.len() as f64)
    }

    pub fn failed_seeds(&self) -> usize {
        self.per_seed.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Trains one network and scores it on the test split. Failures are captured
/// in the returned record.
pub fn run_single(prepared: &PreparedTask, config: &NetworkConfig, tc: &TrainConfig) -> SeedRun {
    let start = Instant::now();
    let outcome = train(config, &prepared.train, tc).and_then(|(net, hist)| {
        let metric = evaluate(&net, &prepared.test)?;
        Ok((metric, hist))
    });
    let wall_clock_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((metric, hist)) => SeedRun {
            seed: tc.seed,
            metric: Some(metric),
            epochs_to_convergence: Some(epochs_to_convergence(&hist)),
            epochs_run: hist.epochs_run(),
            best_epoch: Some(hist.best_epoch + 1),
            wall_clock_s,
            error: None,
        },
        Err(e) => {
            log::warn!("{} seed {}: training aborted: {e}", config.hidden_activation.id(), tc.seed);
            SeedRun {
                seed: tc.seed,
                metric: None,
                epochs_to_convergence: None,
                epochs_run: 0,
                best_epoch: None,
                wall_clock_s,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Maps `f` over `items` on at most `jobs` threads, preserving order.
pub(crate) fn parallel_map<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("could not start {jobs} worker threads ({e}); running serially");
            items.iter().map(f).collect()
        }
    }
}

/// Runs every activation × seed of `spec` on already prepared data.
pub fn run_prepared(prepared: &PreparedTask, spec: &ExperimentSpec, jobs: usize) -> Result<Vec<RunResult>> {
    spec.validate()?;
    let arch = architecture_id(&spec.hidden_layers);
    let jobs_list: Vec<(usize, u64)> = (0..spec.activations.len())
        .flat_map(|a| spec.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let runs = parallel_map(jobs, &jobs_list, |&(a, seed)| {
        let act = spec.activations[a];
        let config = NetworkConfig::for_task(prepared.train.num_features(), &spec.hidden_layers, prepared.train.task, act);
        let tc = TrainConfig {
            seed,
            ..spec.train.clone()
        };
        run_single(prepared, &config, &tc)
    });
    let mut runs = runs.into_iter();
    Ok(spec
        .activations
        .iter()
        .map(|&act| {
            let per_seed: Vec<SeedRun> = runs.by_ref().take(spec.seeds.len()).collect();
            RunResult::from_runs(spec.task, act, arch.clone(), per_seed)
        })
        .collect())
}

/// Prepares the task data and runs every activation × seed.
pub fn run_task(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<RunResult>> {
    spec.validate()?;
    let prepared = prepare_task(spec.task, &spec.data)?;
    run_prepared(&prepared, spec, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{ActivationKind, Variant};

    fn quick(task: TaskKind, acts: Vec<Activation>, seeds: Vec<u64>) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(task, acts);
        spec.seeds = seeds;
        spec.hidden_layers = vec![8];
        spec.train.max_epochs = 3;
        spec.train.patience = 3;
        spec
    }

    #[test]
    fn single_seed_single_activation() {
        let spec = quick(TaskKind::Binary, vec![Activation::s4(Variant::Rescaled, 15.0)], vec![1]);
        let r = run_task(&spec, 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].per_seed.len(), 1);
        assert_eq!(r[0].ci95, None);
        assert_eq!(r[0].mean, r[0].per_seed[0].metric);
    }

    #[test]
    fn parallel_matches_serial() {
        let spec = quick(
            TaskKind::Binary,
            vec![Activation::plain(ActivationKind::Relu), Activation::plain(ActivationKind::Tanh)],
            vec![1, 2],
        );
        let mut a = run_task(&spec, 1).unwrap();
        let mut b = run_task(&spec, 3).unwrap();
        for r in a.iter_mut().chain(b.iter_mut()) {
            r.per_seed.iter_mut().for_each(|s| s.wall_clock_s = 0.0);
        }
        assert_eq!(a, b);
        assert_eq!(a[1].activation.kind, ActivationKind::Tanh);
        assert_eq!(a[0].per_seed[1].seed, 2);
    }

    #[test]
    fn empty_spec_rejected() {
        let spec = quick(TaskKind::Binary, vec![], vec![1]);
        assert!(run_task(&spec, 1).is_err());
    }
}
