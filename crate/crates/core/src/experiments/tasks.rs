use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{
    fit_standardizer, generate_synthetic_binary, load_boston, load_iris, load_mnist_limited, stratified_split,
    CsvOptions, Dataset, SplitSpec, SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::nn::LossKind;

pub const IRIS_FILE: &str = "iris.csv";
pub const BOSTON_FILE: &str = "boston_housing.csv";
pub const MNIST_DIR: &str = "mnist";
pub const MNIST_TRAIN_IMAGES: &str = "train-images-idx3-ubyte.gz";
pub const MNIST_TRAIN_LABELS: &str = "train-labels-idx1-ubyte.gz";
pub const MNIST_TEST_IMAGES: &str = "t10k-images-idx3-ubyte.gz";
pub const MNIST_TEST_LABELS: &str = "t10k-labels-idx1-ubyte.gz";
/// Training rows used for the desk-scale MNIST run.
pub const MNIST_DESK_ROWS: usize = 10_000;

/// The four benchmark tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Synthetic binary classification.
    Binary,
    /// Iris.
    Multiclass,
    /// Boston Housing.
    Regression,
    Mnist,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Binary, TaskKind::Multiclass, TaskKind::Regression, TaskKind::Mnist];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Binary => "binary",
            TaskKind::Multiclass => "multiclass",
            TaskKind::Regression => "regression",
            TaskKind::Mnist => "mnist",
        }
    }

    /// Accuracy is maximized, MSE minimized.
    pub fn higher_is_better(self) -> bool {
        self != TaskKind::Regression
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "synthetic" => Ok(TaskKind::Binary),
            "multiclass" | "iris" => Ok(TaskKind::Multiclass),
            "regression" | "boston" => Ok(TaskKind::Regression),
            "mnist" => Ok(TaskKind::Mnist),
            other => Err(Error::InvalidParameter(format!(
                "unknown task `{other}` (expected binary, multiclass, regression or mnist)"
            ))),
        }
    }
}

/// How a task's data is produced and split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataOptions {
    pub data_dir: PathBuf,
    /// Seed of the train/test split and of the synthetic generator.
    pub data_seed: u64,
    pub train_fraction: f64,
    /// Train MNIST on all 60,000 rows instead of the first 10,000.
    pub mnist_full: bool,
}

impl Default for DataOptions {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            data_seed: 7,
            train_fraction: 0.8,
            mnist_full: false,
        }
    }
}

impl DataOptions {
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: dir.into(),
            ..Self::default()
        }
    }
}

/// Standardized train/test pair for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTask {
    pub kind: TaskKind,
    pub train: Dataset,
    pub test: Dataset,
}

fn split_and_standardize(data: &Dataset, opts: &DataOptions, stratified: bool) -> Result<(Dataset, Dataset)> {
    let spec = SplitSpec::new(opts.train_fraction, opts.data_seed, stratified);
    let (train, test) = stratified_split(data, &spec)?;
    let scale_targets = !data.task.is_classification();
    let standardizer = fit_standardizer(&train, scale_targets);
    Ok((standardizer.apply(&train), standardizer.apply(&test)))
}

fn mnist_path(opts: &DataOptions, file: &str) -> PathBuf {
    opts.data_dir.join(MNIST_DIR).join(file)
}

/// Loads or generates the data for `kind` and returns the standardized
/// split. MNIST keeps its canonical test set and its `[0, 1]` pixel scale.
pub fn prepare_task(kind: TaskKind, opts: &DataOptions) -> Result<PreparedTask> {
    let (train, test) = match kind {
        TaskKind::Binary => {
            let data = generate_synthetic_binary(&SyntheticSpec::with_seed(opts.data_seed))?;
            split_and_standardize(&data, opts, true)?
        }
        TaskKind::Multiclass => {
            let data = load_iris(&opts.data_dir.join(IRIS_FILE), CsvOptions::default())?;
            split_and_standardize(&data, opts, true)?
        }
        TaskKind::Regression => {
            let data = load_boston(&opts.data_dir.join(BOSTON_FILE), CsvOptions::default())?;
            split_and_standardize(&data, opts, false)?
        }
        TaskKind::Mnist => {
            let limit = if opts.mnist_full { None } else { Some(MNIST_DESK_ROWS) };
            let train = load_mnist_limited(
                &mnist_path(opts, MNIST_TRAIN_IMAGES),
                &mnist_path(opts, MNIST_TRAIN_LABELS),
                limit,
            )?;
            let test = load_mnist_limited(
                &mnist_path(opts, MNIST_TEST_IMAGES),
                &mnist_path(opts, MNIST_TEST_LABELS),
                None,
            )?;
            (train, test)
        }
    };
    Ok(PreparedTask { kind, train, test })
}

/// The task whose data feeds a gradient check of `loss`.
pub fn task_for_loss(loss: LossKind) -> TaskKind {
    match loss {
        LossKind::Bce => TaskKind::Binary,
        LossKind::Ce => TaskKind::Multiclass,
        LossKind::Mse => TaskKind::Regression,
    }
}

/// The first `rows` standardized training rows of the task matching `loss`.
pub fn gradcheck_batch(loss: LossKind, rows: usize, opts: &DataOptions) -> Result<Dataset> {
    let prepared = prepare_task(task_for_loss(loss), opts)?;
    let idx: Vec<usize> = (0..rows.min(prepared.train.len())).collect();
    Ok(prepared.train.subset(&idx))
}

/// True when every file `kind` needs exists under `dir`.
pub fn task_data_available(kind: TaskKind, dir: &Path) -> bool {
    let opts = DataOptions::with_dir(dir);
    match kind {
        TaskKind::Binary => true,
        TaskKind::Multiclass => dir.join(IRIS_FILE).is_file(),
        TaskKind::Regression => dir.join(BOSTON_FILE).is_file(),
        TaskKind::Mnist => [MNIST_TRAIN_IMAGES, MNIST_TRAIN_LABELS, MNIST_TEST_IMAGES, MNIST_TEST_LABELS]
            .iter()
            .all(|f| mnist_path(&opts, f).is_file()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_names() {
        for kind in TaskKind::ALL {
            assert_eq!(kind.name().parse::<TaskKind>().unwrap(), kind);
        }
        assert_eq!("iris".parse::<TaskKind>().unwrap(), TaskKind::Multiclass);
        assert!("cifar".parse::<TaskKind>().is_err());
    }

    #[test]
    fn synthetic_task_is_standardized_on_train_only() {
        let t = prepare_task(TaskKind::Binary, &DataOptions::default()).unwrap();
        // Per-class rounding of the stratified split moves at most one row per class.
        assert_eq!(t.train.len() + t.test.len(), 1000);
        assert!((198..=202).contains(&t.test.len()));
        let x = &t.train.features;
        for j in 0..x.cols() {
            let m: f64 = (0..x.rows()).map(|i| x.get(i, j)).sum::<f64>() / x.rows() as f64;
            assert!(m.abs() < 1e-10);
        }
    }
}
