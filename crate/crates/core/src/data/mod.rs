//! Datasets: the synthetic binary generator, Iris / Boston Housing CSV
//! loaders, the MNIST IDX loader, standardization and splits.

mod mnist;
mod split;
mod standardize;
mod synthetic;
mod tabular;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use mnist::{load_mnist, load_mnist_limited, parse_idx_images, parse_idx_labels};
pub use split::{split_indices, stratified_split, SplitSpec};
pub use standardize::{fit_standardizer, Standardizer};
pub use synthetic::{generate_synthetic_binary, SyntheticSpec};
pub use tabular::{load_boston, load_iris, CsvOptions};

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "HYBRIDACT_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Binary,
    Multiclass { num_classes: usize },
    Regression,
}

impl Task {
    pub fn is_classification(self) -> bool {
        !matches!(self, Task::Regression)
    }

    pub fn num_classes(self) -> Option<usize> {
        match self {
            Task::Binary => Some(2),
            Task::Multiclass { num_classes } => Some(num_classes),
            Task::Regression => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(c) => c.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, idx: &[usize]) -> Targets {
        match self {
            Targets::Classes(c) => Targets::Classes(idx.iter().map(|&i| c[i]).collect()),
            Targets::Values(v) => Targets::Values(idx.iter().map(|&i| v[i]).collect()),
        }
    }

    pub fn classes(&self) -> Option<&[usize]> {
        match self {
            Targets::Classes(c) => Some(c),
            Targets::Values(_) => None,
        }
    }
}

/// Affine map applied to regression targets; metrics undo it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaling {
    pub fn forward(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub task: Task,
    pub features: Matrix,
    pub targets: Targets,
    /// Set when targets have been standardized.
    pub target_scaling: Option<TargetScaling>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, task: Task, features: Matrix, targets: Targets) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            task,
            features,
            targets,
            target_scaling: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.features.rows();
        if n == 0 {
            return Err(Error::contract(format!("dataset `{}` is empty", self.name)));
        }
        if self.targets.len() != n {
            return Err(Error::contract(format!(
                "dataset `{}` has {} rows but {} targets",
                self.name,
                n,
                self.targets.len()
            )));
        }
        if !self.features.all_finite() {
            return Err(Error::contract(format!(
                "dataset `{}` contains non-finite features",
                self.name
            )));
        }
        match (&self.targets, self.task) {
            (Targets::Classes(c), task) if task.is_classification() => {
                let k = task.num_classes().unwrap_or(0);
                if let Some(bad) = c.iter().find(|&&c| c >= k) {
                    return Err(Error::contract(format!(
                        "class index {bad} out of range for {k} classes"
                    )));
                }
            }
            (Targets::Values(v), Task::Regression) => {
                if v.iter().any(|y| !y.is_finite()) {
                    return Err(Error::contract("non-finite regression target"));
                }
            }
            _ => {
                return Err(Error::contract(format!(
                    "dataset `{}`: targets do not match task {:?}",
                    self.name, self.task
                )))
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            task: self.task,
            features: self.features.select_rows(idx),
            targets: self.targets.select(idx),
            target_scaling: self.target_scaling,
        }
    }

    /// Row counts per class; `None` for regression.
    pub fn class_counts(&self) -> Option<Vec<usize>> {
        let k = self.task.num_classes()?;
        let mut counts = vec![0; k];
        for &c in self.targets.classes()? {
            counts[c] += 1;
        }
        Some(counts)
    }
}

/// Resolves the data directory: explicit path, then `$HYBRIDACT_DATA_DIR`,
/// then `./data`.
pub fn resolve_data_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Ok(p) = std::env::var(DATA_DIR_ENV) {
        if !p.is_empty() {
            return PathBuf::from(p);
        }
    }
    PathBuf::from("data")
}
