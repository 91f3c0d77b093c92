use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::data::Task;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    SigmoidBinary,
    SoftmaxMulticlass,
    LinearRegression,
}

impl OutputHead {
    pub fn loss(self) -> LossKind {
        match self {
            OutputHead::SigmoidBinary => LossKind::Bce,
            OutputHead::SoftmaxMulticlass => LossKind::Ce,
            OutputHead::LinearRegression => LossKind::Mse,
        }
    }

    pub fn for_task(task: Task) -> (Self, usize) {
        match task {
            Task::Binary => (OutputHead::SigmoidBinary, 1),
            Task::Multiclass { num_classes } => (OutputHead::SoftmaxMulticlass, num_classes),
            Task::Regression => (OutputHead::LinearRegression, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Binary cross-entropy on a sigmoid head, computed from the logit.
    Bce,
    /// Softmax cross-entropy.
    Ce,
    /// Mean squared error on a linear head.
    Mse,
}

impl LossKind {
    pub fn head(self) -> OutputHead {
        match self {
            LossKind::Bce => OutputHead::SigmoidBinary,
            LossKind::Ce => OutputHead::SoftmaxMulticlass,
            LossKind::Mse => OutputHead::LinearRegression,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    GlorotUniform,
    GlorotNormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub output_dim: usize,
    pub hidden_activation: Activation,
    pub output_head: OutputHead,
    #[serde(default)]
    pub init: Init,
}

impl NetworkConfig {
    /// Head and output width chosen from the task.
    pub fn for_task(input_dim: usize, hidden_layers: &[usize], task: Task, activation: Activation) -> Self {
        let (output_head, output_dim) = OutputHead::for_task(task);
        Self {
            input_dim,
            hidden_layers: hidden_layers.to_vec(),
            output_dim,
            hidden_activation: activation,
            output_head,
            init: Init::GlorotUniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidParameter("network dimensions must be >= 1".into()));
        }
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return Err(Error::InvalidParameter(
                "hidden layers must be non-empty with every width >= 1".into(),
            ));
        }
        if self.output_head == OutputHead::SigmoidBinary && self.output_dim != 1 {
            return Err(Error::InvalidParameter("a sigmoid head has exactly one output".into()));
        }
        if self.output_head == OutputHead::SoftmaxMulticlass && self.output_dim < 2 {
            return Err(Error::InvalidParameter("a softmax head needs at least two outputs".into()));
        }
        self.hidden_activation.params.validate()
    }

    /// Layer shapes as `(fan_in, fan_out)`.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_layers);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub val_fraction: f64,
    pub seed: u64,
    /// Record per-layer gradient statistics after every epoch.
    pub track_gradients: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 50,
            patience: 5,
            val_fraction: 0.2,
            seed: 1,
            track_gradients: true,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "validation fraction must lie in (0, 1), got {}",
                self.val_fraction
            )));
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidParameter(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidParameter("batch size and max epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;

    #[test]
    fn shapes_and_counts() {
        let cfg = NetworkConfig::for_task(
            1,
            &[1],
            Task::Regression,
            Activation::plain(ActivationKind::Relu),
        );
        assert_eq!(cfg.parameter_count(), 4);
        let cfg = NetworkConfig::for_task(
            20,
            &[64, 32, 16],
            Task::Binary,
            Activation::plain(ActivationKind::Relu),
        );
        assert_eq!(cfg.layer_shapes(), vec![(20, 64), (64, 32), (32, 16), (16, 1)]);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = NetworkConfig::for_task(
            4,
            &[8],
            Task::Multiclass { num_classes: 3 },
            Activation::plain(ActivationKind::Tanh),
        );
        cfg.hidden_layers.clear();
        assert!(cfg.validate().is_err());
        let tc = TrainConfig {
            patience: 60,
            ..TrainConfig::default()
        };
        assert!(tc.validate().is_err());
        let tc = TrainConfig {
            val_fraction: 0.0,
            ..TrainConfig::default()
        };
        assert!(tc.validate().is_err());
    }
}
