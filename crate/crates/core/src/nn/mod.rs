//! Dense feed-forward networks: configuration, forward and backward passes,
//! Adam, training with early stopping, and JSON checkpoints.

mod checkpoint;
mod config;
mod network;
mod optim;
mod train;

pub use checkpoint::{checkpoint_from_json, checkpoint_to_json, load_checkpoint, save_checkpoint};
pub use config::{Init, LossKind, NetworkConfig, OutputHead, TrainConfig};
pub use network::{
    backward, gradient_health, head_outputs, init_network, loss_value, DenseNetwork, ForwardTrace, Gradients, Layer,
    LayerHealth,
};
pub use optim::{adam_step, AdamState};
pub use train::{epochs_to_convergence, evaluate, train, train_from, validation_rows, EpochRecord, TrainHistory};
