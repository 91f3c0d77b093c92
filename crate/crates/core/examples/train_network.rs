//! Trains a 64-32-16 network with an S4 hidden activation on the synthetic
//! binary task, prints the epoch history, and round-trips a checkpoint.
//!
//! `cargo run --example train_network`

use hybridact::activation::{Activation, Variant};
use hybridact::experiments::{prepare_task, DataOptions, TaskKind};
use hybridact::nn::{
    checkpoint_from_json, checkpoint_to_json, epochs_to_convergence, evaluate, train, NetworkConfig, TrainConfig,
};

fn main() -> hybridact::Result<()> {
    let task = prepare_task(TaskKind::Binary, &DataOptions::default())?;
    let act = Activation::s4(Variant::Rescaled, 15.0);
    let config = NetworkConfig::for_task(task.train.num_features(), &[64, 32, 16], task.train.task, act);
    let tc = TrainConfig::with_seed(1);

    let (net, history) = train(&config, &task.train, &tc)?;
    println!("epoch  train_loss  val_loss  val_acc");
    for (i, e) in history.epochs.iter().enumerate() {
        println!("{:>5}  {:>10.5}  {:>8.5}  {:>7.4}", i + 1, e.train_loss, e.val_loss, e.val_metric);
    }
    println!(
        "best epoch {} (stopped early: {}), converged by epoch {}, kink hits {}",
        history.best_epoch + 1,
        history.stopped_early,
        epochs_to_convergence(&history),
        history.kink_hits
    );
    for (i, l) in history.epochs[history.best_epoch].layer_stats.iter().enumerate() {
        {
            println!("  hidden layer {}: mean |dL/dz| {:.4}, dead fraction {}", i + 1, l.mean_abs_grad, l.dead_fraction);
        }
    }
    println!("test accuracy {:.4}", evaluate(&net, &task.test)?);

    let json = checkpoint_to_json(&net)?;
    let restored = checkpoint_from_json(&json)?;
    assert_eq!(restored, net);
    println!("checkpoint: {} bytes, restores bit-exactly", json.len());
    Ok(())
}
