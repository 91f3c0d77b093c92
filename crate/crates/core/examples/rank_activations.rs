//! Ranks activations across the synthetic and Iris tasks by average rank
//! and assigns recommendation bands.
//!
//! `cargo run --release --example rank_activations`

use hybridact::activation::{Activation, ActivationKind, Variant};
use hybridact::data::resolve_data_dir;
use hybridact::experiments::{rank_functions, rank_to_csv, run_task, DataOptions, ExperimentSpec, TaskKind, TaskScores};

fn main() -> hybridact::Result<()> {
    let acts = vec![
        Activation::s4(Variant::Rescaled, 15.0),
        Activation::plain(ActivationKind::S3Continuous),
        Activation::plain(ActivationKind::Relu),
        Activation::plain(ActivationKind::Tanh),
        Activation::plain(ActivationKind::Swish),
    ];
    let mut scores = Vec::new();
    for task in [TaskKind::Binary, TaskKind::Multiclass] {
        let mut spec = ExperimentSpec::new(task, acts.clone());
        spec.data = DataOptions::with_dir(resolve_data_dir(None));
        let results = run_task(&spec, 1)?;
        scores.push(TaskScores {
            task: task.name().into(),
            higher_is_better: task.higher_is_better(),
            scores: results.iter().map(|r| (r.activation.id(), r.mean.unwrap_or(f64::NAN))).collect(),
        });
    }
    let table = rank_functions(&scores)?;
    print!("{}", rank_to_csv(&table));
    Ok(())
}
