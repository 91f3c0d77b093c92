//! Benchmarks S4, S3 and ReLU on Iris over three seeds, prints seed means
//! with 95% intervals, runs a paired t-test, and writes a CSV report.
//!
//! `cargo run --example task_benchmark`

use hybridact::activation::{Activation, ActivationKind, Variant};
use hybridact::data::resolve_data_dir;
use hybridact::experiments::{
    paired_t_test, results_to_csv, run_task, DataOptions, ExperimentSpec, TaskKind,
};

fn main() -> hybridact::Result<()> {
    let acts = vec![
        Activation::s4(Variant::Rescaled, 10.0),
        Activation::plain(ActivationKind::S3Continuous),
        Activation::plain(ActivationKind::Relu),
    ];
    let mut spec = ExperimentSpec::new(TaskKind::Multiclass, acts);
    spec.data = DataOptions::with_dir(resolve_data_dir(None));
    let results = run_task(&spec, 1)?;

    for r in &results {
        println!(
            "{:<20} mean acc {:.4} ± {:.4}  per seed {:?}",
            r.activation.id(),
            r.mean.unwrap_or(f64::NAN),
            r.ci95.unwrap_or(f64::NAN),
            r.metrics()
        );
    }
    let t = paired_t_test(&results[2].metrics(), &results[0].metrics())?;
    match (t.t, t.p) {
        (Some(tv), Some(p)) => println!("ReLU vs S4: mean diff {:.4}, t = {tv:.3}, p = {p:.4}", t.mean_diff),
        _ => println!("ReLU vs S4: constant per-seed differences ({:.4}), no t statistic", t.mean_diff),
    }

    print!("\n{}", results_to_csv("task", &results, false));
    Ok(())
}
