//! Per-layer gradient magnitudes and dead-unit fractions for S4, ReLU and
//! sigmoid networks of depth 2 to 5, at initialization and after five
//! epochs of training.
//!
//! `cargo run --release --example gradient_flow`

use hybridact::activation::{Activation, ActivationKind, Variant};
use hybridact::experiments::{run_gradient_flow_probe, GradFlowSpec};

fn main() -> hybridact::Result<()> {
    let mut spec = GradFlowSpec::new(vec![
        Activation::s4(Variant::Rescaled, 10.0),
        Activation::plain(ActivationKind::Relu),
        Activation::plain(ActivationKind::Sigmoid),
    ]);
    spec.seeds = vec![1];
    let records = run_gradient_flow_probe(&spec, 1)?;
    println!("{:<5} {:<20} {:<8} {:>40} {:>6}", "depth", "activation", "stage", "mean |dL/dz| per layer", "dead");
    for r in &records {
        let grads: Vec<String> = r.layers.iter().map(|l| format!("{:.4}", l.mean_abs_grad)).collect();
        println!(
            "{:<5} {:<20} {:<8} {:>40} {:>6.2}",
            r.depth,
            r.activation.id(),
            r.stage.name(),
            grads.join(" "),
            r.max_dead_fraction
        );
    }
    Ok(())
}
