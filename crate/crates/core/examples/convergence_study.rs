//! Epochs-to-convergence of S4 (k = 5), Swish and ReLU on the synthetic task
//! for the 10-1, 50-2 and 100-3 architectures.
//!
//! `cargo run --release --example convergence_study`

use hybridact::activation::Variant;
use hybridact::experiments::{run_convergence_study, ConvergenceSpec};

fn main() -> hybridact::Result<()> {
    let spec = ConvergenceSpec::new(Variant::Rescaled);
    let records = run_convergence_study(&spec, 1)?;
    println!("{:<8} {:<20} {:>14} {:>10}", "arch", "activation", "epochs/seed", "mean");
    for r in &records {
        let per_seed: Vec<String> =
            r.epochs_per_seed.iter().map(|e| e.map_or("-".into(), |v| v.to_string())).collect();
        println!(
            "{:<8} {:<20} {:>14} {:>10.2}",
            r.architecture,
            r.activation.id(),
            per_seed.join("/"),
            r.mean_epochs.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
