//! Sweeps the S4 steepness k over {5, 10, 15, 20, 30, 40, 50} on the
//! synthetic binary task and reports the best k.
//!
//! `cargo run --release --example k_sweep`

use hybridact::activation::Variant;
use hybridact::experiments::{run_k_sweep, KSweepSpec, TaskKind};

fn main() -> hybridact::Result<()> {
    let spec = KSweepSpec::new(TaskKind::Binary, Variant::Rescaled);
    let r = run_k_sweep(&spec, 1)?;
    for (k, m) in r.k_values.iter().zip(&r.metrics) {
        println!("k = {k:>4}: seed-mean accuracy {:.4}", m.unwrap_or(f64::NAN));
    }
    println!("best k (smallest on ties): {:?}", r.argbest);
    Ok(())
}
