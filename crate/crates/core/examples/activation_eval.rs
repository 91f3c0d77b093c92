//! Evaluates every activation and its derivative on a few points, shows the
//! literal and rescaled S4 variants side by side, and prints the property
//! table.
//!
//! `cargo run --example activation_eval`

use hybridact::activation::{eval_batch, properties_table, Activation, ActivationKind, ActivationParams, Variant};

fn main() -> hybridact::Result<()> {
    let xs = [-4.0, -1.0, 0.0, 0.5, 3.0];
    println!("{:<16} {:>60}", "activation", "f(x) at x = -4, -1, 0, 0.5, 3");
    for kind in ActivationKind::ALL {
        let act = Activation::new(kind, ActivationParams::with_k(10.0));
        let mut out = [0.0; 5];
        eval_batch(kind, &act.params, &xs, &mut out)?;
        let cells: Vec<String> = out.iter().map(|v| format!("{v:>11.6}")).collect();
        println!("{:<16} {}", act.id(), cells.join(" "));
    }

    println!("\nS4 at the origin, k = 10:");
    for variant in [Variant::Literal, Variant::Rescaled] {
        let s4 = Activation::s4(variant, 10.0);
        println!("  {:<18} S4(0) = {:.4}  S4'(0) = {:.4}", s4.id(), s4.eval(0.0)?, s4.derivative(0.0)?);
    }

    println!("\nS3 at its kink: the derivative is undefined at exactly 0");
    let s3 = Activation::plain(ActivationKind::S3Literal);
    match s3.derivative(0.0) {
        Ok(d) => println!("  derivative {d}"),
        Err(e) => println!("  {e}"),
    }
    println!("  left limit {:.4}, right limit {:.4}", s3.derivative(-1e-12)?, s3.derivative(1e-12)?);

    println!("\n{:<16} {:>8} {:>8} {:>10} {:>14}", "kind", "lo", "hi", "monotonic", "zero-centered");
    for kind in ActivationKind::ALL {
        let p = properties_table(kind);
        println!("{:<16} {:>8} {:>8} {:>10} {:>14}", kind.name(), p.range_lo, p.range_hi, p.monotonic, p.zero_centered);
    }

    // Activation lists as accepted by the command line.
    let parsed = Activation::parse_list("s4:k=5,relu,elu:alpha=0.5", Variant::Rescaled)?;
    let ids: Vec<String> = parsed.iter().map(Activation::id).collect();
    println!("\nparsed list: {}", ids.join(", "));
    Ok(())
}
