//! Times the naive multi-pass S4 evaluation against the fused batch kernel.
//!
//! `cargo run --release --example bench_throughput [iterations] [buffer_len]`

use hybridact::activation::Variant;
use hybridact::bench::compare_modes;

fn main() -> hybridact::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let iterations = args.next().and_then(Result::ok).unwrap_or(2_000);
    let buffer_len = args.next().and_then(Result::ok).unwrap_or(10_000);
    let c = compare_modes(Variant::Rescaled, iterations, buffer_len, 15.0, 1)?;
    println!("naive  {:.4} s  checksum {:.6}", c.naive.total_seconds, c.naive.checksum);
    println!("fused  {:.4} s  checksum {:.6}", c.fused.total_seconds, c.fused.checksum);
    println!("speedup {:.3}, checksum relative difference {:.1e}", c.speedup, c.checksum_rel_diff);
    if let Some(w) = c.warning {
        println!("note: {w}");
    }
    Ok(())
}
