//! Throughput of S4 evaluation: a naive multi-pass formulation against the
//! fused single-pass batch kernel.

use std::hint::black_box;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::activation::{eval_batch, ActivationParams, Variant};
use crate::error::Result;
use crate::rng::{seeded, stream};

pub const WARMUP_ITERATIONS: usize = 100;
pub const REPETITIONS: usize = 5;
/// Fewer element evaluations than this per repetition are too short to time.
pub const RELIABLE_ELEMENTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    /// Separate passes for α, 1 − α, σ and softsign, each exponential
    /// recomputed, intermediates stored in buffers.
    Naive,
    /// One pass through the batch kernel.
    Fused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub mode: BenchMode,
    pub iterations: usize,
    pub buffer_len: usize,
    /// Median over the repetitions.
    pub total_seconds: f64,
    pub repetition_seconds: Vec<f64>,
    /// Sum of every output of every timed iteration.
    pub checksum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchComparison {
    pub naive: BenchResult,
    pub fused: BenchResult,
    /// `naive.total_seconds / fused.total_seconds`.
    pub speedup: f64,
    pub checksum_rel_diff: f64,
    /// Set when the workload is too small for the ratio to mean much.
    pub warning: Option<String>,
}

/// Seeded uniform inputs in `[-10, 10]`.
pub fn bench_inputs(buffer_len: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed, stream::BENCH);
    (0..buffer_len).map(|_| rng.random_range(-10.0..=10.0)).collect()
}

struct NaiveBuffers {
    alpha: Vec<f64>,
    alpha_c: Vec<f64>,
    sig: Vec<f64>,
    soft: Vec<f64>,
}

impl NaiveBuffers {
    fn new(n: usize) -> Self {
        Self {
            alpha: vec![0.0; n],
            alpha_c: vec![0.0; n],
            sig: vec![0.0; n],
            soft: vec![0.0; n],
        }
    }
}

/// The textbook formulation: every factor in its own pass.
fn naive_pass(variant: Variant, k: f64, xs: &[f64], b: &mut NaiveBuffers, out: &mut [f64]) {
    for (a, &x) in b.alpha.iter_mut().zip(xs) {
        *a = 1.0 / (1.0 + (-k * x).exp());
    }
    for (a, &x) in b.alpha_c.iter_mut().zip(xs) {
        *a = 1.0 - 1.0 / (1.0 + (-k * x).exp());
    }
    for (s, &x) in b.sig.iter_mut().zip(xs) {
        *s = 1.0 / (1.0 + (-x).exp());
    }
    for (s, &x) in b.soft.iter_mut().zip(xs) {
        let ss = x / (1.0 + x.abs());
        *s = match variant {
            Variant::Literal => ss,
            Variant::Rescaled => 0.5 * (1.0 + ss),
        };
    }
    for i in 0..out.len() {
        out[i] = b.alpha[i] * b.soft[i] + b.alpha_c[i] * b.sig[i];
    }
}

fn run_once(mode: BenchMode, variant: Variant, params: &ActivationParams, xs: &[f64], iterations: usize) -> (f64, f64) {
    let mut out = vec![0.0; xs.len()];
    let mut buffers = NaiveBuffers::new(xs.len());
    let kind = variant.s4();
    let mut step = |out: &mut [f64]| match mode {
        BenchMode::Naive => naive_pass(variant, params.k, black_box(xs), &mut buffers, out),
        BenchMode::Fused => eval_batch(kind, params, black_box(xs), out).expect("matching lengths"),
    };
    for _ in 0..WARMUP_ITERATIONS {
        step(&mut out);
        black_box(&out);
    }
    let mut checksum = 0.0;
    let start = Instant::now();
    for _ in 0..iterations {
        step(&mut out);
        checksum += black_box(&out).iter().sum::<f64>();
    }
    (start.elapsed().as_secs_f64(), checksum)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times `iterations` evaluations of S4 over a seeded buffer, reporting the
/// median of [`REPETITIONS`] runs. Single-threaded.
pub fn bench_s4(mode: BenchMode, variant: Variant, iterations: usize, buffer_len: usize, k: f64, seed: u64) -> Result<BenchResult> {
    let params = ActivationParams::with_k(k);
    params.validate()?;
    let xs = bench_inputs(buffer_len, seed);
    let mut times = Vec::with_capacity(REPETITIONS);
    let mut checksum = 0.0;
    for _ in 0..REPETITIONS {
        let (t, c) = run_once(mode, variant, &params, &xs, iterations);
        times.push(t);
        checksum = c;
    }
    Ok(BenchResult {
        mode,
        iterations,
        buffer_len,
        total_seconds: median(times.clone()),
        repetition_seconds: times,
        checksum,
    })
}

pub fn compare_modes(variant: Variant, iterations: usize, buffer_len: usize, k: f64, seed: u64) -> Result<BenchComparison> {
    let naive = bench_s4(BenchMode::Naive, variant, iterations, buffer_len, k, seed)?;
    let fused = bench_s4(BenchMode::Fused, variant, iterations, buffer_len, k, seed)?;
    let speedup = naive.total_seconds / fused.total_seconds.max(f64::MIN_POSITIVE);
    let scale = naive.checksum.abs().max(fused.checksum.abs());
    let checksum_rel_diff = if scale == 0.0 {
        0.0
    } else {
        (naive.checksum - fused.checksum).abs() / scale
    };
    let warning = (iterations.saturating_mul(buffer_len) < RELIABLE_ELEMENTS)
        .then(|| "below reliable timing threshold".to_string());
    Ok(BenchComparison {
        naive,
        fused,
        speedup,
        checksum_rel_diff,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{eval, ActivationKind};

    #[test]
    fn naive_matches_scalar_eval() {
        let xs = bench_inputs(500, 3);
        for variant in [Variant::Literal, Variant::Rescaled] {
            let mut b = NaiveBuffers::new(xs.len());
            let mut out = vec![0.0; xs.len()];
            naive_pass(variant, 10.0, &xs, &mut b, &mut out);
            let p = ActivationParams::with_k(10.0);
            for (&x, &o) in xs.iter().zip(&out) {
                let want = eval(variant.s4(), &p, x).unwrap();
                assert!((o - want).abs() <= 1e-12 * want.abs().max(1.0), "{x}");
            }
        }
    }

    #[test]
    fn zero_iterations_is_degenerate_not_an_error() {
        let r = bench_s4(BenchMode::Fused, Variant::Rescaled, 0, 64, 10.0, 1).unwrap();
        assert_eq!(r.checksum, 0.0);
        assert!(r.total_seconds < 1e-3);
        let c = compare_modes(Variant::Rescaled, 0, 64, 10.0, 1).unwrap();
        assert!(c.speedup.is_finite() && c.speedup >= 0.0);
    }

    #[test]
    fn tiny_buffer_is_flagged() {
        let c = compare_modes(Variant::Rescaled, 10, 1, 10.0, 1).unwrap();
        assert!(c.speedup > 0.0);
        assert_eq!(c.warning.as_deref(), Some("below reliable timing threshold"));
    }

    #[test]
    fn inputs_are_seeded_and_bounded() {
        let a = bench_inputs(1000, 9);
        assert_eq!(a, bench_inputs(1000, 9));
        assert!(a.iter().all(|x| (-10.0..=10.0).contains(x)));
        let _ = ActivationKind::S4Rescaled;
    }
}
