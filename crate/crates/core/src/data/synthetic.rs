use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, Targets, Task};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{seeded, stream};

/// Parameters of the two-cluster binary generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    /// Number of leading coordinates that carry the class signal.
    pub informative: usize,
    /// Class means sit at `±separation·w` for a unit direction `w`.
    pub separation: f64,
    pub flip_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            d: 20,
            informative: 10,
            separation: 2.0,
            flip_fraction: 0.02,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Balanced two-class Gaussian clusters along a random unit direction in the
/// informative subspace, padded with standard-normal noise coordinates, with
/// a fixed fraction of labels flipped.
pub fn generate_synthetic_binary(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n < 2 || spec.d == 0 {
        return Err(Error::InvalidParameter(format!(
            "synthetic set needs n >= 2 and d >= 1, got n={} d={}",
            spec.n, spec.d
        )));
    }
    if !(0.0..0.5).contains(&spec.flip_fraction) {
        return Err(Error::InvalidParameter(format!(
            "flip fraction must lie in [0, 0.5), got {}",
            spec.flip_fraction
        )));
    }
    let informative = spec.informative.min(spec.d).max(1);
    let mut rng = seeded(spec.seed, stream::GENERATOR);

    let mut direction: Vec<f64> = (0..informative).map(|_| rng.sample(StandardNormal)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut direction {
        *v /= norm;
    }

    let mut labels: Vec<usize> = (0..spec.n).map(|i| usize::from(i >= spec.n / 2)).collect();
    labels.shuffle(&mut rng);

    let mut data = Vec::with_capacity(spec.n * spec.d);
    for &y in &labels {
        let sign = if y == 1 { 1.0 } else { -1.0 };
        for w in &direction {
            let noise: f64 = rng.sample(StandardNormal);
            data.push(sign * spec.separation * w + noise);
        }
        for _ in informative..spec.d {
            data.push(rng.sample(StandardNormal));
        }
    }

    let flips = (spec.n as f64 * spec.flip_fraction + 1e-9).floor() as usize;
    for i in index::sample(&mut rng, spec.n, flips) {
        labels[i] = 1 - labels[i];
    }

    Dataset::new(
        "synthetic-binary",
        Task::Binary,
        Matrix::from_vec(spec.n, spec.d, data),
        Targets::Classes(labels),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let spec = SyntheticSpec::with_seed(7);
        let a = generate_synthetic_binary(&spec).unwrap();
        let b = generate_synthetic_binary(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert_eq!(a.num_features(), 20);
        let other = generate_synthetic_binary(&SyntheticSpec::with_seed(8)).unwrap();
        assert_ne!(a.features, other.features);
    }

    #[test]
    fn balanced_before_flips() {
        let spec = SyntheticSpec {
            flip_fraction: 0.0,
            ..SyntheticSpec::with_seed(7)
        };
        let ds = generate_synthetic_binary(&spec).unwrap();
        assert_eq!(ds.class_counts().unwrap(), vec![500, 500]);

        let odd = SyntheticSpec { n: 11, ..spec };
        let ds = generate_synthetic_binary(&odd).unwrap();
        assert_eq!(ds.class_counts().unwrap(), vec![5, 6]);
    }

    #[test]
    fn flips_exactly_two_percent() {
        let clean = generate_synthetic_binary(&SyntheticSpec {
            flip_fraction: 0.0,
            ..SyntheticSpec::with_seed(3)
        })
        .unwrap();
        let noisy = generate_synthetic_binary(&SyntheticSpec::with_seed(3)).unwrap();
        // Same draws up to the flip step.
        assert_eq!(clean.features, noisy.features);
        let changed = clean
            .targets
            .classes()
            .unwrap()
            .iter()
            .zip(noisy.targets.classes().unwrap())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, 20);
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(generate_synthetic_binary(&SyntheticSpec { n: 1, ..Default::default() }).is_err());
        assert!(generate_synthetic_binary(&SyntheticSpec { d: 0, ..Default::default() }).is_err());
    }
}
