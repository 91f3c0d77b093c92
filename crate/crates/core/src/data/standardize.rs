use serde::{Deserialize, Serialize};

use super::{Dataset, TargetScaling, Targets, Task};
use crate::matrix::Matrix;

/// Per-feature z-scoring, optionally with target scaling for regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub target: Option<TargetScaling>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

// Population std below this is treated as a constant column.
const MIN_STD: f64 = 1e-12;

/// Fits on the given (training) rows only. Constant columns get std 1.
pub fn fit_standardizer(train: &Dataset, scale_targets: bool) -> Standardizer {
    let x = &train.features;
    let n = x.rows();
    let mut mean = Vec::with_capacity(x.cols());
    let mut std = Vec::with_capacity(x.cols());
    for j in 0..x.cols() {
        let (m, s) = mean_std((0..n).map(|i| x.get(i, j)), n);
        mean.push(m);
        if s < MIN_STD {
            log::warn!("{}: feature {j} is constant on the training rows; using std 1", train.name);
            std.push(1.0);
        } else {
            std.push(s);
        }
    }
    let target = match (&train.targets, scale_targets) {
        (Targets::Values(v), true) => {
            let (m, s) = mean_std(v.iter().copied(), v.len());
            Some(TargetScaling {
                mean: m,
                std: if s < MIN_STD { 1.0 } else { s },
            })
        }
        _ => None,
    };
    Standardizer { mean, std, target }
}

impl Standardizer {
    pub fn apply(&self, data: &Dataset) -> Dataset {
        let mut features = data.features.clone();
        transform_rows(&mut features, |j, v| (v - self.mean[j]) / self.std[j]);
        let (targets, target_scaling) = match (&data.targets, self.target, data.task) {
            (Targets::Values(v), Some(s), Task::Regression) if data.target_scaling.is_none() => {
                (Targets::Values(v.iter().map(|&y| s.forward(y)).collect()), Some(s))
            }
            _ => (data.targets.clone(), data.target_scaling),
        };
        Dataset {
            name: data.name.clone(),
            task: data.task,
            features,
            targets,
            target_scaling,
        }
    }

    pub fn invert(&self, data: &Dataset) -> Dataset {
        let mut features = data.features.clone();
        transform_rows(&mut features, |j, v| v * self.std[j] + self.mean[j]);
        let targets = match (&data.targets, data.target_scaling) {
            (Targets::Values(v), Some(s)) => Targets::Values(v.iter().map(|&z| s.inverse(z)).collect()),
            (t, _) => t.clone(),
        };
        Dataset {
            name: data.name.clone(),
            task: data.task,
            features,
            targets,
            target_scaling: None,
        }
    }
}

fn transform_rows(m: &mut Matrix, f: impl Fn(usize, f64) -> f64) {
    let cols = m.cols();
    for (idx, v) in m.as_mut_slice().iter_mut().enumerate() {
        *v = f(idx % cols, *v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        Dataset::new(
            "s",
            Task::Regression,
            Matrix::from_rows(&[
                vec![1.0, 5.0, 100.0],
                vec![2.0, 5.0, -3.0],
                vec![4.0, 5.0, 17.5],
                vec![9.0, 5.0, 0.25],
            ]),
            Targets::Values(vec![10.0, 20.0, 35.0, 50.0]),
        )
        .unwrap()
    }

    #[test]
    fn zero_mean_unit_std_and_constant_column() {
        let ds = sample();
        let s = fit_standardizer(&ds, true);
        assert_eq!(s.std[1], 1.0);
        let t = s.apply(&ds);
        for j in 0..3 {
            let col: Vec<f64> = (0..4).map(|i| t.features.get(i, j)).collect();
            let m = col.iter().sum::<f64>() / 4.0;
            assert!(m.abs() < 1e-10);
            if j != 1 {
                let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 4.0).sqrt();
                assert!((sd - 1.0).abs() < 1e-10);
            }
        }
        assert!(t.target_scaling.is_some());
    }

    #[test]
    fn apply_then_invert_is_identity() {
        let ds = sample();
        let s = fit_standardizer(&ds, true);
        let back = s.invert(&s.apply(&ds));
        let diff = back
            .features
            .as_slice()
            .iter()
            .zip(ds.features.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
        match (&back.targets, &ds.targets) {
            (Targets::Values(a), Targets::Values(b)) => {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
            _ => unreachable!(),
        }
    }
}
