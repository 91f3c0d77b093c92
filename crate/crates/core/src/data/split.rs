use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{seeded, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64, stratified: bool) -> Self {
        Self {
            train_fraction,
            seed,
            stratified,
        }
    }
}

fn held_out(n: usize, train_fraction: f64) -> usize {
    // The epsilon keeps 50 * (1 - 0.8) from flooring to 9.
    (n as f64 * (1.0 - train_fraction) + 1e-9).floor() as usize
}

/// Splits row indices into `(train, held_out)`.
///
/// Unstratified: one seeded permutation, the held-out part is its first
/// `⌊n·(1 − train_fraction)⌋` entries. Stratified: the same rule per class.
/// Train indices come back in shuffled order, held-out indices sorted.
pub fn split_indices(data: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut rng = seeded(spec.seed, stream::SPLIT);
    let n = data.len();
    let (mut train, mut test) = if spec.stratified {
        let counts = data.class_counts().ok_or_else(|| {
            Error::contract("stratified split requested for a regression dataset")
        })?;
        let classes = data.targets.classes().expect("classification targets");
        let mut train = Vec::with_capacity(n);
        let mut test = Vec::new();
        for (c, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            if count < 2 {
                return Err(Error::contract(format!(
                    "class {c} has {count} row(s); stratification needs at least 2"
                )));
            }
            let mut members: Vec<usize> = (0..n).filter(|&i| classes[i] == c).collect();
            members.shuffle(&mut rng);
            let k = held_out(count, spec.train_fraction);
            test.extend_from_slice(&members[..k]);
            train.extend_from_slice(&members[k..]);
        }
        (train, test)
    } else {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let k = held_out(n, spec.train_fraction);
        let train = perm.split_off(k);
        (train, perm)
    };
    train.shuffle(&mut rng);
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data, spec)?;
    Ok((data.subset(&train), data.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Targets, Task};
    use crate::matrix::Matrix;

    fn three_class(per_class: usize) -> Dataset {
        let n = 3 * per_class;
        Dataset::new(
            "t",
            Task::Multiclass { num_classes: 3 },
            Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()),
            Targets::Classes((0..n).map(|i| i / per_class).collect()),
        )
        .unwrap()
    }

    fn regression(n: usize) -> Dataset {
        Dataset::new(
            "r",
            Task::Regression,
            Matrix::from_vec(n, 1, vec![0.0; n]),
            Targets::Values(vec![1.0; n]),
        )
        .unwrap()
    }

    #[test]
    fn stratified_eighty_twenty() {
        let ds = three_class(50);
        let (train, test) = stratified_split(&ds, &SplitSpec::new(0.8, 1, true)).unwrap();
        assert_eq!(test.class_counts().unwrap(), vec![10, 10, 10]);
        assert_eq!(train.class_counts().unwrap(), vec![40, 40, 40]);
    }

    #[test]
    fn deterministic_and_disjoint() {
        let ds = three_class(50);
        let spec = SplitSpec::new(0.8, 1, true);
        let a = split_indices(&ds, &spec).unwrap();
        let b = split_indices(&ds, &spec).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.0.iter().chain(&a.1).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..150).collect::<Vec<_>>());
    }

    #[test]
    fn unstratified_boston_sizes() {
        let (train, test) = split_indices(&regression(506), &SplitSpec::new(0.8, 0, false)).unwrap();
        assert_eq!((train.len(), test.len()), (405, 101));
    }

    #[test]
    fn rejects_singleton_class_and_regression_stratification() {
        let ds = Dataset::new(
            "t",
            Task::Binary,
            Matrix::from_vec(3, 1, vec![0.0; 3]),
            Targets::Classes(vec![0, 0, 1]),
        )
        .unwrap();
        assert!(matches!(
            split_indices(&ds, &SplitSpec::new(0.5, 0, true)),
            Err(Error::Contract(_))
        ));
        assert!(split_indices(&regression(10), &SplitSpec::new(0.5, 0, true)).is_err());
        assert!(split_indices(&regression(10), &SplitSpec::new(1.0, 0, false)).is_err());
    }
}
