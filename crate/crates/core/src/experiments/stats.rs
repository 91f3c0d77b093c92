use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Sample standard deviation (n − 1 denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Two-sided 97.5% Student-t quantile with `df` degrees of freedom.
pub fn t_quantile_975(df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("df > 0")
        .inverse_cdf(0.975)
}

/// Mean and 95% confidence half-width `t₀.₉₇₅,ₙ₋₁ · s / √n`. The half-width is
/// `None` for fewer than two values; the whole result is `None` for none.
pub fn mean_ci95(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Some((mean, None));
    }
    let half = t_quantile_975(n - 1.0) * sample_std(values) / n.sqrt();
    Some((mean, Some(half)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub n: usize,
    pub mean_diff: f64,
    /// `None` when the differences have (numerically) zero spread.
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub significant: bool,
    pub degenerate: bool,
}

/// Relative spread below which the differences count as constant.
const DEGENERATE_SPREAD: f64 = 1e-9;

/// Paired two-sided t-test on per-seed metrics, `n − 1` degrees of freedom.
///
/// Constant differences (including all-zero ones) have no defined t; they are
/// flagged degenerate instead of dividing by zero. "Constant" allows for
/// rounding noise: a spread below `1e-9 · max(|mean|, 1)` counts.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "paired t-test needs two equal-length samples of at least 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let mean_diff = d.iter().sum::<f64>() / n as f64;
    let sd = sample_std(&d);
    if !(sd > DEGENERATE_SPREAD * mean_diff.abs().max(1.0)) {
        return Ok(TTestResult {
            n,
            mean_diff,
            t: None,
            p: None,
            significant: false,
            degenerate: true,
        });
    }
    let t = mean_diff / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df >= 1");
    let p = 2.0 * dist.cdf(-t.abs());
    Ok(TTestResult {
        n,
        mean_diff,
        t: Some(t),
        p: Some(p),
        significant: p < 0.05,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Excellent,
    Good,
    Moderate,
    Limited,
    Avoid,
}

impl Band {
    pub fn from_average_rank(avg: f64) -> Self {
        if avg <= 3.3 {
            Band::Excellent
        } else if avg <= 4.3 {
            Band::Good
        } else if avg <= 5.0 {
            Band::Moderate
        } else if avg <= 6.0 {
            Band::Limited
        } else {
            Band::Avoid
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Band::Excellent => "Excellent",
            Band::Good => "Good",
            Band::Moderate => "Moderate",
            Band::Limited => "Limited",
            Band::Avoid => "Avoid",
        }
    }
}

/// Scores of every activation on one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScores {
    pub task: String,
    pub higher_is_better: bool,
    /// `(activation id, metric)`.
    pub scores: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub activation: String,
    /// One rank per task, in `RankTable::tasks` order.
    pub ranks: Vec<usize>,
    pub average: f64,
    pub band: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub tasks: Vec<String>,
    pub rows: Vec<RankRow>,
}

/// Competition ranks: 1 + the number of strictly better entries, so ties
/// share the smaller rank.
pub fn competition_ranks(values: &[f64], higher_is_better: bool) -> Vec<usize> {
    values
        .iter()
        .map(|&v| {
            1 + values
                .iter()
                .filter(|&&o| if higher_is_better { o > v } else { o < v })
                .count()
        })
        .collect()
}

/// Ranks activations per task and averages the ranks. Activations appear in
/// the order of the first task.
pub fn rank_functions(tasks: &[TaskScores]) -> Result<RankTable> {
    let first = tasks
        .first()
        .ok_or_else(|| Error::contract("ranking needs at least one task"))?;
    let names: Vec<String> = first.scores.iter().map(|(n, _)| n.clone()).collect();
    let mut per_task_ranks = Vec::with_capacity(tasks.len());
    for t in tasks {
        let mut values = Vec::with_capacity(names.len());
        for name in &names {
            let v = t
                .scores
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::contract(format!("no `{}` result for `{name}`", t.task)))?;
            if !v.is_finite() {
                return Err(Error::contract(format!("`{name}` has a non-finite `{}` metric", t.task)));
            }
            values.push(v);
        }
        if t.scores.len() != names.len() {
            return Err(Error::contract(format!("task `{}` ranks a different activation set", t.task)));
        }
        per_task_ranks.push(competition_ranks(&values, t.higher_is_better));
    }
    let rows = names
        .into_iter()
        .enumerate()
        .map(|(i, activation)| {
            let ranks: Vec<usize> = per_task_ranks.iter().map(|r| r[i]).collect();
            let average = ranks.iter().sum::<usize>() as f64 / ranks.len() as f64;
            RankRow {
                activation,
                ranks,
                average,
                band: Band::from_average_rank(average),
            }
        })
        .collect();
    Ok(RankTable {
        tasks: tasks.iter().map(|t| t.task.clone()).collect(),
        rows,
    })
}
