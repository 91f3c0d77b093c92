use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::runs::RunResult;
use super::stats::RankTable;
use super::studies::GradientHealthRecord;
use crate::activation::ActivationKind;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "study,task,activation,variant,k,seed,metric,epochs_to_convergence,wall_clock_s,ci95";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}` (csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub platform: String,
    pub precision: String,
    pub version: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
            precision: "f64".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// A JSON report: the resolved spec, the results and where they were made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport<S, R> {
    pub study: String,
    pub spec: S,
    pub results: R,
    pub environment: Environment,
}

/// Zeroes every wall-clock field, for byte-stable reports.
pub fn strip_timing(results: &mut [RunResult]) {
    for r in results {
        r.per_seed.iter_mut().for_each(|s| s.wall_clock_s = 0.0);
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json_report<S: Serialize, R: Serialize>(study: &str, spec: &S, results: &R, path: &Path) -> Result<()> {
    let doc = JsonReport {
        study: study.to_string(),
        spec,
        results,
        environment: Environment::current(),
    };
    write_file(path, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

pub fn read_json_report<S: DeserializeOwned, R: DeserializeOwned>(path: &Path) -> Result<JsonReport<S, R>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Activation, variant and k columns. Hybrid kinds are split into family
/// and variant; baselines use their id.
fn activation_columns(r: &RunResult) -> (String, &'static str, String) {
    let a = r.activation;
    let (name, variant) = match a.kind {
        ActivationKind::S3Literal => ("s3".to_string(), "literal"),
        ActivationKind::S3Continuous => ("s3".to_string(), "rescaled"),
        ActivationKind::S4Literal => ("s4".to_string(), "literal"),
        ActivationKind::S4Rescaled => ("s4".to_string(), "rescaled"),
        _ => (a.id(), ""),
    };
    let k = if a.kind.uses_k() { a.params.k.to_string() } else { String::new() };
    (name, variant, k)
}

/// CSV rows: one per seed, then an aggregate row with seed `mean` and the
/// 95% half-width. Failed seeds leave metric and epochs empty.
pub fn results_to_csv(study: &str, results: &[RunResult], timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        let (act, variant, k) = activation_columns(r);
        let prefix = format!("{study},{},{act},{variant},{k}", r.task);
        for s in &r.per_seed {
            let wall = if timing { s.wall_clock_s.to_string() } else { String::new() };
            let _ = writeln!(
                out,
                "{prefix},{},{},{},{wall},",
                s.seed,
                opt(s.metric),
                s.epochs_to_convergence.map(|e| e.to_string()).unwrap_or_default(),
            );
        }
        let wall = if timing {
            let n = r.per_seed.len().max(1) as f64;
            (r.per_seed.iter().map(|s| s.wall_clock_s).sum::<f64>() / n).to_string()
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{prefix},mean,{},{},{wall},{}",
            opt(r.mean),
            opt(r.mean_epochs_to_convergence()),
            opt(r.ci95)
        );
    }
    out
}

/// Writes run results as CSV or JSON.
pub fn write_report(
    study: &str,
    spec: &impl Serialize,
    results: &[RunResult],
    format: ReportFormat,
    path: &Path,
    timing: bool,
) -> Result<()> {
    let mut owned = results.to_vec();
    if !timing {
        strip_timing(&mut owned);
    }
    match format {
        ReportFormat::Csv => write_file(path, &results_to_csv(study, &owned, timing)),
        ReportFormat::Json => write_json_report(study, spec, &owned, path),
    }
}

/// One parsed CSV report line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub study: String,
    pub task: String,
    pub activation: String,
    pub variant: String,
    pub k: Option<f64>,
    /// A seed number or `mean`.
    pub seed: String,
    pub metric: Option<f64>,
    pub epochs_to_convergence: Option<f64>,
    pub wall_clock_s: Option<f64>,
    pub ci95: Option<f64>,
}

fn parse_opt(path: &Path, line: usize, field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("`{field}` is not a number"),
    })
}

pub fn read_csv_report(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: "missing report header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: n,
                msg: format!("expected 10 fields, found {}", f.len()),
            });
        }
        rows.push(CsvRow {
            study: f[0].into(),
            task: f[1].into(),
            activation: f[2].into(),
            variant: f[3].into(),
            k: parse_opt(path, n, f[4])?,
            seed: f[5].into(),
            metric: parse_opt(path, n, f[6])?,
            epochs_to_convergence: parse_opt(path, n, f[7])?,
            wall_clock_s: parse_opt(path, n, f[8])?,
            ci95: parse_opt(path, n, f[9])?,
        });
    }
    Ok(rows)
}

pub const GRADFLOW_HEADER: &str = "depth,activation,seed,stage,layer,mean_abs_grad,dead_fraction,mean_local_derivative";

pub fn gradflow_to_csv(records: &[GradientHealthRecord]) -> String {
    let mut out = String::from(GRADFLOW_HEADER);
    out.push('\n');
    for r in records {
        for (i, l) in r.layers.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.depth,
                r.activation.id(),
                r.seed,
                r.stage.name(),
                i + 1,
                l.mean_abs_grad,
                l.dead_fraction,
                l.mean_local_derivative
            );
        }
    }
    out
}

pub fn rank_to_csv(table: &RankTable) -> String {
    let mut out = format!("activation,{},average_rank,band\n", table.tasks.join(","));
    for row in &table.rows {
        let ranks: Vec<String> = row.ranks.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{},{},{},{}", row.activation, ranks.join(","), row.average, row.band.label());
    }
    out
}

/// Writes already rendered CSV text, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text)
}
