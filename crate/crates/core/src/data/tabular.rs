use std::collections::HashMap;
use std::path::Path;

use super::{Dataset, Targets, Task};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// `Some(true)` skips the first non-blank line, `Some(false)` parses it,
    /// `None` skips it only when its first cell is not a number.
    pub header: Option<bool>,
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Non-blank lines as `(1-based line number, fields)`, header removed.
fn records(path: &Path, opts: CsvOptions) -> Result<Vec<(usize, Vec<String>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if first {
            first = false;
            let skip = opts
                .header
                .unwrap_or_else(|| fields.first().is_some_and(|f| f.parse::<f64>().is_err()));
            if skip {
                continue;
            }
        }
        out.push((i + 1, fields.into_iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn parse_number(path: &Path, line: usize, column: usize, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("column {}: `{cell}` is not a finite number", column + 1),
        }),
    }
}

/// Loads an Iris-style CSV: four numeric feature columns and a class label.
///
/// Labels may be names (`Iris-setosa`) or integer indices. Names are mapped
/// to indices in order of first appearance.
pub fn load_iris(path: &Path, opts: CsvOptions) -> Result<Dataset> {
    const FEATURES: usize = 4;
    let rows = records(path, opts)?;
    let mut features = Vec::with_capacity(rows.len() * FEATURES);
    let mut labels = Vec::with_capacity(rows.len());
    let mut names: HashMap<String, usize> = HashMap::new();
    for (line, fields) in &rows {
        if fields.len() != FEATURES + 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                msg: format!("expected {} columns, found {}", FEATURES + 1, fields.len()),
            });
        }
        for (c, cell) in fields[..FEATURES].iter().enumerate() {
            features.push(parse_number(path, *line, c, cell)?);
        }
        let label = &fields[FEATURES];
        let class = match label.parse::<usize>() {
            Ok(idx) => idx,
            Err(_) => {
                let next = names.len();
                *names.entry(label.clone()).or_insert(next)
            }
        };
        labels.push(class);
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "no data rows".into(),
        });
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    Dataset::new(
        "iris",
        Task::Multiclass { num_classes },
        Matrix::from_vec(labels.len(), FEATURES, features),
        Targets::Classes(labels),
    )
}

/// Loads Boston Housing: 13 feature columns followed by the median value,
/// comma- or whitespace-delimited.
pub fn load_boston(path: &Path, opts: CsvOptions) -> Result<Dataset> {
    const FEATURES: usize = 13;
    let rows = records(path, opts)?;
    let mut features = Vec::with_capacity(rows.len() * FEATURES);
    let mut targets = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        if fields.len() != FEATURES + 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                msg: format!("expected {} columns, found {}", FEATURES + 1, fields.len()),
            });
        }
        for (c, cell) in fields[..FEATURES].iter().enumerate() {
            features.push(parse_number(path, *line, c, cell)?);
        }
        targets.push(parse_number(path, *line, FEATURES, &fields[FEATURES])?);
    }
    if targets.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "no data rows".into(),
        });
    }
    Dataset::new(
        "boston-housing",
        Task::Regression,
        Matrix::from_vec(targets.len(), FEATURES, features),
        Targets::Values(targets),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn iris_with_and_without_header() {
        let body = "5.1,3.5,1.4,0.2,Iris-setosa\n7.0,3.2,4.7,1.4,Iris-versicolor\n\n6.3,3.3,6.0,2.5,Iris-virginica\n";
        let with = write(&format!("a,b,c,d,species\n{body}"));
        let ds = load_iris(with.path(), CsvOptions::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.targets, Targets::Classes(vec![0, 1, 2]));
        let without = write(body);
        let ds2 = load_iris(without.path(), CsvOptions { header: Some(false) }).unwrap();
        assert_eq!(ds, ds2);
    }

    #[test]
    fn iris_bad_cell_names_line() {
        let f = write("a,b,c,d,e\n5.1,3.5,1.4,0.2,Iris-setosa\n4.9,oops,1.4,0.2,Iris-setosa\n");
        match load_iris(f.path(), CsvOptions::default()) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn boston_whitespace_and_truncation() {
        let row = "0.00632 18.00 2.310 0 0.5380 6.5750 65.20 4.0900 1 296.0 15.30 396.90 4.98 24.00";
        let ok = write(&format!("{row}\n{row}\n"));
        let ds = load_boston(ok.path(), CsvOptions::default()).unwrap();
        assert_eq!((ds.len(), ds.num_features()), (2, 13));
        let cut = write(&format!("{row}\n0.02731 0.00 7.070 0 0.4690\n"));
        match load_boston(cut.path(), CsvOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_boston(Path::new("/nonexistent/boston.csv"), CsvOptions::default());
        assert!(matches!(err, Err(Error::Io { .. })));
    }
}
