use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use super::{Dataset, Targets, Task};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Reads a file, transparently inflating it when it starts with the gzip
/// magic bytes.
fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], offset: usize) -> Option<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Parses an IDX3 image file. Returns `(count, rows, cols, pixels)`.
pub fn parse_idx_images(path: &Path, bytes: &[u8]) -> Result<(usize, usize, usize, Vec<u8>)> {
    let magic = be_u32(bytes, 0).ok_or_else(|| format_err(path, "truncated header"))?;
    if magic != IMAGES_MAGIC {
        return Err(format_err(
            path,
            format!("image magic is {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        ));
    }
    let dims: Vec<usize> = (0..3)
        .map(|i| be_u32(bytes, 4 + 4 * i).map(|v| v as usize))
        .collect::<Option<_>>()
        .ok_or_else(|| format_err(path, "truncated header"))?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| format_err(path, "dimension product overflows"))?;
    let body = &bytes[16..];
    if body.len() != expected {
        return Err(format_err(
            path,
            format!(
                "header declares {count}x{rows}x{cols} = {expected} pixel bytes, file has {}",
                body.len()
            ),
        ));
    }
    Ok((count, rows, cols, body.to_vec()))
}

/// Parses an IDX1 label file.
pub fn parse_idx_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0).ok_or_else(|| format_err(path, "truncated header"))?;
    if magic != LABELS_MAGIC {
        return Err(format_err(
            path,
            format!("label magic is {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        ));
    }
    let count = be_u32(bytes, 4).ok_or_else(|| format_err(path, "truncated header"))? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(format_err(
            path,
            format!("header declares {count} labels, file has {}", body.len()),
        ));
    }
    if let Some(bad) = body.iter().find(|&&l| l > 9) {
        return Err(format_err(path, format!("label {bad} outside 0..=9")));
    }
    Ok(body.to_vec())
}

/// Loads an MNIST image/label pair, keeping at most `limit` leading rows.
/// Pixels are scaled to `[0, 1]`.
pub fn load_mnist_limited(
    images_path: &Path,
    labels_path: &Path,
    limit: Option<usize>,
) -> Result<Dataset> {
    let (count, rows, cols, pixels) = parse_idx_images(images_path, &read_maybe_gz(images_path)?)?;
    let labels = parse_idx_labels(labels_path, &read_maybe_gz(labels_path)?)?;
    if labels.len() != count {
        return Err(format_err(
            labels_path,
            format!("{} labels for {count} images", labels.len()),
        ));
    }
    let n = limit.map_or(count, |l| l.min(count));
    let d = rows * cols;
    let features: Vec<f64> = pixels[..n * d].iter().map(|&p| f64::from(p) / 255.0).collect();
    let targets = labels[..n].iter().map(|&l| usize::from(l)).collect();
    Dataset::new(
        "mnist",
        Task::Multiclass { num_classes: 10 },
        Matrix::from_vec(n, d, features),
        Targets::Classes(targets),
    )
}

pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    load_mnist_limited(images_path, labels_path, None)
}
