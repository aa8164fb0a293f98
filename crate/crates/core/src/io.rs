//! Plain-text file formats.
//!
//! * matrix: a `rows cols` header line, then one whitespace-separated row per line;
//! * cross graph: one `i j w` triplet per line, 0-based indices, `w > 0`;
//! * embedding: one `domain index c1 .. cK` line per item, domain in `{1, 2}`;
//! * manifest: TOML naming the files of a dataset, relative to the manifest.
//!
//! Floats are written in shortest round-trip form, so save/load is exact.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::RocCurve;
use crate::model::{Domain, Embedding, MultimodalDataset};
use crate::plot::Labels;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_float(tok: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

fn parse_index(tok: &str, path: &Path, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("invalid index '{tok}'")))
}

/// Non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses the dense matrix format. `path` is only used in error messages.
pub fn parse_matrix(text: &str, path: &Path) -> Result<Array2<f64>> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing 'rows cols' header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(path, hline, "header must be 'rows cols'"));
    }
    let rows = parse_index(dims[0], path, hline)?;
    let cols = parse_index(dims[1], path, hline)?;

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (lineno, line) in lines {
        seen += 1;
        if seen > rows {
            return Err(Error::DimensionMismatch(format!(
                "{}: header declares {rows} rows but line {lineno} is row {seen}",
                path.display()
            )));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse_float(tok, path, lineno)?);
        }
        if data.len() - before != cols {
            return Err(Error::DimensionMismatch(format!(
                "{}:{lineno}: expected {cols} values, found {}",
                path.display(),
                data.len() - before
            )));
        }
    }
    if seen != rows {
        return Err(Error::DimensionMismatch(format!(
            "{}: header declares {rows} rows, found {seen}",
            path.display()
        )));
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("rows * cols values"))
}

pub fn format_matrix(m: &Array2<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_matrix(path: &Path) -> Result<Array2<f64>> {
    parse_matrix(&read(path)?, path)
}

pub fn save_matrix(m: &Array2<f64>, path: &Path) -> Result<()> {
    write(path, &format_matrix(m))
}

/// Parses `i j w` triplets into a dense `n1 x n2` weight matrix.
pub fn parse_cross_graph(text: &str, path: &Path, n1: usize, n2: usize) -> Result<Array2<f64>> {
    let mut w = Array2::zeros((n1, n2));
    let mut seen = HashSet::new();
    for (line, content) in content_lines(text) {
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(path, line, "expected 'i j w'"));
        }
        let row = parse_index(toks[0], path, line)?;
        let col = parse_index(toks[1], path, line)?;
        let weight = parse_float(toks[2], path, line)?;
        if row >= n1 || col >= n2 {
            return Err(Error::IndexOutOfRange {
                path: path.to_path_buf(),
                line,
                row,
                col,
                rows: n1,
                cols: n2,
            });
        }
        if weight <= 0.0 {
            return Err(Error::NonPositiveWeight {
                path: path.to_path_buf(),
                line,
            });
        }
        if !seen.insert((row, col)) {
            return Err(Error::DuplicateEntry {
                path: path.to_path_buf(),
                line,
                row,
                col,
            });
        }
        w[[row, col]] = weight;
    }
    Ok(w)
}

/// Positive entries as `i j w` lines in row-major order.
pub fn format_cross_graph(w: &Array2<f64>) -> String {
    let mut out = String::new();
    for ((i, j), &v) in w.indexed_iter() {
        if v > 0.0 {
            let _ = writeln!(out, "{i} {j} {v}");
        }
    }
    out
}

pub fn load_cross_graph(path: &Path, n1: usize, n2: usize) -> Result<Array2<f64>> {
    parse_cross_graph(&read(path)?, path, n1, n2)
}

pub fn save_cross_graph(w: &Array2<f64>, path: &Path) -> Result<()> {
    write(path, &format_cross_graph(w))
}

pub fn format_embedding(embedding: &Embedding) -> String {
    let mut out = String::new();
    for (row, coords) in embedding.coords().rows().into_iter().enumerate() {
        let (domain, index) = embedding.domain_of_row(row).expect("row in range");
        let _ = write!(out, "{} {index}", domain.id());
        for v in coords {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Parses the embedding format. Lines may come in any order but every
/// `(domain, index)` must appear exactly once.
pub fn parse_embedding(text: &str, path: &Path) -> Result<Embedding> {
    let mut entries: Vec<(Domain, usize, Vec<f64>)> = Vec::new();
    let mut dim = None;
    for (line, content) in content_lines(text) {
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(parse_err(path, line, "expected 'domain index c1 .. cK'"));
        }
        let domain = toks[0]
            .parse::<u8>()
            .ok()
            .and_then(Domain::from_id)
            .ok_or_else(|| parse_err(path, line, format!("invalid domain '{}'", toks[0])))?;
        let index = parse_index(toks[1], path, line)?;
        let coords = toks[2..]
            .iter()
            .map(|t| parse_float(t, path, line))
            .collect::<Result<Vec<_>>>()?;
        match dim {
            None => dim = Some(coords.len()),
            Some(k) if k != coords.len() => {
                return Err(parse_err(
                    path,
                    line,
                    format!("expected {k} coordinates, found {}", coords.len()),
                ))
            }
            _ => {}
        }
        entries.push((domain, index, coords));
    }
    let dim = dim.ok_or_else(|| parse_err(path, 1, "empty embedding"))?;
    entries.sort_by_key(|e| (e.0, e.1));

    let n1 = entries.iter().filter(|e| e.0 == Domain::One).count();
    let mut flat = Vec::with_capacity(entries.len() * dim);
    for (pos, (domain, index, coords)) in entries.into_iter().enumerate() {
        let expected = if domain == Domain::One { pos } else { pos - n1 };
        if index != expected {
            return Err(parse_err(
                path,
                0,
                format!(
                    "domain {} indices must be 0..n without gaps or duplicates (expected {expected}, found {index})",
                    domain.id()
                ),
            ));
        }
        flat.extend(coords);
    }
    let rows = flat.len() / dim;
    Embedding::new(
        Array2::from_shape_vec((rows, dim), flat).expect("rows * dim values"),
        n1,
    )
}

pub fn save_embedding(embedding: &Embedding, path: &Path) -> Result<()> {
    write(path, &format_embedding(embedding))
}

pub fn load_embedding(path: &Path) -> Result<Embedding> {
    parse_embedding(&read(path)?, path)
}

/// `k fpr tpr` per line.
pub fn format_roc(curve: &RocCurve) -> String {
    let mut out = String::new();
    for p in &curve.points {
        let _ = writeln!(out, "{} {} {}", p.k, p.fpr, p.tpr);
    }
    out
}

pub fn save_roc(curve: &RocCurve, path: &Path) -> Result<()> {
    write(path, &format_roc(curve))
}

/// `iteration kl` per line, iterations counted from 1.
pub fn save_kl_trace(history: &[f64], path: &Path) -> Result<()> {
    let mut out = String::new();
    for (t, kl) in history.iter().enumerate() {
        let _ = writeln!(out, "{} {kl}", t + 1);
    }
    write(path, &out)
}

/// Files making up a dataset. Relative paths are resolved against the
/// manifest's directory.
///
/// ```toml
/// domain1 = "images.txt"
/// domain2 = "tags.txt"          # optional
/// cross_graph = "links.txt"     # required when domain2 is given
/// labels1 = "image_names.txt"   # optional, one label per line
/// labels2 = "tag_names.txt"     # optional
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub domain1: PathBuf,
    pub domain2: Option<PathBuf>,
    pub cross_graph: Option<PathBuf>,
    pub labels1: Option<PathBuf>,
    pub labels2: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let mut manifest: DatasetManifest = toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| {
                text[..s.start.min(text.len())].lines().count().max(1)
            });
            parse_err(path, line, e.message().to_string())
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut manifest.domain1);
        for p in [
            &mut manifest.domain2,
            &mut manifest.cross_graph,
            &mut manifest.labels1,
            &mut manifest.labels2,
        ]
        .into_iter()
        .flatten()
        {
            resolve(p);
        }
        Ok(manifest)
    }

    pub fn load_dataset(&self) -> Result<MultimodalDataset> {
        let x1 = load_matrix(&self.domain1)?;
        match (&self.domain2, &self.cross_graph) {
            (None, None) => MultimodalDataset::single(x1),
            (Some(d2), Some(g)) => {
                let x2 = load_matrix(d2)?;
                let w = load_cross_graph(g, x1.nrows(), x2.nrows())?;
                MultimodalDataset::new(x1, Some(x2), w)
            }
            _ => Err(Error::InvalidConfig(
                "manifest must give domain2 and cross_graph together".into(),
            )),
        }
    }

    /// Loads whichever label lists the manifest names, checking their
    /// lengths against the item counts.
    pub fn load_labels(&self, n1: usize, n2: usize) -> Result<Labels> {
        let read_labels = |p: &Option<PathBuf>, n: usize| -> Result<Option<Vec<String>>> {
            let Some(p) = p else { return Ok(None) };
            let labels: Vec<String> = read(p)?.lines().map(|l| l.trim_end().to_string()).collect();
            if labels.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{}: {} labels for {n} items",
                    p.display(),
                    labels.len()
                )));
            }
            Ok(Some(labels))
        };
        Ok(Labels {
            domain1: read_labels(&self.labels1, n1)?,
            domain2: read_labels(&self.labels2, n2)?,
        })
    }
}
