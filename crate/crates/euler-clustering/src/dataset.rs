//! Dataset handling: the half-moon generator, CSV ingestion, feature
//! normalization, and JSON result persistence.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Version stamp written into every persisted JSON document.
pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// A real-valued dataset with optional dense ground-truth labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealDataset {
    values: Matrix,
    labels: Option<Vec<usize>>,
}

impl RealDataset {
    pub fn new(values: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != values.rows() {
                return Err(Error::Shape(format!(
                    "{} labels for {} rows",
                    l.len(),
                    values.rows()
                )));
            }
        }
        Ok(Self { values, labels })
    }

    pub fn unlabeled(values: Matrix) -> Result<Self> {
        Self::new(values, None)
    }

    pub fn labeled(values: Matrix, labels: Vec<usize>) -> Result<Self> {
        Self::new(values, Some(labels))
    }

    pub fn n_points(&self) -> usize {
        self.values.rows()
    }

    pub fn n_dims(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of distinct label values, if labels are present.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map_or(0, |m| m + 1))
    }
}

/// Parameters for the two-interleaved-crescents synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfmoonSpec {
    /// Total number of points, split evenly between the two classes.
    pub n: usize,
    /// Standard deviation of the isotropic Gaussian noise added per point.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl HalfmoonSpec {
    /// Checks the size and noise invariants without generating anything.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "half-moon n must be even and at least 2, got {}",
                self.n
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half-moon noise must be a nonnegative real, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Generates the half-moon dataset: class 0 on the upper unit arc
/// `(cos t, sin t)`, class 1 on the mirrored shifted arc
/// `(1 - cos t, 1/2 - sin t)`, `t` uniform on `[0, pi]`, plus isotropic
/// Gaussian noise. Deterministic per seed.
pub fn gen_halfmoon(spec: &HalfmoonSpec) -> Result<RealDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::InvalidParameter(format!("half-moon noise: {e}")))?;
    let per_class = spec.n / 2;
    let mut values = Vec::with_capacity(spec.n * 2);
    let mut labels = Vec::with_capacity(spec.n);
    for class in 0..2usize {
        for _ in 0..per_class {
            let t = rng.random::<f64>() * std::f64::consts::PI;
            let (x, y) = if class == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            values.push(x + noise.sample(&mut rng));
            values.push(y + noise.sample(&mut rng));
            labels.push(class);
        }
    }
    RealDataset::labeled(Matrix::from_vec(spec.n, 2, values)?, labels)
}

/// How to locate the label column of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

fn is_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

/// Loads a rectangular numeric CSV file. A header row is auto-detected (any
/// non-numeric field in the first row). The optional label column is removed
/// from the feature block and densely re-encoded to `0..C-1` in order of
/// first appearance.
pub fn load_csv(path: &Path, label_column: Option<&LabelColumn>) -> Result<RealDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Parse(format!("{}: empty file", path.display())));
    }

    let has_header = records[0].iter().any(|f| !is_numeric(f));
    let header: Option<Vec<String>> = has_header
        .then(|| records[0].iter().map(|f| f.trim().to_string()).collect());
    let data_rows = &records[if has_header { 1 } else { 0 }..];
    if data_rows.is_empty() {
        return Err(Error::Parse(format!(
            "{}: no data rows below header",
            path.display()
        )));
    }

    let width = data_rows[0].len();
    let label_idx = match label_column {
        None => None,
        Some(LabelColumn::Index(i)) => {
            if *i >= width {
                return Err(Error::Parse(format!(
                    "{}: label column {} out of range for {} columns",
                    path.display(),
                    i,
                    width
                )));
            }
            Some(*i)
        }
        Some(LabelColumn::Name(name)) => {
            let header = header.as_ref().ok_or_else(|| {
                Error::Parse(format!(
                    "{}: label column {name:?} requested but file has no header",
                    path.display()
                ))
            })?;
            Some(header.iter().position(|h| h == name).ok_or_else(|| {
                Error::Parse(format!(
                    "{}: no column named {name:?} in header",
                    path.display()
                ))
            })?)
        }
    };

    let d = width - label_idx.map_or(0, |_| 1);
    let mut values = Vec::with_capacity(data_rows.len() * d);
    let mut raw_labels: Vec<String> = Vec::new();
    for (i, rec) in data_rows.iter().enumerate() {
        let row_no = i + 1 + has_header as usize;
        if rec.len() != width {
            return Err(Error::Parse(format!(
                "{}: row {}: expected {} columns, found {}",
                path.display(),
                row_no,
                width,
                rec.len()
            )));
        }
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                raw_labels.push(field.trim().to_string());
                continue;
            }
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "{}: row {}, column {}: non-numeric value {field:?}",
                    path.display(),
                    row_no,
                    c + 1
                ))
            })?;
            values.push(v);
        }
    }

    let labels = label_idx.map(|_| {
        let mut seen: Vec<&String> = Vec::new();
        raw_labels
            .iter()
            .map(|l| match seen.iter().position(|s| *s == l) {
                Some(p) => p,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            })
            .collect::<Vec<usize>>()
    });
    RealDataset::new(Matrix::from_vec(data_rows.len(), d, values)?, labels)
}

/// Writes a dataset back to CSV. Labeled datasets get a header
/// (`f1..fd,label`) and a trailing integer label column; unlabeled ones are
/// written as a bare numeric table. Values round-trip bit-exactly through
/// [`load_csv`].
pub fn save_csv(path: &Path, data: &RealDataset) -> Result<()> {
    let mut out = String::new();
    if data.labels().is_some() {
        for l in 0..data.n_dims() {
            let _ = write!(out, "f{},", l + 1);
        }
        out.push_str("label\n");
    }
    for j in 0..data.n_points() {
        for (l, v) in data.values().row(j).iter().enumerate() {
            if l > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        if let Some(labels) = data.labels() {
            let _ = write!(out, ",{}", labels[j]);
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Feature normalization applied before angle scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    None,
    #[default]
    MinMax01,
    Zscore,
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "minmax01" => Ok(Self::MinMax01),
            "zscore" => Ok(Self::Zscore),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization mode {other:?} (expected none|minmax01|zscore)"
            ))),
        }
    }
}

impl std::fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::MinMax01 => "minmax01",
            Self::Zscore => "zscore",
        })
    }
}

/// Per-feature parameters learned by [`normalize`], reusable on new points
/// (e.g. the cells of a boundary grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NormalizationParams {
    None,
    MinMax01 { min: Vec<f64>, max: Vec<f64> },
    Zscore { mean: Vec<f64>, std: Vec<f64> },
}

impl NormalizationParams {
    /// Applies the learned transform to one row. Constant features (zero
    /// range or zero spread) map to 0.
    pub fn apply_row(&self, row: &mut [f64]) {
        match self {
            Self::None => {}
            Self::MinMax01 { min, max } => {
                for (l, v) in row.iter_mut().enumerate() {
                    let range = max[l] - min[l];
                    *v = if range == 0.0 { 0.0 } else { (*v - min[l]) / range };
                }
            }
            Self::Zscore { mean, std } => {
                for (l, v) in row.iter_mut().enumerate() {
                    *v = if std[l] == 0.0 {
                        0.0
                    } else {
                        (*v - mean[l]) / std[l]
                    };
                }
            }
        }
    }
}

/// Normalizes every feature column and returns the transformed dataset along
/// with the learned per-feature parameters.
pub fn normalize(data: &RealDataset, mode: NormalizationMode) -> (RealDataset, NormalizationParams) {
    let (n, d) = (data.n_points(), data.n_dims());
    let params = match mode {
        NormalizationMode::None => NormalizationParams::None,
        NormalizationMode::MinMax01 => {
            let mut min = vec![f64::INFINITY; d];
            let mut max = vec![f64::NEG_INFINITY; d];
            for j in 0..n {
                for (l, v) in data.values().row(j).iter().enumerate() {
                    min[l] = min[l].min(*v);
                    max[l] = max[l].max(*v);
                }
            }
            NormalizationParams::MinMax01 { min, max }
        }
        NormalizationMode::Zscore => {
            let mut mean = vec![0.0; d];
            for j in 0..n {
                for (l, v) in data.values().row(j).iter().enumerate() {
                    mean[l] += v;
                }
            }
            for m in &mut mean {
                *m /= n as f64;
            }
            let mut std = vec![0.0; d];
            if n > 1 {
                for j in 0..n {
                    for (l, v) in data.values().row(j).iter().enumerate() {
                        std[l] += (v - mean[l]).powi(2);
                    }
                }
                for s in &mut std {
                    *s = (*s / (n - 1) as f64).sqrt();
                }
            }
            NormalizationParams::Zscore { mean, std }
        }
    };
    let mut values = data.values().clone();
    for j in 0..n {
        params.apply_row(values.row_mut(j));
    }
    let normalized = RealDataset::new(values, data.labels().map(<[usize]>::to_vec))
        .expect("normalization preserves shape");
    (normalized, params)
}

/// Envelope for persisted results: payload plus a schema version stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedDocument<T> {
    pub schema_version: u32,
    pub result: T,
}

/// Serializes a result document (clustering result or experiment report) to
/// pretty-printed JSON with a schema version field.
pub fn save_result<T: Serialize>(path: &Path, result: &T) -> Result<()> {
    let doc = SavedDocument {
        schema_version: RESULT_SCHEMA_VERSION,
        result,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, &doc)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    use std::io::Write as _;
    writer.write_all(b"\n").map_err(|e| Error::io(path, e))
}

/// Reads back a document written by [`save_result`].
pub fn load_result<T: DeserializeOwned>(path: &Path) -> Result<SavedDocument<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
