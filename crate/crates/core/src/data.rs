//! Dataset ingestion, min-max scaling, label-noise injection and
//! stratified fold construction.
//!
//! Features are stored row-major in a flat buffer; labels are re-encoded to
//! contiguous class identifiers `0..class_count` and the original label text
//! is kept alongside for reporting.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labeled feature matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    class_count: usize,
    label_names: Vec<String>,
    normalized: bool,
}

impl Dataset {
    /// Builds a dataset from feature rows and encoded labels. Label names
    /// default to the decimal class identifiers.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::config("dataset needs at least one feature column"));
        }
        if rows.len() != labels.len() {
            return Err(Error::config(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut features = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::config(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            features.extend_from_slice(row);
        }
        Self::from_parts(
            features,
            dim,
            labels,
            class_count,
            (0..class_count).map(|c| c.to_string()).collect(),
        )
    }

    pub(crate) fn from_parts(
        features: Vec<f64>,
        dim: usize,
        labels: Vec<usize>,
        class_count: usize,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 || features.len() != labels.len() * dim {
            return Err(Error::config("feature buffer does not match n x d"));
        }
        if class_count == 0 {
            return Err(Error::config("class_count must be positive"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::config(format!(
                "label {bad} outside [0, {class_count})"
            )));
        }
        if label_names.len() != class_count {
            return Err(Error::config("one label name per class is required"));
        }
        Ok(Dataset {
            features,
            dim,
            labels,
            class_count,
            label_names,
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Per-class sample counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Least frequent class; ties go to the smaller identifier.
    pub fn minority_class(&self) -> usize {
        let counts = self.class_counts();
        (0..self.class_count)
            .filter(|&c| counts[c] > 0)
            .min_by_key(|&c| (counts[c], c))
            .unwrap_or(0)
    }

    /// Rows selected by `indices`, in that order. Class encoding is kept.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            dim: self.dim,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            label_names: self.label_names.clone(),
            normalized: self.normalized,
        }
    }

    /// Same features with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        if labels.len() != self.len() {
            return Err(Error::contract("label vector length differs from n"));
        }
        if labels.iter().any(|&l| l >= self.class_count) {
            return Err(Error::contract("label outside class range"));
        }
        Ok(Dataset {
            labels,
            ..self.clone()
        })
    }
}

/// Reads a comma-separated file: numeric features followed by one label
/// column. Labels are re-encoded in order of first appearance.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, has_header)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut codes: HashMap<String, usize> = HashMap::new();
    let mut width: Option<usize> = None;

    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                line,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        if w < 2 {
            return Err(Error::Parse {
                line,
                message: "need at least one feature and a label".into(),
            });
        }
        for (col, field) in record.iter().take(w - 1).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric value {field:?} in column {}", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value in column {}", col + 1),
                });
            }
            features.push(v);
        }
        let raw = &record[w - 1];
        let code = *codes.entry(raw.to_string()).or_insert_with(|| {
            names.push(raw.to_string());
            names.len() - 1
        });
        labels.push(code);
    }

    let Some(w) = width else {
        return Err(Error::EmptyDataset);
    };
    Dataset::from_parts(features, w - 1, labels, names.len(), names)
}

/// Reads an unlabeled numeric matrix, e.g. prediction queries.
pub fn read_features<R: Read>(reader: R, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    message: format!("bad value {field:?} in column {}", col + 1),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Writes `ds` in the layout [`read_csv`] expects, with a header row.
pub fn write_csv<W: std::io::Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::Write(e.into());
    let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(to_io)?;
    for i in 0..ds.len() {
        let mut rec: Vec<String> = ds.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.label_names()[ds.label(i)].clone());
        w.write_record(&rec).map_err(to_io)?;
    }
    Ok(w.flush()?)
}

/// Column ranges learned from a training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(ds: &Dataset) -> Self {
        let mut mins = vec![f64::INFINITY; ds.dim()];
        let mut maxs = vec![f64::NEG_INFINITY; ds.dim()];
        for row in ds.rows() {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        MinMaxScaler { mins, maxs }
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    /// Maps one row. Values outside the fitted range land outside [0, 1];
    /// constant columns map to 0.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&v, (&lo, &hi))| {
                let span = hi - lo;
                if span > 0.0 {
                    (v - lo) / span
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn transform(&self, ds: &Dataset) -> Dataset {
        let mut features = Vec::with_capacity(ds.features.len());
        for row in ds.rows() {
            features.extend(self.transform_row(row));
        }
        Dataset {
            features,
            normalized: true,
            ..ds.clone()
        }
    }
}

/// Rescales every column to [0, 1] with its own min and max.
pub fn normalize_min_max(ds: &Dataset) -> Dataset {
    MinMaxScaler::fit(ds).transform(ds)
}

/// Flips `round(noise_rate * n)` distinct labels (half-up rounding) to a
/// uniformly chosen different class. Returns the noisy copy and the sorted
/// flipped indices.
pub fn inject_label_noise(
    ds: &Dataset,
    noise_rate: f64,
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    if !(0.0..=1.0).contains(&noise_rate) {
        return Err(Error::config(format!(
            "noise rate {noise_rate} outside [0, 1]"
        )));
    }
    let n = ds.len();
    let count = ((noise_rate * n as f64) + 0.5).floor() as usize;
    let count = count.min(n);
    if count == 0 {
        return Ok((ds.clone(), Vec::new()));
    }
    let k = ds.class_count();
    if k < 2 {
        return Err(Error::config("label noise needs at least two classes"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flipped = rand::seq::index::sample(&mut rng, n, count).into_vec();
    flipped.sort_unstable();
    let mut labels = ds.labels().to_vec();
    for &i in &flipped {
        let old = labels[i];
        let mut new = rng.random_range(0..k - 1);
        if new >= old {
            new += 1;
        }
        labels[i] = new;
    }
    Ok((ds.with_labels(labels)?, flipped))
}

/// Fold index per sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub fold_count: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// (train indices, test indices) for fold `k`, each ascending.
    pub fn split(&self, k: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == k {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified assignment: each class is shuffled with the seeded generator
/// and dealt round-robin, continuing the deal position across classes so
/// total fold sizes stay balanced as well.
pub fn make_folds(ds: &Dataset, fold_count: usize, seed: u64) -> Result<FoldPlan> {
    if fold_count < 2 {
        return Err(Error::config("fold count must be at least 2"));
    }
    if fold_count > ds.len() {
        return Err(Error::config(format!(
            "fold count {fold_count} exceeds sample count {}",
            ds.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.class_count()];
    for (i, &l) in ds.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut assignments = vec![0; ds.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = next;
            next = (next + 1) % fold_count;
        }
    }
    Ok(FoldPlan {
        fold_count,
        assignments,
        seed,
    })
}

/// SplitMix64 step; derives independent stream seeds from one run seed.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
