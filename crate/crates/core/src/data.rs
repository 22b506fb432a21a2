//! Dataset ingestion, splitting, standardization, PCA and angle encoding.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    /// One row per sample.
    pub features: Vec<Vec<f64>>,
    /// Class indices in `0..num_classes`.
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn num_samples(&self) -> usize {
        self.features.len()
    }

    pub fn num_features(&self) -> usize {
        self.features
            .first()
            .map_or(self.feature_names.len(), Vec::len)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order. Class metadata is kept.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
        }
    }

    fn with_features(&self, features: Vec<Vec<f64>>, feature_names: Vec<String>) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names,
            features,
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    Whitespace,
    /// Comma if the first data line contains one, whitespace otherwise.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelColumn {
    First,
    #[default]
    Last,
    Index(usize),
}

/// Column roles of a delimited text file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub delimiter: Delimiter,
    pub has_header: bool,
    pub label_column: LabelColumn,
    /// Zero-based columns to drop (identifiers and the like).
    pub ignore_columns: Vec<usize>,
}

impl Schema {
    /// Comma separated, header row, label in the last column.
    pub fn csv_with_header() -> Self {
        Self {
            delimiter: Delimiter::Comma,
            has_header: true,
            ..Self::default()
        }
    }
}

/// Reads a delimited numeric file with one label column.
///
/// Labels may be arbitrary tokens; they are re-indexed to `0..K` in order of
/// first appearance. Row and column numbers in errors are 1-based.
pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_dataset(&name, &text, schema).map_err(|e| match e {
        Error::Ingestion {
            row,
            column,
            message,
            ..
        } => Error::Ingestion {
            path: path.to_path_buf(),
            row,
            column,
            message,
        },
        other => other,
    })
}

/// Parses dataset text; see [`load_dataset`].
pub fn parse_dataset(name: &str, text: &str, schema: &Schema) -> Result<Dataset> {
    let ingestion = |row: usize, column: usize, message: String| Error::Ingestion {
        path: name.into(),
        row,
        column,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let comma = match schema.delimiter {
        Delimiter::Comma => true,
        Delimiter::Whitespace => false,
        Delimiter::Auto => text
            .lines()
            .find(|l| !l.trim().is_empty())
            .is_some_and(|l| l.contains(',')),
    };
    let split = |line: &str| -> Vec<String> {
        if comma {
            line.split(',').map(|c| c.trim().to_string()).collect()
        } else {
            line.split_whitespace().map(str::to_string).collect()
        }
    };

    let header = if schema.has_header {
        lines.next().map(|(_, l)| split(l))
    } else {
        None
    };

    let mut width: Option<usize> = None;
    let mut label_idx = 0usize;
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, line) in lines {
        let cells = split(line);
        match width {
            None => {
                width = Some(cells.len());
                label_idx = match schema.label_column {
                    LabelColumn::First => 0,
                    LabelColumn::Last => cells.len().saturating_sub(1),
                    LabelColumn::Index(i) => i,
                };
                if label_idx >= cells.len() || cells.len() < 2 {
                    return Err(ingestion(
                        row,
                        label_idx + 1,
                        "label column out of range".into(),
                    ));
                }
            }
            Some(w) if w != cells.len() => {
                return Err(ingestion(
                    row,
                    cells.len().min(w) + 1,
                    format!("expected {w} columns, found {}", cells.len()),
                ))
            }
            Some(_) => {}
        }
        let mut sample = Vec::with_capacity(cells.len() - 1);
        for (col, cell) in cells.iter().enumerate() {
            if col == label_idx || schema.ignore_columns.contains(&col) {
                continue;
            }
            if cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na") {
                return Err(ingestion(row, col + 1, "missing value".into()));
            }
            let value: f64 = cell
                .parse()
                .map_err(|_| ingestion(row, col + 1, format!("non-numeric value {cell:?}")))?;
            if !value.is_finite() {
                return Err(ingestion(
                    row,
                    col + 1,
                    format!("non-finite value {cell:?}"),
                ));
            }
            sample.push(value);
        }
        let label = &cells[label_idx];
        if label.is_empty() {
            return Err(ingestion(row, label_idx + 1, "missing label".into()));
        }
        features.push(sample);
        raw_labels.push(label.clone());
    }
    if features.is_empty() {
        return Err(Error::Dataset(format!("{name}: no samples")));
    }

    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let labels = raw_labels
        .into_iter()
        .map(|l| {
            let next = class_names.len();
            *class_index.entry(l.clone()).or_insert_with(|| {
                class_names.push(l);
                next
            })
        })
        .collect();

    let num_features = features[0].len();
    let feature_names = match header {
        Some(h) => h
            .into_iter()
            .enumerate()
            .filter(|(c, _)| *c != label_idx && !schema.ignore_columns.contains(c))
            .map(|(_, n)| n)
            .collect(),
        None => (0..num_features).map(|i| format!("x{i}")).collect(),
    };
    Ok(Dataset {
        name: name.to_string(),
        feature_names,
        features,
        labels,
        num_classes: class_names.len(),
        class_names,
    })
}

/// Largest-remainder apportionment of `total` proportional to `weights`,
/// never exceeding `caps`. Ties go to the lower index.
fn apportion(total: usize, weights: &[usize], caps: &[usize]) -> Option<Vec<usize>> {
    let weight_sum: usize = weights.iter().sum();
    if total > caps.iter().sum::<usize>() {
        return None;
    }
    if weight_sum == 0 {
        return (total == 0).then(|| vec![0; weights.len()]);
    }
    let mut alloc: Vec<usize> = weights
        .iter()
        .zip(caps)
        .map(|(&w, &c)| (total * w / weight_sum).min(c))
        .collect();
    let mut remainders: Vec<(usize, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| ((total * w) % weight_sum, i))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut assigned: usize = alloc.iter().sum();
    while assigned < total {
        let mut progressed = false;
        for &(_, i) in &remainders {
            if assigned == total {
                break;
            }
            if alloc[i] < caps[i] {
                alloc[i] += 1;
                assigned += 1;
                progressed = true;
            }
        }
        if !progressed {
            return None;
        }
    }
    Some(alloc)
}

/// Stratified shuffled split into disjoint train and test sets.
///
/// Classes with fewer than two samples are never placed in the test set.
pub fn split(
    dataset: &Dataset,
    train_size: usize,
    test_size: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let n = dataset.num_samples();
    if train_size == 0 || test_size == 0 || train_size + test_size > n {
        return Err(Error::Dataset(format!(
            "cannot split {n} samples into {train_size} train and {test_size} test"
        )));
    }
    let mut rng = seed::derive_rng(seed, &[seed::stream::SPLIT]);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.num_classes];
    for (i, &y) in dataset.labels.iter().enumerate() {
        by_class[y].push(i);
    }
    for rows in &mut by_class {
        rows.shuffle(&mut rng);
    }
    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let test_weights: Vec<usize> = sizes.iter().map(|&s| if s >= 2 { s } else { 0 }).collect();
    let test_caps: Vec<usize> = sizes
        .iter()
        .map(|&s| if s >= 2 { s - 1 } else { 0 })
        .collect();
    let test_alloc = apportion(test_size, &test_weights, &test_caps)
        .ok_or_else(|| Error::Dataset(format!("test size {test_size} cannot be stratified")))?;
    let train_caps: Vec<usize> = sizes.iter().zip(&test_alloc).map(|(s, t)| s - t).collect();
    let train_alloc = apportion(train_size, &sizes, &train_caps)
        .ok_or_else(|| Error::Dataset(format!("train size {train_size} cannot be stratified")))?;

    let mut test_rows = Vec::with_capacity(test_size);
    let mut train_rows = Vec::with_capacity(train_size);
    for (rows, (&t, &r)) in by_class.iter().zip(test_alloc.iter().zip(&train_alloc)) {
        test_rows.extend_from_slice(&rows[..t]);
        train_rows.extend_from_slice(&rows[t..t + r]);
    }
    train_rows.shuffle(&mut rng);
    test_rows.shuffle(&mut rng);
    Ok((dataset.subset(&train_rows), dataset.subset(&test_rows)))
}

/// Column means and population standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Dataset("cannot standardize an empty set".into()));
        }
        let width = rows[0].len();
        let mut mean = vec![0.0; width];
        for row in rows {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; width];
        for row in rows {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std: Vec<f64> = var.into_iter().map(|v| (v / n as f64).sqrt()).collect();
        if let Some(column) = std
            .iter()
            .zip(&mean)
            .position(|(&s, &m)| s <= 1e-12 * m.abs().max(1.0))
        {
            return Err(Error::ZeroVariance { column });
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|row| {
                row.iter()
                    .zip(self.mean.iter().zip(&self.std))
                    .map(|(x, (m, s))| (x - m) / s)
                    .collect()
            })
            .collect()
    }
}

/// Fits standardization on `train` only and applies it to both splits.
pub fn standardize_fit_apply(
    train: &Dataset,
    test: &Dataset,
) -> Result<(Dataset, Dataset, Vec<f64>, Vec<f64>)> {
    let st = Standardizer::fit(&train.features)?;
    let train_t = train.with_features(st.apply(&train.features), train.feature_names.clone());
    let test_t = test.with_features(st.apply(&test.features), test.feature_names.clone());
    Ok((train_t, test_t, st.mean, st.std))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` rows of length `F`, orthonormal.
    pub components: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    /// Fraction of total variance per retained component.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }
}

/// Principal components from the SVD of the centered training matrix.
///
/// Components are ordered by decreasing singular value and signed so that
/// each one's largest-magnitude entry is positive.
pub fn pca_fit(rows: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if k == 0 || k > width {
        return Err(Error::Pca(format!(
            "cannot keep {k} components of {width} features"
        )));
    }
    if k > n {
        return Err(Error::Pca(format!(
            "cannot keep {k} components from {n} samples"
        )));
    }
    let mut mean = vec![0.0; width];
    for row in rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, width, |i, j| rows[i][j] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Pca("singular value decomposition failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let mut components = Vec::with_capacity(k);
    let mut singular_values = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut row: Vec<f64> = v_t.row(idx).iter().copied().collect();
        let pivot = row
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &x)| {
                if x.abs() > best.1 {
                    (i, x.abs())
                } else {
                    best
                }
            })
            .0;
        if row[pivot] < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        let s = svd.singular_values[idx];
        components.push(row);
        singular_values.push(s);
        explained.push(if total > 0.0 { s * s / total } else { 0.0 });
    }
    Ok(PcaModel {
        mean,
        components,
        singular_values,
        explained_variance_ratio: explained,
    })
}

pub fn pca_apply(model: &PcaModel, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|row| {
            model
                .components
                .iter()
                .map(|c| {
                    c.iter()
                        .zip(row.iter().zip(&model.mean))
                        .map(|(w, (x, m))| w * (x - m))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Projects both splits onto `model`'s components.
pub fn pca_transform(model: &PcaModel, data: &Dataset) -> Dataset {
    let names = (1..=model.k()).map(|i| format!("pc{i}")).collect();
    data.with_features(pca_apply(model, &data.features), names)
}

/// Parameters of the feature-to-angle map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingParams {
    /// Angular gap as a fraction of pi.
    pub alpha: f64,
    /// Gaussian quantile mapped to the edge of the angular range.
    pub q: f64,
}

impl Default for EncodingParams {
    fn default() -> Self {
        Self { alpha: 0.1, q: 3.0 }
    }
}

impl EncodingParams {
    pub fn new(alpha: f64, q: f64) -> Result<Self> {
        let p = Self { alpha, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) || !(self.q > 0.0) || !self.q.is_finite() {
            return Err(Error::Config(format!(
                "encoding needs 0 < alpha < 2 and q > 0 (got alpha={}, q={})",
                self.alpha, self.q
            )));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        (1.0 - self.alpha / 2.0) * (PI / self.q)
    }
}

/// Maps a standardized feature value to an `Rz` angle.
pub fn encode(w: f64, params: &EncodingParams) -> f64 {
    params.scale() * w
}

pub fn encode_row(row: &[f64], params: &EncodingParams) -> Vec<f64> {
    let s = params.scale();
    row.iter().map(|w| s * w).collect()
}
