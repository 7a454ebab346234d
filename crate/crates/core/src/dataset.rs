//! Row-major feature matrices with optional ground-truth labels.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Distance from the origin added after the nonnegative shift, in standardized
/// units. Keeps the extreme lower-left point from becoming the zero vector,
/// which has no amplitude encoding.
pub const NONNEGATIVE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    n_features: usize,
    values: Vec<f64>,
    labels: Option<Vec<usize>>,
    transform: Option<FeatureTransform>,
}

impl DataSet {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("dataset"))?;
        let n_features = first.as_ref().len();
        if n_features == 0 {
            return Err(Error::Empty("feature vector"));
        }
        let mut values = Vec::with_capacity(rows.len() * n_features);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    actual: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(n_features, values)
    }

    pub fn from_flat(n_features: usize, values: Vec<f64>) -> Result<Self> {
        if n_features == 0 || values.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if !values.len().is_multiple_of(n_features) {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                actual: values.len() % n_features,
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self {
            n_features,
            values,
            labels: None,
            transform: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.n_features
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_features)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// The preprocessing transform applied to produce these features, if any.
    pub fn transform(&self) -> Option<&FeatureTransform> {
        self.transform.as_ref()
    }

    /// Rows at `indices`, in that order, keeping labels and the recorded transform.
    pub fn subset(&self, indices: &[usize]) -> DataSet {
        let mut values = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataSet {
            n_features: self.n_features,
            values,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            transform: self.transform.clone(),
        }
    }

    /// Standardizes every feature, then shifts it into the nonnegative quadrant.
    pub fn standardized_nonnegative(&self) -> DataSet {
        let transform = FeatureTransform::fit(self);
        let mut out = self.clone();
        for row in out.values.chunks_exact_mut(self.n_features) {
            transform.apply_in_place(row);
        }
        out.transform = Some(transform);
        out
    }
}

/// `x ↦ (x − mean) / scale + shift`, per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTransform {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl FeatureTransform {
    /// Zero mean and unit (population) variance, then a shift putting each
    /// feature's minimum at [`NONNEGATIVE_MARGIN`]. Constant features keep scale 1.
    pub fn fit(data: &DataSet) -> Self {
        let n = data.len() as f64;
        let f = data.n_features();
        let mut mean = vec![0.0; f];
        for row in data.rows() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; f];
        for row in data.rows() {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let scale: Vec<f64> = var
            .iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let shift = (0..f)
            .map(|j| {
                let min = data
                    .rows()
                    .map(|row| (row[j] - mean[j]) / scale[j])
                    .fold(f64::INFINITY, f64::min);
                NONNEGATIVE_MARGIN - min
            })
            .collect();
        Self { mean, scale, shift }
    }

    pub fn apply_in_place(&self, row: &mut [f64]) {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (*x - self.mean[j]) / self.scale[j] + self.shift[j];
        }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        let mut out = row.to_vec();
        self.apply_in_place(&mut out);
        out
    }
}
