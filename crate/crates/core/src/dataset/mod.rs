//! Sparse datasets: LIBSVM ingestion, seeded synthetic generators and
//! minibatch index sampling.
//!
//! Random streams come from `ChaCha8Rng` (the ChaCha stream cipher with 8
//! rounds, counter-based). A `(seed, stream)` pair fully determines every
//! sequence produced here, independent of platform.

mod batch;
mod libsvm;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use batch::{draw_indices, draw_minibatch, BatchSpec, Replacement};
pub use libsvm::{load_libsvm, parse_libsvm, write_libsvm, ParseOptions};
pub use synth::{synthesize_classification, synthesize_regression};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("batch of {size} without replacement exceeds {n} samples")]
    BatchTooLarge { size: usize, n: usize },
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("invalid metadata: {0}")]
    Metadata(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How raw labels are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    /// Class labels normalized to {0, 1}: {-1,+1} and {1,2} encodings are
    /// remapped, {0,1} passes through.
    Binary01,
    /// Real-valued regression targets, kept as read.
    Real,
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelKind::Binary01 => f.write_str("binary01"),
            LabelKind::Real => f.write_str("real"),
        }
    }
}

impl std::str::FromStr for LabelKind {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "binary01" => Ok(LabelKind::Binary01),
            "real" => Ok(LabelKind::Real),
            other => Err(DatasetError::Metadata(format!(
                "unknown label_kind {other:?}"
            ))),
        }
    }
}

/// Sparse design matrix in CSR layout plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    labels: Vec<f64>,
    label_kind: LabelKind,
}

impl Dataset {
    pub fn empty(label_kind: LabelKind) -> Self {
        Self {
            dim: 0,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            labels: Vec::new(),
            label_kind,
        }
    }

    /// Builds a dataset from per-row `(index, value)` lists with 0-based,
    /// strictly increasing indices below `dim`.
    pub fn from_rows(
        dim: usize,
        rows: Vec<Vec<(usize, f64)>>,
        labels: Vec<f64>,
        label_kind: LabelKind,
    ) -> Result<Self, DatasetError> {
        if rows.len() != labels.len() {
            return Err(DatasetError::Metadata(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut ds = Self::empty(label_kind);
        ds.dim = dim;
        for (r, row) in rows.into_iter().enumerate() {
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if j >= dim || last.is_some_and(|l| j <= l) {
                    return Err(DatasetError::Parse {
                        line: r + 1,
                        message: format!("index {j} out of order or beyond dimension {dim}"),
                    });
                }
                last = Some(j);
                ds.indices.push(j);
                ds.values.push(v);
            }
            ds.indptr.push(ds.indices.len());
        }
        ds.labels = labels;
        Ok(ds)
    }

    /// Dense rows, one `Vec` per sample.
    pub fn from_dense(
        rows: &[Vec<f64>],
        labels: Vec<f64>,
        label_kind: LabelKind,
    ) -> Result<Self, DatasetError> {
        let dim = rows.first().map_or(0, Vec::len);
        let sparse = rows
            .iter()
            .map(|r| r.iter().copied().enumerate().collect())
            .collect();
        Self::from_rows(dim, sparse, labels, label_kind)
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

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label_kind(&self) -> LabelKind {
        self.label_kind
    }

    /// Indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// `x_i^T w`.
    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &v)| v * w[j]).sum()
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum()
    }
}

/// Summary counts for a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub n: usize,
    pub d: usize,
    pub nnz: usize,
    /// Distinct label values with their counts, sorted by label.
    pub label_histogram: Vec<(f64, usize)>,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    let mut hist: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for &y in ds.labels() {
        // order-preserving key for finite floats
        let bits = y.to_bits();
        let key = if y.is_sign_negative() {
            !bits
        } else {
            bits | (1 << 63)
        };
        hist.entry(key).or_insert((y, 0)).1 += 1;
    }
    DatasetStats {
        n: ds.len(),
        d: ds.dim(),
        nnz: ds.nnz(),
        label_histogram: hist.into_values().collect(),
    }
}

/// Generator for stream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
