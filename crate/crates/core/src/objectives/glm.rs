//! Shared machinery for losses of the form `(1/n) Σ φ(y_i, x_i^T w) + r(w)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{check_dense_cap, check_point, ObjectiveError};
use crate::dataset::Dataset;
use crate::linalg::{SymmetricOperator, DEFAULT_DENSE_CAP};

/// Scalar loss in the linear predictor `z = x^T w`.
pub(crate) trait Link: Send + Sync {
    fn loss(&self, y: f64, z: f64) -> f64;
    fn d1(&self, y: f64, z: f64) -> f64;
    fn d2(&self, y: f64, z: f64) -> f64;
}

/// Separable penalty added to every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    None,
    /// `alpha Σ w_i^2 / (1 + w_i^2)`, bounded and nonconvex.
    Nonconvex {
        alpha: f64,
    },
    /// `(lambda/2) ||w||^2`.
    Ridge {
        lambda: f64,
    },
}

impl Regularizer {
    pub fn value(&self, w: &DVector<f64>) -> f64 {
        match *self {
            Regularizer::None => 0.0,
            Regularizer::Nonconvex { alpha } => {
                alpha * w.iter().map(|x| x * x / (1.0 + x * x)).sum::<f64>()
            }
            Regularizer::Ridge { lambda } => 0.5 * lambda * w.norm_squared(),
        }
    }

    pub(crate) fn add_gradient(&self, w: &DVector<f64>, out: &mut DVector<f64>) {
        match *self {
            Regularizer::None => {}
            Regularizer::Nonconvex { alpha } => {
                for (o, &x) in out.iter_mut().zip(w.iter()) {
                    let q = 1.0 + x * x;
                    *o += alpha * 2.0 * x / (q * q);
                }
            }
            Regularizer::Ridge { lambda } => out.axpy(lambda, w, 1.0),
        }
    }

    /// Diagonal of the (diagonal) penalty Hessian.
    pub(crate) fn hessian_diag(&self, w: &DVector<f64>) -> Option<DVector<f64>> {
        match *self {
            Regularizer::None => None,
            Regularizer::Nonconvex { alpha } => Some(w.map(|x| {
                let q = 1.0 + x * x;
                alpha * (2.0 - 6.0 * x * x) / (q * q * q)
            })),
            Regularizer::Ridge { lambda } => Some(DVector::from_element(w.len(), lambda)),
        }
    }

    /// Bounds on the penalty's Hessian norm and Hessian Lipschitz constant.
    pub(crate) fn lipschitz_bounds(&self) -> (f64, f64) {
        match *self {
            Regularizer::None => (0.0, 0.0),
            // |r''| <= 2 at w = 0; max |r'''| = max 24|w(w^2-1)|/(1+w^2)^4 < 4.67
            Regularizer::Nonconvex { alpha } => (2.0 * alpha, 4.67 * alpha),
            Regularizer::Ridge { lambda } => (lambda, 0.0),
        }
    }
}

pub(crate) struct GlmCore<L> {
    pub data: Arc<Dataset>,
    pub link: L,
    pub reg: Regularizer,
}

impl<L: Link> GlmCore<L> {
    pub fn check(&self, w: &DVector<f64>) -> Result<(), ObjectiveError> {
        if self.data.is_empty() {
            return Err(ObjectiveError::EmptyDataset);
        }
        check_point(w, self.data.dim())
    }

    pub fn value(&self, w: &DVector<f64>) -> Result<f64, ObjectiveError> {
        self.check(w)?;
        let ds = &self.data;
        let ws = w.as_slice();
        let total: f64 = (0..ds.len())
            .map(|i| self.link.loss(ds.labels()[i], ds.row_dot(i, ws)))
            .sum();
        Ok(total / ds.len() as f64 + self.reg.value(w))
    }

    pub fn gradient(&self, w: &DVector<f64>) -> Result<DVector<f64>, ObjectiveError> {
        self.check(w)?;
        let ds = &self.data;
        let ws = w.as_slice();
        let mut g = DVector::zeros(ds.dim());
        for i in 0..ds.len() {
            let c = self.link.d1(ds.labels()[i], ds.row_dot(i, ws));
            let (idx, val) = ds.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                g[j] += c * v;
            }
        }
        g /= ds.len() as f64;
        self.reg.add_gradient(w, &mut g);
        Ok(g)
    }

    pub fn hessian(
        &self,
        w: &DVector<f64>,
        samples: Option<&[usize]>,
    ) -> Result<GlmHessian<'_>, ObjectiveError> {
        self.check(w)?;
        let ds = &*self.data;
        if let Some(s) = samples {
            if s.is_empty() {
                return Err(ObjectiveError::EmptySampleSet);
            }
            if let Some(&index) = s.iter().find(|&&i| i >= ds.len()) {
                return Err(ObjectiveError::SampleOutOfRange { index, n: ds.len() });
            }
        }
        let ws = w.as_slice();
        let weight = |i: usize| self.link.d2(ds.labels()[i], ds.row_dot(i, ws));
        let (samples, weights): (Option<Vec<usize>>, Vec<f64>) = match samples {
            None => (None, (0..ds.len()).map(weight).collect()),
            Some(s) => (Some(s.to_vec()), s.iter().map(|&i| weight(i)).collect()),
        };
        Ok(GlmHessian {
            data: ds,
            inv_count: 1.0 / weights.len() as f64,
            samples,
            weights,
            reg_diag: self.reg.hessian_diag(w),
        })
    }

    pub fn full_hessian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>, ObjectiveError> {
        check_dense_cap(self.data.dim(), DEFAULT_DENSE_CAP)?;
        Ok(self.hessian(w, None)?.to_dense())
    }
}

/// `(1/|S|) Σ_{i∈S} φ''_i x_i x_i^T + diag(r'')` with per-sample curvatures
/// frozen at the anchor point.
pub struct GlmHessian<'a> {
    data: &'a Dataset,
    samples: Option<Vec<usize>>,
    weights: Vec<f64>,
    inv_count: f64,
    reg_diag: Option<DVector<f64>>,
}

impl GlmHessian<'_> {
    fn sample(&self, k: usize) -> usize {
        match &self.samples {
            Some(s) => s[k],
            None => k,
        }
    }

    pub fn num_samples(&self) -> usize {
        self.weights.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.data.dim();
        let mut h = DMatrix::zeros(d, d);
        for (k, &c) in self.weights.iter().enumerate() {
            let (idx, val) = self.data.row(self.sample(k));
            for (a, (&ja, &va)) in idx.iter().zip(val).enumerate() {
                let cva = c * va;
                for (&jb, &vb) in idx[a..].iter().zip(&val[a..]) {
                    h[(ja, jb)] += cva * vb;
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let mut x = h[(a, b)] * self.inv_count;
                if a == b {
                    if let Some(r) = &self.reg_diag {
                        x += r[a];
                    }
                }
                h[(a, b)] = x;
                h[(b, a)] = x;
            }
        }
        h
    }
}

impl SymmetricOperator for GlmHessian<'_> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let vs = v.as_slice();
        let mut out = DVector::zeros(self.data.dim());
        for (k, &c) in self.weights.iter().enumerate() {
            let i = self.sample(k);
            let coef = c * self.data.row_dot(i, vs);
            let (idx, val) = self.data.row(i);
            for (&j, &x) in idx.iter().zip(val) {
                out[j] += coef * x;
            }
        }
        out *= self.inv_count;
        if let Some(r) = &self.reg_diag {
            out += r.component_mul(v);
        }
        out
    }

    fn dense(&self) -> Option<DMatrix<f64>> {
        (self.data.dim() <= DEFAULT_DENSE_CAP).then(|| self.to_dense())
    }
}
