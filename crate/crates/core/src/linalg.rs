//! Symmetric linear operators and the Krylov machinery shared by the
//! subproblem solvers and the curvature estimators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest dimension for which a Hessian is ever materialized densely.
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// A symmetric linear map `v -> A v` on `R^d`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;

    /// Dense representation, when the implementation can produce one cheaply.
    fn dense(&self) -> Option<DMatrix<f64>> {
        None
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }

    fn dense(&self) -> Option<DMatrix<f64>> {
        Some(self.clone())
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (**self).apply(v)
    }

    fn dense(&self) -> Option<DMatrix<f64>> {
        (**self).dense()
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (**self).apply(v)
    }

    fn dense(&self) -> Option<DMatrix<f64>> {
        (**self).dense()
    }
}

/// Operator backed by a closure computing matrix-vector products.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> SymmetricOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (self.f)(v)
    }
}

/// Dense matrix of an operator, either from its own representation or by
/// applying it to the canonical basis and averaging with the transpose.
pub fn densify(op: &dyn SymmetricOperator) -> DMatrix<f64> {
    if let Some(m) = op.dense() {
        return m;
    }
    let d = op.dim();
    let mut m = DMatrix::zeros(d, d);
    let mut e = DVector::zeros(d);
    for j in 0..d {
        e[j] = 1.0;
        let col = op.apply(&e);
        m.set_column(j, &col);
        e[j] = 0.0;
    }
    symmetrize(&m)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    let mut out = m.clone();
    for i in 0..d {
        for j in (i + 1)..d {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = a;
            out[(j, i)] = a;
        }
    }
    out
}

/// Largest absolute entry of `A - A^T`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Eigendecomposition with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: DVector<f64>,
    /// Columns are unit eigenvectors, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub fn sorted_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let d = m.nrows();
    if d == 0 {
        return SortedEigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SortedEigen { values, vectors }
}

/// Symmetric tridiagonal matrix from its diagonal and off-diagonal.
pub fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}

/// Lanczos tridiagonalization with full reorthogonalization.
///
/// After `k` successful extensions the basis `Q_k` is orthonormal and
/// `A Q_k = Q_k T_k + beta_k q_{k+1} e_k^T`.
pub struct Lanczos<'a> {
    op: &'a dyn SymmetricOperator,
    basis: Vec<DVector<f64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    pending: Option<DVector<f64>>,
    breakdown: bool,
    applications: usize,
}

impl<'a> Lanczos<'a> {
    /// Starts from `start`, which must be nonzero.
    pub fn new(op: &'a dyn SymmetricOperator, start: &DVector<f64>) -> Self {
        let norm = start.norm();
        assert!(norm > 0.0, "Lanczos start vector must be nonzero");
        Self {
            op,
            basis: Vec::new(),
            alphas: Vec::new(),
            betas: Vec::new(),
            pending: Some(start / norm),
            breakdown: false,
            applications: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// True once the Krylov space became invariant or exhausted `R^d`.
    pub fn exhausted(&self) -> bool {
        self.breakdown || self.basis.len() >= self.op.dim()
    }

    pub fn applications(&self) -> usize {
        self.applications
    }

    /// Adds one basis vector. Returns false when no extension is possible.
    pub fn extend(&mut self) -> bool {
        if self.exhausted() {
            return false;
        }
        let q = match self.pending.take() {
            Some(q) => q,
            None => return false,
        };
        let mut w = self.op.apply(&q);
        self.applications += 1;
        let alpha = q.dot(&w);
        w.axpy(-alpha, &q, 1.0);
        if let (Some(prev), Some(&beta)) = (self.basis.last(), self.betas.last()) {
            w.axpy(-beta, prev, 1.0);
        }
        self.basis.push(q);
        self.alphas.push(alpha);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let beta = w.norm();
        let scale = self
            .alphas
            .iter()
            .chain(self.betas.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        if beta <= 1e-13 * scale || self.basis.len() >= self.op.dim() {
            self.breakdown = beta <= 1e-13 * scale;
            self.betas.push(if self.breakdown { 0.0 } else { beta });
            if !self.breakdown {
                self.pending = Some(w / beta);
            }
        } else {
            self.betas.push(beta);
            self.pending = Some(w / beta);
        }
        true
    }

    /// `T_k`, the projection of the operator onto the current basis.
    pub fn tridiagonal(&self) -> DMatrix<f64> {
        let k = self.alphas.len();
        tridiagonal(&self.alphas, &self.betas[..k.saturating_sub(1)])
    }

    /// Coupling `beta_k` between the last basis vector and the next one.
    pub fn last_beta(&self) -> f64 {
        self.betas.last().copied().unwrap_or(0.0)
    }

    /// Maps reduced coordinates back to `R^d`.
    pub fn lift(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.op.dim());
        for (c, q) in coeffs.iter().zip(&self.basis) {
            out.axpy(*c, q, 1.0);
        }
        out
    }
}

/// Operator norm estimate `max |lambda|` by power iteration.
///
/// Returns the largest Rayleigh-type estimate `||A v||` seen, which approaches
/// the spectral radius from below.
pub fn power_iteration_norm(
    op: &dyn SymmetricOperator,
    start: &DVector<f64>,
    max_iters: usize,
) -> f64 {
    let mut v = start.normalize();
    let mut est = 0.0f64;
    for _ in 0..max_iters {
        let w = op.apply(&v);
        let n = w.norm();
        if n == 0.0 {
            return est;
        }
        let converged = (n - est).abs() <= 1e-10 * n;
        est = est.max(n);
        v = w / n;
        if converged {
            break;
        }
    }
    est
}
