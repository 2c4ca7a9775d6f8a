use std::ops::Range;

use super::{Orbit, OrbitFrame};
use crate::matcore::{orthonormal_complement, orthonormalize, random_orthogonal, symmetrize};
use crate::{EdError, Mat, Result};

const NESTING_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-10;
const FRAME_TOL: f64 = 1e-10;

/// Orthogonal `Q` whose first `k` columns span `𝕌`, next `n − m` span `𝕎^⊥`
/// and last `m − k` span `𝕎 ∩ 𝕌^⊥`.
pub fn adapted_frame(u_basis: &Mat, w_basis: &Mat) -> Result<Mat> {
    let n = u_basis.nrows();
    if w_basis.nrows() != n {
        return Err(EdError::ShapeMismatch {
            expected: (n, w_basis.ncols()),
            found: w_basis.shape(),
        });
    }
    let (k, m) = (u_basis.ncols(), w_basis.ncols());
    if k > m || m > n {
        return Err(EdError::InvalidParameter(format!(
            "need dim U <= dim W <= n, got {k}, {m}, {n}"
        )));
    }
    let u = orthonormalize(u_basis, RANK_TOL)?;
    let w = orthonormalize(w_basis, RANK_TOL)?;
    let deviation = (&u - &w * w.tr_mul(&u)).norm();
    if deviation > NESTING_TOL {
        return Err(EdError::NotNested { deviation });
    }
    let w_perp = orthonormal_complement(&w);
    let mut head = Mat::zeros(n, n - m + k);
    head.columns_mut(0, k).copy_from(&u);
    head.columns_mut(k, n - m).copy_from(&w_perp);
    // complement of U ⊕ W^⊥ is W ∩ U^⊥
    let middle = orthonormal_complement(&head);
    let mut q = Mat::zeros(n, n);
    q.columns_mut(0, n - m + k).copy_from(&head);
    q.columns_mut(n - m + k, m - k).copy_from(&middle);
    Ok(q)
}

/// Quadratic model `Ω_{a,b}(𝕌, 𝕎)` of the Schubert variety of
/// `l`-dimensional subspaces between `𝕌` (dim `k`) and `𝕎` (dim `m`).
#[derive(Debug, Clone, PartialEq)]
pub struct SchubertSpec {
    n: usize,
    k: usize,
    l: usize,
    m: usize,
    a: f64,
    b: f64,
    q: Mat,
    inner: Orbit,
    outer: Orbit,
}

/// Components of the Schubert membership residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchubertResiduals {
    /// Residual against `Gr_{a,b}(l, n)`.
    pub grassmann: f64,
    /// Deviation of the fixed blocks of `QᵀXQ` from `diag(aI_k, bI_{n−m}, ·)`
    /// and of its off-diagonal blocks from zero.
    pub block: f64,
    /// Residual of the inner block against `Gr_{a,b}(l − k, m − k)`.
    pub inner: f64,
}

impl SchubertResiduals {
    pub fn max(&self) -> f64 {
        self.grassmann.max(self.block).max(self.inner)
    }
}

impl SchubertSpec {
    /// Builds the model from an adapted frame `q`. `k = 0` and `m = n` are
    /// allowed and give the trivial nestings `𝕌 = {0}`, `𝕎 = ℝⁿ`.
    pub fn new(n: usize, k: usize, l: usize, m: usize, a: f64, b: f64, q: Mat) -> Result<Self> {
        if !(k <= l && l <= m && m <= n) || n == 0 {
            return Err(EdError::InvalidParameter(format!(
                "need k <= l <= m <= n, got k={k}, l={l}, m={m}, n={n}"
            )));
        }
        if !(a.is_finite() && b.is_finite()) || a == b {
            return Err(EdError::InvalidParameter(
                "(a, b) must be finite and distinct".into(),
            ));
        }
        if q.shape() != (n, n) {
            return Err(EdError::ShapeMismatch {
                expected: (n, n),
                found: q.shape(),
            });
        }
        let orth = (q.tr_mul(&q) - Mat::identity(n, n)).norm();
        if orth > FRAME_TOL * n as f64 {
            return Err(EdError::InvalidParameter(format!(
                "frame Q is not orthogonal (residual {orth:.3e})"
            )));
        }
        Ok(Self {
            n,
            k,
            l,
            m,
            a,
            b,
            q,
            inner: Orbit::new(vec![a, b], vec![l - k, m - l]),
            outer: Orbit::new(vec![a, b], vec![l, n - l]),
        })
    }

    /// Validates the nesting `span(u_basis) ⊆ span(w_basis)` and builds the
    /// adapted frame.
    pub fn from_subspaces(u_basis: &Mat, w_basis: &Mat, l: usize, a: f64, b: f64) -> Result<Self> {
        let q = adapted_frame(u_basis, w_basis)?;
        Self::new(
            u_basis.nrows(),
            u_basis.ncols(),
            l,
            w_basis.ncols(),
            a,
            b,
            q,
        )
    }

    /// Random nested pair: `𝕌` and `𝕎` spanned by the leading `k` and `m`
    /// columns of a seeded random orthogonal matrix.
    pub fn random_nested(
        n: usize,
        k: usize,
        l: usize,
        m: usize,
        a: f64,
        b: f64,
        seed: u64,
    ) -> Result<Self> {
        if m > n {
            return Err(EdError::InvalidParameter(format!("m={m} exceeds n={n}")));
        }
        let r = random_orthogonal(n, seed);
        let u = r.columns(0, k).into_owned();
        let w = r.columns(0, m).into_owned();
        Self::from_subspaces(&u, &w, l, a, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn frame(&self) -> &Mat {
        &self.q
    }

    /// Index range of the free `(m − k) × (m − k)` block in `QᵀXQ`.
    pub fn inner_range(&self) -> Range<usize> {
        (self.n + self.k - self.m)..self.n
    }

    pub(crate) fn inner_orbit(&self) -> &Orbit {
        &self.inner
    }

    /// Block `(3,3)` of `QᵀXQ`.
    pub fn extract_inner(&self, x: &Mat) -> Mat {
        let c = self.q.tr_mul(x) * &self.q;
        let r = self.inner_range();
        c.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }

    fn embed_with(&self, frame: &Mat, x_inner: &Mat) -> Mat {
        let n = self.n;
        let mut c = Mat::zeros(n, n);
        for i in 0..self.k {
            c[(i, i)] = self.a;
        }
        for i in self.k..(self.k + n - self.m) {
            c[(i, i)] = self.b;
        }
        let r = self.inner_range();
        c.view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(x_inner);
        symmetrize(&(frame * c * frame.transpose()))
    }

    /// `Q·diag(aI_k, bI_{n−m}, X_inner)·Qᵀ`.
    pub fn embed(&self, x_inner: &Mat) -> Result<Mat> {
        let size = self.m - self.k;
        if x_inner.shape() != (size, size) {
            return Err(EdError::ShapeMismatch {
                expected: (size, size),
                found: x_inner.shape(),
            });
        }
        let residual = self.inner.membership(x_inner)?;
        let tol = super::DEFAULT_MEMBERSHIP_TOL * size.max(1) as f64;
        if residual > tol {
            return Err(EdError::NotOnManifold { residual, tol });
        }
        Ok(self.embed_with(&self.q, x_inner))
    }

    /// Embedding through the rotated frame `Q·diag(I_{n+k−m}, V)`.
    pub(crate) fn embed_rotated(&self, v: &Mat, x_inner: &Mat) -> Mat {
        let r = self.inner_range();
        let mut rot = Mat::identity(self.n, self.n);
        rot.view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(v);
        self.embed_with(&(&self.q * rot), x_inner)
    }

    pub fn residuals(&self, x: &Mat) -> Result<SchubertResiduals> {
        let scale = 1.0 + x.norm();
        let grassmann = self.outer.membership(x)?;
        let c = self.q.tr_mul(&symmetrize(x)) * &self.q;
        let r = self.inner_range();
        let inner_block = c.view((r.start, r.start), (r.len(), r.len())).into_owned();
        let mut target = c.clone();
        target.fill(0.0);
        for i in 0..self.k {
            target[(i, i)] = self.a;
        }
        for i in self.k..r.start {
            target[(i, i)] = self.b;
        }
        target
            .view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(&inner_block);
        let block = (c - target).norm() / scale;
        let inner = self.inner.membership(&inner_block)?;
        Ok(SchubertResiduals {
            grassmann,
            block,
            inner,
        })
    }

    pub(crate) fn random_point(&self, seed: u64) -> Mat {
        let x_inner = symmetrize(&self.inner.random_point(seed));
        self.embed_with(&self.q, &x_inner)
    }

    pub(crate) fn inner_frame(&self, x: &Mat) -> Result<OrbitFrame> {
        self.inner.frame(&symmetrize(&self.extract_inner(x)))
    }

    fn lift(&self, inner_dir: &Mat) -> Mat {
        let n = self.n;
        let r = self.inner_range();
        let mut c = Mat::zeros(n, n);
        c.view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(inner_dir);
        &self.q * c * self.q.transpose()
    }

    pub(crate) fn project(&self, frame: &OrbitFrame, z: &Mat) -> Mat {
        let z_inner = self.extract_inner(&symmetrize(z));
        symmetrize(&self.lift(&self.inner.project(frame, &z_inner)))
    }

    pub(crate) fn retract(&self, y: &Mat) -> Result<(Mat, OrbitFrame)> {
        let (x_inner, frame) = self.inner.retract(&self.extract_inner(&symmetrize(y)))?;
        Ok((self.embed_with(&self.q, &x_inner), frame))
    }

    pub(crate) fn tangent_basis(&self, frame: &OrbitFrame) -> Vec<Mat> {
        self.inner
            .tangent_basis(frame)
            .iter()
            .map(|e| self.lift(e))
            .collect()
    }
}
