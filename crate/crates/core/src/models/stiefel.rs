use nalgebra::DVector;

use crate::matcore::{random_frame, spd_sqrt, sym_eig_unchecked, EigenPair, SymmetricMatrix};
use crate::{EdError, Mat, Result};

/// Cholesky model `V_B(k, n) = {X ∈ ℝ^{n×k} : XᵀX = B}` for positive definite `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelSpec {
    n: usize,
    b: SymmetricMatrix,
    b_eig: EigenPair,
    b_half: Mat,
    b_inv_half: Mat,
}

impl StiefelSpec {
    pub fn new(n: usize, b: SymmetricMatrix) -> Result<Self> {
        let k = b.n();
        if k == 0 || k > n {
            return Err(EdError::InvalidParameter(format!(
                "Stiefel model needs 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        let b_eig = sym_eig_unchecked(b.as_mat())?;
        let smallest = *b_eig.lambdas.last().unwrap();
        if !(smallest > 0.0) {
            return Err(EdError::InvalidParameter(format!(
                "B must be positive definite (smallest eigenvalue {smallest:.3e})"
            )));
        }
        let (b_half, b_inv_half) = spd_sqrt(&b_eig);
        Ok(Self {
            n,
            b,
            b_eig,
            b_half,
            b_inv_half,
        })
    }

    /// `B = I_k`, i.e. orthonormal `k`-frames.
    pub fn orthonormal(n: usize, k: usize) -> Result<Self> {
        Self::new(n, SymmetricMatrix::identity(k))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.b.n()
    }

    pub fn b(&self) -> &SymmetricMatrix {
        &self.b
    }

    /// Eigendecomposition `B = Q_B·diag(β)·Q_Bᵀ`, `β` decreasing.
    pub fn b_eigen(&self) -> &EigenPair {
        &self.b_eig
    }

    pub fn b_sqrt(&self) -> &Mat {
        &self.b_half
    }

    pub fn b_inv_sqrt(&self) -> &Mat {
        &self.b_inv_half
    }

    pub(crate) fn membership(&self, x: &Mat) -> f64 {
        let scale = 1.0 + x.norm();
        (x.tr_mul(x) - self.b.as_mat()).norm() / (scale * scale)
    }

    pub(crate) fn random_point(&self, seed: u64) -> Mat {
        random_frame(self.n, self.k(), seed) * &self.b_half
    }

    /// Symmetric `S` solving `B·S + S·B = M` in the eigenbasis of `B`.
    fn sylvester(&self, m: &Mat) -> Mat {
        let q = &self.b_eig.q;
        let beta = &self.b_eig.lambdas;
        let mut c = q.tr_mul(m) * q;
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                c[(i, j)] /= beta[i] + beta[j];
            }
        }
        q * c * q.transpose()
    }

    /// `Z − X·S` with `B·S + S·B = XᵀZ + ZᵀX`, which satisfies
    /// `Xᵀ(·) + (·)ᵀX = 0`.
    pub(crate) fn project(&self, x: &Mat, z: &Mat) -> Mat {
        let xtz = x.tr_mul(z);
        let s = self.sylvester(&(&xtz + xtz.transpose()));
        z - x * s
    }

    /// Coefficients `S = B⁻¹XᵀN` of a normal vector `N = X·S`.
    #[cfg(test)]
    pub(crate) fn solve_normal_coefficients(&self, x: &Mat, normal: &Mat) -> Mat {
        let b_inv = &self.b_inv_half * &self.b_inv_half;
        b_inv * x.tr_mul(normal)
    }

    /// `Y = X·B^{-1/2}` re-orthonormalized by thin QR with positive diagonal,
    /// mapped back by `B^{1/2}`.
    pub(crate) fn retract(&self, x: &Mat) -> Result<Mat> {
        let y = x * &self.b_inv_half;
        let qr = y.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..q.ncols() {
            let d = r[(j, j)];
            if !d.is_finite() || d == 0.0 {
                return Err(EdError::DecompositionFailure(
                    "rank-deficient retraction target".into(),
                ));
            }
            if d < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Ok(q * &self.b_half)
    }

    /// Orthonormal tangent basis from projecting the ambient unit matrices
    /// and Gram-Schmidt.
    pub(crate) fn tangent_basis(&self, x: &Mat) -> Vec<Mat> {
        let (n, k) = (self.n, self.k());
        let dim = n * k - k * (k + 1) / 2;
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
        for i in 0..n {
            for j in 0..k {
                if basis.len() == dim {
                    break;
                }
                let mut e = Mat::zeros(n, k);
                e[(i, j)] = 1.0;
                let t = self.project(x, &e);
                let mut v = DVector::from_column_slice(t.as_slice());
                for _ in 0..2 {
                    for b in &basis {
                        let c = b.dot(&v);
                        v.axpy(-c, b, 1.0);
                    }
                }
                let norm = v.norm();
                if norm > 1e-6 {
                    basis.push(v / norm);
                }
            }
        }
        basis
            .into_iter()
            .map(|v| Mat::from_column_slice(n, k, v.as_slice()))
            .collect()
    }
}
