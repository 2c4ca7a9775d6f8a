//! Dense linear-algebra and combinatorics substrate.

mod combinatorics;
mod linalg;
mod random;

pub use combinatorics::{
    binomial, block_assignments, block_assignments_capped, k_subsets, k_subsets_capped,
    multinomial, sign_vectors, sign_vectors_capped, BlockAssignment, ENUMERATION_CAP,
};
pub(crate) use linalg::scale_columns;
pub use linalg::{
    frobenius_distance, full_svd, orthonormal_complement, orthonormalize, spd_sqrt, sym_eig,
    sym_eig_unchecked, symmetrize, EigenPair, SvdData, DEFAULT_GAP_TOL,
};
pub use random::{random_frame, random_orthogonal, random_rect, random_spd, random_symmetric};

use crate::{EdError, Mat, Result};

/// Absolute symmetry tolerance, relative to `1 + max|entry|`.
const SYMMETRY_TOL: f64 = 1e-12;

/// Square real matrix stored canonically symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Mat);

impl SymmetricMatrix {
    /// Accepts `m` if it is symmetric up to `1e-12 · (1 + max|m_ij|)` and
    /// stores `(m + mᵀ)/2`.
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(EdError::ShapeMismatch {
                expected: (m.nrows(), m.nrows()),
                found: m.shape(),
            });
        }
        let scale = 1.0 + m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(EdError::InvalidParameter(format!(
                "matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        Ok(Self(symmetrize(&m)))
    }

    /// Symmetrizes an arbitrary square matrix.
    pub fn from_square(m: &Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(EdError::ShapeMismatch {
                expected: (m.nrows(), m.nrows()),
                found: m.shape(),
            });
        }
        Ok(Self(symmetrize(m)))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(Mat::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }
}

impl AsRef<Mat> for SymmetricMatrix {
    fn as_ref(&self) -> &Mat {
        &self.0
    }
}

/// Tall (or square) real matrix with `rows ≥ cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix(Mat);

impl RectMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        if m.ncols() > m.nrows() {
            return Err(EdError::InvalidParameter(format!(
                "expected rows >= cols, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }
}

impl AsRef<Mat> for RectMatrix {
    fn as_ref(&self) -> &Mat {
        &self.0
    }
}
