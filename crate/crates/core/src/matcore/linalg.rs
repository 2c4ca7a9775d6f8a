use nalgebra::DVector;

use super::{RectMatrix, SymmetricMatrix};
use crate::{EdError, Mat, Result};

/// Default relative eigen-gap below which a spectrum counts as repeated.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Sorted symmetric eigendecomposition `S = Q·diag(lambdas)·Qᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub q: Mat,
    /// Eigenvalues in decreasing order.
    pub lambdas: Vec<f64>,
    /// Smallest consecutive eigenvalue difference (`+∞` when `n ≤ 1`).
    pub gap: f64,
}

impl EigenPair {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn reconstruct(&self) -> Mat {
        scale_columns(&self.q, &self.lambdas) * self.q.transpose()
    }
}

/// Full singular value decomposition `A = U·[diag(sigmas); 0]·Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdData {
    /// `n × n` orthogonal.
    pub u: Mat,
    /// `k × k` orthogonal.
    pub v: Mat,
    /// Singular values in decreasing order, length `k`.
    pub sigmas: Vec<f64>,
}

impl SvdData {
    pub fn reconstruct(&self) -> Mat {
        let k = self.sigmas.len();
        let thin = self.u.columns(0, k).into_owned();
        scale_columns(&thin, &self.sigmas) * self.v.transpose()
    }
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn frobenius_distance(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm()
}

/// Multiplies column `j` of `m` by `d[j]`.
pub(crate) fn scale_columns(m: &Mat, d: &[f64]) -> Mat {
    let mut out = m.clone();
    for (j, &s) in d.iter().enumerate() {
        out.column_mut(j).scale_mut(s);
    }
    out
}

/// Flips the column so that its first entry of non-negligible magnitude is
/// positive. Returns whether a flip happened.
fn canonical_sign(m: &mut Mat, j: usize) -> bool {
    let col = m.column(j);
    let scale = col.amax();
    if scale == 0.0 {
        return false;
    }
    let lead = col.iter().copied().find(|x| x.abs() > 1e-10 * scale);
    if matches!(lead, Some(x) if x < 0.0) {
        m.column_mut(j).neg_mut();
        true
    } else {
        false
    }
}

fn min_gap(sorted_desc: &[f64]) -> f64 {
    sorted_desc
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min)
}

/// Decreasing-order eigendecomposition with no genericity check; used for
/// on-model points whose spectra are repeated by construction.
pub fn sym_eig_unchecked(m: &Mat) -> Result<EigenPair> {
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenPair {
            q: Mat::zeros(0, 0),
            lambdas: Vec::new(),
            gap: f64::INFINITY,
        });
    }
    if !m.iter().all(|x| x.is_finite()) {
        return Err(EdError::DecompositionFailure(
            "non-finite entries in symmetric input".into(),
        ));
    }
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut q = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        q.set_column(dst, &eig.eigenvectors.column(src));
        canonical_sign(&mut q, dst);
    }
    let gap = min_gap(&lambdas);
    Ok(EigenPair { q, lambdas, gap })
}

/// Sorted eigendecomposition of a symmetric matrix, failing with
/// [`EdError::DegenerateSpectrum`] when the smallest eigen-gap is below
/// `gap_tol · (1 + ‖S‖_F)`.
pub fn sym_eig(s: &SymmetricMatrix, gap_tol: f64) -> Result<EigenPair> {
    if gap_tol < 0.0 {
        return Err(EdError::InvalidParameter("gap_tol must be >= 0".into()));
    }
    let pair = sym_eig_unchecked(s.as_mat())?;
    let threshold = gap_tol * (1.0 + s.as_mat().norm());
    if pair.gap < threshold {
        return Err(EdError::DegenerateSpectrum {
            gap: pair.gap,
            threshold,
        });
    }
    Ok(pair)
}

/// Full SVD with `U` completed to an `n × n` orthogonal matrix.
pub fn full_svd(a: &RectMatrix) -> Result<SvdData> {
    let (n, k) = (a.rows(), a.cols());
    if k == 0 {
        return Ok(SvdData {
            u: Mat::identity(n, n),
            v: Mat::zeros(0, 0),
            sigmas: Vec::new(),
        });
    }
    if !a.as_mat().iter().all(|x| x.is_finite()) {
        return Err(EdError::DecompositionFailure("non-finite entries".into()));
    }
    let svd = a
        .as_mat()
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| EdError::DecompositionFailure("SVD did not converge".into()))?;
    let (u_thin, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(EdError::DecompositionFailure(
                "missing singular vectors".into(),
            ))
        }
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut u_k = Mat::zeros(n, k);
    let mut v = Mat::zeros(k, k);
    let mut sigmas = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u_k.set_column(dst, &u_thin.column(src));
        v.set_column(dst, &v_t.row(src).transpose());
        sigmas.push(svd.singular_values[src]);
        if canonical_sign(&mut u_k, dst) {
            v.column_mut(dst).neg_mut();
        }
    }
    let complement = orthonormal_complement(&u_k);
    let mut u = Mat::zeros(n, n);
    u.columns_mut(0, k).copy_from(&u_k);
    u.columns_mut(k, n - k).copy_from(&complement);
    for j in k..n {
        canonical_sign(&mut u, j);
    }
    Ok(SvdData { u, v, sigmas })
}

fn project_out(basis: &Mat, v: &mut DVector<f64>) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        let coeffs = basis.tr_mul(v);
        *v -= basis * coeffs;
    }
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `basis` (`n × r`), returned as `n × (n − r)`.
///
/// Candidates are the standard basis vectors, picked greedily by largest
/// residual so the result is deterministic.
pub fn orthonormal_complement(basis: &Mat) -> Mat {
    let n = basis.nrows();
    let r = basis.ncols();
    let mut current = basis.clone();
    let mut out = Mat::zeros(n, n - r);
    let mut used = vec![false; n];
    for col in 0..(n - r) {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (i, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            project_out(&current, &mut e);
            let norm = e.norm();
            if best.as_ref().is_none_or(|(_, _, b)| norm > *b) {
                best = Some((i, e, norm));
            }
        }
        let (i, e, norm) = best.expect("complement candidate exists");
        used[i] = true;
        let unit = e / norm;
        let last = current.ncols();
        current = current.insert_column(last, 0.0);
        current.set_column(last, &unit);
        out.set_column(col, &unit);
    }
    out
}

/// Gram-Schmidt orthonormalization of the columns of `m`, in order.
/// Fails with [`EdError::RankDeficient`] when a column has relative residual
/// below `rank_tol`.
pub fn orthonormalize(m: &Mat, rank_tol: f64) -> Result<Mat> {
    let (n, r) = m.shape();
    let mut out = Mat::zeros(n, r);
    for j in 0..r {
        let mut v = m.column(j).into_owned();
        let original = v.norm();
        if j > 0 {
            project_out(&out.columns(0, j).into_owned(), &mut v);
        }
        let norm = v.norm();
        if original == 0.0 || norm <= rank_tol * original {
            return Err(EdError::RankDeficient(format!(
                "column {j} is (numerically) dependent on earlier columns"
            )));
        }
        out.set_column(j, &(v / norm));
    }
    Ok(out)
}

/// `(B^{1/2}, B^{-1/2})` from the eigendecomposition of a positive definite `B`.
pub fn spd_sqrt(eig: &EigenPair) -> (Mat, Mat) {
    let roots: Vec<f64> = eig.lambdas.iter().map(|b| b.sqrt()).collect();
    let inv: Vec<f64> = roots.iter().map(|r| 1.0 / r).collect();
    let qt = eig.q.transpose();
    (
        scale_columns(&eig.q, &roots) * &qt,
        scale_columns(&eig.q, &inv) * &qt,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{random_rect, random_symmetric};

    fn orthogonality_residual(q: &Mat) -> f64 {
        (q.tr_mul(q) - Mat::identity(q.ncols(), q.ncols())).norm()
    }

    #[test]
    fn diagonal_eigendecomposition_reorders() {
        let s = SymmetricMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let e = sym_eig(&s, 1e-8).unwrap();
        assert_eq!(e.lambdas, vec![3.0, 2.0, 1.0]);
        let expected = Mat::from_row_slice(3, 3, &[1., 0., 0., 0., 0., 1., 0., 1., 0.]);
        assert_eq!(e.q, expected);
        assert_eq!(e.gap, 1.0);
    }

    #[test]
    fn identity_is_degenerate() {
        let err = sym_eig(&SymmetricMatrix::identity(3), 1e-8).unwrap_err();
        assert!(matches!(err, EdError::DegenerateSpectrum { .. }));
    }

    #[test]
    fn random_eigendecomposition_reconstructs() {
        let s = random_symmetric(5, 11);
        let e = sym_eig(&s, 1e-8).unwrap();
        let scale = 1.0 + s.as_mat().norm();
        assert!((e.reconstruct() - s.as_mat()).norm() <= 1e-10 * scale);
        assert!(orthogonality_residual(&e.q) <= 5e-10);
        assert!(e.lambdas.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn svd_of_single_column() {
        let a = RectMatrix::new(Mat::from_column_slice(2, 1, &[3.0, 4.0])).unwrap();
        let svd = full_svd(&a).unwrap();
        assert!((svd.sigmas[0] - 5.0).abs() < 1e-14);
        assert!((svd.u[(0, 0)] - 0.6).abs() < 1e-14);
        assert!((svd.u[(1, 0)] - 0.8).abs() < 1e-14);
        assert_eq!(svd.u.shape(), (2, 2));
        assert!(orthogonality_residual(&svd.u) < 1e-14);
        assert!((svd.reconstruct() - a.as_mat()).norm() < 1e-14);
    }

    #[test]
    fn svd_of_identity() {
        let a = RectMatrix::new(Mat::identity(2, 2)).unwrap();
        let svd = full_svd(&a).unwrap();
        assert_eq!(svd.sigmas, vec![1.0, 1.0]);
    }

    #[test]
    fn random_svd_reconstructs() {
        let a = random_rect(5, 3, 4);
        let svd = full_svd(&a).unwrap();
        assert!((svd.reconstruct() - a.as_mat()).norm() <= 1e-10 * (1.0 + a.as_mat().norm()));
        assert!(orthogonality_residual(&svd.u) <= 1e-10 * 5.0);
        assert!(orthogonality_residual(&svd.v) <= 1e-10 * 3.0);
        assert!(svd.sigmas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn complement_of_coordinate_subspace() {
        let mut b = Mat::zeros(4, 2);
        b[(0, 0)] = 1.0;
        b[(2, 1)] = 1.0;
        let c = orthonormal_complement(&b);
        assert_eq!(c.shape(), (4, 2));
        assert_eq!(
            c.column(0).iter().copied().collect::<Vec<_>>(),
            vec![0., 1., 0., 0.]
        );
        assert_eq!(
            c.column(1).iter().copied().collect::<Vec<_>>(),
            vec![0., 0., 0., 1.]
        );
    }

    #[test]
    fn orthonormalize_detects_dependence() {
        let m = Mat::from_column_slice(3, 2, &[1., 2., 3., 2., 4., 6.]);
        assert!(matches!(
            orthonormalize(&m, 1e-10),
            Err(EdError::RankDeficient(_))
        ));
    }
}
