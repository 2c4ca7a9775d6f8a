//! Shared machinery for isospectral orbits `{V·D·Vᵀ : V ∈ O_n}`, covering the
//! flag model, the quadratic Grassmann model and the inner block of the
//! Schubert model.

use crate::matcore::{random_orthogonal, scale_columns, sym_eig_unchecked, symmetrize};
use crate::{Mat, Result};

/// Spectrum `b_1^{s_1}, …, b_{p+1}^{s_{p+1}}` of an isospectral orbit.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Orbit {
    values: Vec<f64>,
    sizes: Vec<usize>,
    /// Per rank position (decreasing eigenvalue order): the block index.
    ranked_blocks: Vec<usize>,
}

/// Eigenbasis of an on-orbit point with each column tagged by its block.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitFrame {
    pub(crate) v: Mat,
    pub(crate) blocks: Vec<usize>,
}

impl Orbit {
    pub(crate) fn new(values: Vec<f64>, sizes: Vec<usize>) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        let ranked_blocks = order
            .iter()
            .flat_map(|&b| std::iter::repeat_n(b, sizes[b]))
            .collect();
        Self {
            values,
            sizes,
            ranked_blocks,
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub(crate) fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    fn ranked_values(&self) -> Vec<f64> {
        self.ranked_blocks.iter().map(|&b| self.values[b]).collect()
    }

    /// `Q·diag(b_{blocks[0]}, …, b_{blocks[n-1]})·Qᵀ` for 0-based block indices.
    pub(crate) fn point(&self, q: &Mat, blocks: &[usize]) -> Mat {
        let d: Vec<f64> = blocks.iter().map(|&b| self.values[b]).collect();
        scale_columns(q, &d) * q.transpose()
    }

    pub(crate) fn random_point(&self, seed: u64) -> Mat {
        let v = random_orthogonal(self.n(), seed);
        self.point(&v, &self.ranked_blocks)
    }

    /// Normalized residual of the defining equations `∏(X − b_j I) = 0`,
    /// `tr X = Σ s_j b_j`, plus the sorted-spectrum deviation that pins the
    /// multiplicities when `p ≥ 2`.
    pub(crate) fn membership(&self, x: &Mat) -> Result<f64> {
        let n = self.n();
        if n == 0 {
            return Ok(0.0);
        }
        let scale = 1.0 + x.norm();
        let asym = (x - x.transpose()).norm() / scale;
        let xs = symmetrize(x);

        let mut product = Mat::identity(n, n);
        let mut degree = 0;
        for (&b, _) in self.values.iter().zip(&self.sizes).filter(|(_, &s)| s > 0) {
            let mut shifted = xs.clone();
            for i in 0..n {
                shifted[(i, i)] -= b;
            }
            product *= shifted;
            degree += 1;
        }
        let poly = product.norm() / scale.powi(degree);

        let target: f64 = self
            .values
            .iter()
            .zip(&self.sizes)
            .map(|(b, &s)| b * s as f64)
            .sum();
        let trace = (xs.trace() - target).abs() / scale;

        let eig = sym_eig_unchecked(&xs)?;
        let spectrum = eig
            .lambdas
            .iter()
            .zip(self.ranked_values())
            .map(|(l, t)| (l - t).abs())
            .fold(0.0, f64::max)
            / scale;

        Ok(asym.max(poly).max(trace).max(spectrum))
    }

    /// Eigenbasis of `x` with columns grouped by rank against the model
    /// spectrum.
    pub(crate) fn frame(&self, x: &Mat) -> Result<OrbitFrame> {
        let eig = sym_eig_unchecked(x)?;
        Ok(OrbitFrame {
            v: eig.q,
            blocks: self.ranked_blocks.clone(),
        })
    }

    /// Orthogonal projection of `sym(z)` onto the tangent space: in the
    /// eigenbasis, the diagonal blocks (commutant directions) are zeroed.
    pub(crate) fn project(&self, frame: &OrbitFrame, z: &Mat) -> Mat {
        if self.n() == 0 {
            return Mat::zeros(0, 0);
        }
        let v = &frame.v;
        let mut c = v.tr_mul(&symmetrize(z)) * v;
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                if frame.blocks[i] == frame.blocks[j] {
                    c[(i, j)] = 0.0;
                }
            }
        }
        v * c * v.transpose()
    }

    /// Metric projection of a symmetric matrix onto the orbit: eigenvalues are
    /// replaced by the model spectrum in rank order.
    pub(crate) fn retract(&self, y: &Mat) -> Result<(Mat, OrbitFrame)> {
        if self.n() == 0 {
            return Ok((
                Mat::zeros(0, 0),
                OrbitFrame {
                    v: Mat::zeros(0, 0),
                    blocks: Vec::new(),
                },
            ));
        }
        let frame = self.frame(&symmetrize(y))?;
        let x = self.point(&frame.v, &frame.blocks);
        Ok((symmetrize(&x), frame))
    }

    /// Orthonormal basis `V·(e_i e_jᵀ + e_j e_iᵀ)/√2·Vᵀ` over pairs in
    /// different blocks.
    pub(crate) fn tangent_basis(&self, frame: &OrbitFrame) -> Vec<Mat> {
        let n = self.n();
        let v = &frame.v;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if frame.blocks[i] != frame.blocks[j] {
                    let vi = v.column(i);
                    let vj = v.column(j);
                    let e = (vi * vj.transpose() + vj * vi.transpose())
                        * std::f64::consts::FRAC_1_SQRT_2;
                    out.push(e);
                }
            }
        }
        out
    }

    pub(crate) fn dimension(&self) -> usize {
        let n = self.n();
        (n * n - self.sizes.iter().map(|s| s * s).sum::<usize>()) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_points_have_the_model_spectrum() {
        let orbit = Orbit::new(vec![1.0, 0.0], vec![1, 2]);
        let x = orbit.random_point(5);
        let eig = sym_eig_unchecked(&x).unwrap();
        for (l, t) in eig.lambdas.iter().zip([1.0, 0.0, 0.0]) {
            assert!((l - t).abs() < 1e-12);
        }
        assert!(orbit.membership(&x).unwrap() < 1e-12);
    }

    #[test]
    fn ranked_blocks_follow_decreasing_values() {
        let orbit = Orbit::new(vec![0.0, 2.0, 1.0], vec![1, 2, 1]);
        assert_eq!(orbit.ranked_blocks, vec![1, 1, 2, 0]);
    }

    #[test]
    fn wrong_multiplicities_are_detected() {
        // trace and product conditions alone accept diag(1,1,1) for spectrum (2,1,0)
        let orbit = Orbit::new(vec![2.0, 1.0, 0.0], vec![1, 1, 1]);
        assert!(orbit.membership(&Mat::identity(3, 3)).unwrap() > 0.1);
    }
}
