use crate::matcore::{full_svd, sym_eig_unchecked, symmetrize, EigenPair, RectMatrix, SvdData};
use crate::models::ModelHandle;
use crate::{EdError, Mat, Result};

/// Factorizations of the anchor used by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralFactors {
    /// Eigendecomposition of `sym(A)` (flag, Grassmann).
    Symmetric { eigen: EigenPair },
    /// Eigendecomposition of the free block `B₃₃` of `QᵀAQ`.
    Schubert { inner: EigenPair },
    Stiefel {
        b_eigen: EigenPair,
        /// SVD of `A·Q_B`; its singular values are the `a_i`.
        svd: SvdData,
        /// SVD of `A·B^{1/2}`; its singular values are the `c_i`.
        weighted_svd: SvdData,
        c_values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub factors: SpectralFactors,
    pub genericity_ok: bool,
    /// Name and measurement of the violated predicate, if any.
    pub violation: Option<String>,
}

fn min_gap(desc: &[f64]) -> f64 {
    desc.windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min)
}

fn gap_violation(name: &str, values: &[f64], threshold: f64) -> Option<String> {
    let gap = min_gap(values);
    (gap <= threshold)
        .then(|| format!("{name} violated: smallest gap {gap:.3e} <= threshold {threshold:.3e}"))
}

/// Factorizes the anchor and evaluates the model's genericity predicate
/// without failing on degeneracy.
pub fn analyze_spectrum(model: &ModelHandle, a: &Mat, tol: f64) -> Result<SpectralData> {
    model.check_shape(a)?;
    let (factors, violation) = match model {
        ModelHandle::Flag(_) | ModelHandle::Grassmann(_) => {
            let s = symmetrize(a);
            let eigen = sym_eig_unchecked(&s)?;
            let v = gap_violation(
                "distinct-eigenvalues(A) [repeated eigenvalue]",
                &eigen.lambdas,
                tol * (1.0 + s.norm()),
            );
            (SpectralFactors::Symmetric { eigen }, v)
        }
        ModelHandle::Schubert(spec) => {
            let inner_block = symmetrize(&spec.extract_inner(&symmetrize(a)));
            let inner = sym_eig_unchecked(&inner_block)?;
            let free = spec.l() - spec.k();
            let size = spec.m() - spec.k();
            // a single stationary point exists when the inner Grassmannian is a point
            let v = if free == 0 || free == size {
                None
            } else {
                gap_violation(
                    "distinct-eigenvalues(B33) [repeated eigenvalue of the free block]",
                    &inner.lambdas,
                    tol * (1.0 + inner_block.norm()),
                )
            };
            (SpectralFactors::Schubert { inner }, v)
        }
        ModelHandle::Stiefel(spec) => {
            let b_eigen = spec.b_eigen().clone();
            let aq = RectMatrix::new(a * &b_eigen.q)?;
            let svd = full_svd(&aq)?;
            let g = a * spec.b_sqrt();
            let weighted_svd = full_svd(&RectMatrix::new(g.clone())?)?;
            let c_values = weighted_svd.sigmas.clone();

            let scale_a = tol * (1.0 + a.norm());
            let smallest = *svd.sigmas.last().unwrap();
            let v = if smallest <= scale_a {
                Some(format!(
                    "positive-singular-values(A*Q_B) violated: smallest a_i {smallest:.3e} <= threshold {scale_a:.3e}"
                ))
            } else {
                gap_violation("distinct-singular-values(A*Q_B)", &svd.sigmas, scale_a).or_else(
                    || {
                        gap_violation(
                            "distinct-c-values(c_i = sqrt(b_i)*a_i)",
                            &c_values,
                            tol * (1.0 + g.norm()),
                        )
                    },
                )
            };
            (
                SpectralFactors::Stiefel {
                    b_eigen,
                    svd,
                    weighted_svd,
                    c_values,
                },
                v,
            )
        }
    };
    Ok(SpectralData {
        factors,
        genericity_ok: violation.is_none(),
        violation,
    })
}

/// [`analyze_spectrum`] that fails with [`EdError::DegenerateInput`] when the
/// genericity predicate is violated.
pub fn check_generic(model: &ModelHandle, a: &Mat, tol: f64) -> Result<SpectralData> {
    let data = analyze_spectrum(model, a, tol)?;
    match &data.violation {
        Some(predicate) => Err(EdError::DegenerateInput {
            predicate: predicate.clone(),
        }),
        None => Ok(data),
    }
}
