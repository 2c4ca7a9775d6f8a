//! Closed-form stationary points of `δ_A(X) = ½‖X − A‖²_F` on each model.
//!
//! For a generic anchor every model has exactly `ed_degree` real stationary
//! points, indexed by a canonical combinatorial label:
//!
//! - flag: block assignments `f`, `X = Q·diag(b_{f(1)}, …, b_{f(n)})·Qᵀ` where
//!   `A = Q·diag(a_1 > … > a_n)·Qᵀ`;
//! - Grassmann: `k`-subsets of eigenpositions receiving `a`;
//! - Schubert: `(l−k)`-subsets of the eigenpositions of the free block `B₃₃`
//!   of `QᵀAQ`;
//! - Stiefel: sign vectors `ε`, `X = U·[diag(ε); 0]·Wᵀ·B^{1/2}` where
//!   `A·B^{1/2} = U·[Σ; 0]·Wᵀ`.

mod spectral;

pub use spectral::{analyze_spectrum, check_generic, SpectralData, SpectralFactors};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::matcore::{
    block_assignments, k_subsets, scale_columns, sign_vectors, symmetrize, BlockAssignment,
    DEFAULT_GAP_TOL,
};
use crate::models::{ModelHandle, Orbit};
use crate::{EdError, Mat, Result};

/// Relative tolerance ladder used when certifying enumerated points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Genericity: minimal relative spectral gap.
    pub gap: f64,
    /// Membership residual bound, relative to `1 + ‖A‖_F`.
    pub membership: f64,
    /// Stationarity residual bound, relative to `1 + ‖A‖_F`.
    pub stationarity: f64,
    /// Minimal pairwise distance, relative to `1 + ‖A‖_F`.
    pub distinctness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gap: DEFAULT_GAP_TOL,
            membership: 1e-8,
            stationarity: 1e-7,
            distinctness: 1e-6,
        }
    }
}

/// Combinatorial tag of a stationary point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Assignment(BlockAssignment),
    /// 1-based eigenpositions carrying the value `a`.
    Subset(Vec<usize>),
    Signs(Vec<i8>),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Assignment(a) => write!(f, "{a}"),
            Self::Subset(s) => {
                let items: Vec<String> = s.iter().map(|i| i.to_string()).collect();
                write!(f, "{{{}}}", items.join(","))
            }
            Self::Signs(s) => {
                let items: String = s.iter().map(|&e| if e > 0 { '+' } else { '-' }).collect();
                write!(f, "{items}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPoint {
    pub label: Label,
    pub x: Mat,
    /// `½‖X − A‖²_F`.
    pub objective: f64,
    /// `‖tangent_project(X, X − A)‖_F`.
    pub grad_residual: f64,
}

/// `½ Σ (x_ij − a_ij)²`.
pub fn objective(a: &Mat, x: &Mat) -> Result<f64> {
    if a.shape() != x.shape() {
        return Err(EdError::ShapeMismatch {
            expected: a.shape(),
            found: x.shape(),
        });
    }
    Ok(0.5 * (x - a).norm_squared())
}

/// Norm of the Riemannian gradient of `δ_A` at the on-model point `x`.
pub fn stationarity_residual(model: &ModelHandle, a: &Mat, x: &Mat) -> Result<f64> {
    model.check_shape(a)?;
    Ok(model.tangent_project(x, &(x - a))?.norm())
}

fn make_point(model: &ModelHandle, a: &Mat, label: Label, x: Mat) -> Result<StationaryPoint> {
    let frame = model.local_frame(&x)?;
    let grad_residual = model.project_with(&frame, &x, &(&x - a)).norm();
    Ok(StationaryPoint {
        label,
        objective: objective(a, &x)?,
        x,
        grad_residual,
    })
}

fn subset_blocks(size: usize, subset: &[usize]) -> Vec<usize> {
    // block 0 carries `a`, block 1 carries `b`
    let mut blocks = vec![1; size];
    for &i in subset {
        blocks[i - 1] = 0;
    }
    blocks
}

fn orbit_point(orbit: &Orbit, q: &Mat, blocks: &[usize]) -> Mat {
    symmetrize(&orbit.point(q, blocks))
}

fn stiefel_point(u: &Mat, w: &Mat, b_half: &Mat, signs: &[i8]) -> Mat {
    let k = signs.len();
    let eps: Vec<f64> = signs.iter().map(|&s| s as f64).collect();
    scale_columns(&u.columns(0, k).into_owned(), &eps) * w.transpose() * b_half
}

/// All stationary points in canonical label order, using the default
/// genericity tolerance.
pub fn enumerate_stationary(model: &ModelHandle, a: &Mat) -> Result<Vec<StationaryPoint>> {
    let spectra = check_generic(model, a, DEFAULT_GAP_TOL)?;
    enumerate_with(model, a, &spectra)
}

/// Enumeration from precomputed (and already validated) spectral data.
pub fn enumerate_with(
    model: &ModelHandle,
    a: &Mat,
    spectra: &SpectralData,
) -> Result<Vec<StationaryPoint>> {
    if !spectra.genericity_ok {
        return Err(EdError::DegenerateInput {
            predicate: spectra.violation.clone().unwrap_or_default(),
        });
    }
    match (model, &spectra.factors) {
        (ModelHandle::Flag(spec), SpectralFactors::Symmetric { eigen }) => {
            block_assignments(spec.block_sizes())?
                .into_iter()
                .map(|f| {
                    let blocks: Vec<usize> = f.labels.iter().map(|l| l - 1).collect();
                    let x = orbit_point(spec.orbit(), &eigen.q, &blocks);
                    make_point(model, a, Label::Assignment(f), x)
                })
                .collect()
        }
        (ModelHandle::Grassmann(spec), SpectralFactors::Symmetric { eigen }) => {
            k_subsets(spec.n(), spec.k())?
                .into_iter()
                .map(|s| {
                    let x = orbit_point(spec.orbit(), &eigen.q, &subset_blocks(spec.n(), &s));
                    make_point(model, a, Label::Subset(s), x)
                })
                .collect()
        }
        (ModelHandle::Schubert(spec), SpectralFactors::Schubert { inner }) => {
            let size = spec.m() - spec.k();
            k_subsets(size, spec.l() - spec.k())?
                .into_iter()
                .map(|s| {
                    let diag = Mat::identity(size, size);
                    let x_inner = orbit_point(spec.inner_orbit(), &diag, &subset_blocks(size, &s));
                    let x = spec.embed_rotated(&inner.q, &x_inner);
                    make_point(model, a, Label::Subset(s), x)
                })
                .collect()
        }
        (ModelHandle::Stiefel(spec), SpectralFactors::Stiefel { weighted_svd, .. }) => {
            sign_vectors(spec.k())?
                .into_iter()
                .map(|eps| {
                    let x = stiefel_point(&weighted_svd.u, &weighted_svd.v, spec.b_sqrt(), &eps);
                    make_point(model, a, Label::Signs(eps), x)
                })
                .collect()
        }
        _ => Err(EdError::InvalidParameter(
            "spectral data does not belong to this model".into(),
        )),
    }
}

fn require_decreasing(values: &[f64], what: &str) -> Result<()> {
    if values.windows(2).all(|w| w[0] > w[1]) {
        Ok(())
    } else {
        Err(EdError::ParameterOrderViolation(format!(
            "nearest point needs {what} strictly decreasing, got {values:?}"
        )))
    }
}

/// Closed-form global minimizer of `δ_A` on the model.
pub fn nearest_point(model: &ModelHandle, a: &Mat) -> Result<StationaryPoint> {
    let spectra = check_generic(model, a, DEFAULT_GAP_TOL)?;
    nearest_with(model, a, &spectra)
}

pub fn nearest_with(
    model: &ModelHandle,
    a: &Mat,
    spectra: &SpectralData,
) -> Result<StationaryPoint> {
    if !spectra.genericity_ok {
        return Err(EdError::DegenerateInput {
            predicate: spectra.violation.clone().unwrap_or_default(),
        });
    }
    match (model, &spectra.factors) {
        (ModelHandle::Flag(spec), SpectralFactors::Symmetric { eigen }) => {
            require_decreasing(spec.bs(), "bs")?;
            let label = BlockAssignment::identity(spec.block_sizes());
            let blocks: Vec<usize> = label.labels.iter().map(|l| l - 1).collect();
            let x = orbit_point(spec.orbit(), &eigen.q, &blocks);
            make_point(model, a, Label::Assignment(label), x)
        }
        (ModelHandle::Grassmann(spec), SpectralFactors::Symmetric { eigen }) => {
            require_decreasing(&[spec.a(), spec.b()], "(a, b)")?;
            let subset: Vec<usize> = (1..=spec.k()).collect();
            let x = orbit_point(spec.orbit(), &eigen.q, &subset_blocks(spec.n(), &subset));
            make_point(model, a, Label::Subset(subset), x)
        }
        (ModelHandle::Schubert(spec), SpectralFactors::Schubert { inner }) => {
            require_decreasing(&[spec.a(), spec.b()], "(a, b)")?;
            let size = spec.m() - spec.k();
            let subset: Vec<usize> = (1..=spec.l() - spec.k()).collect();
            let x_inner = orbit_point(
                spec.inner_orbit(),
                &Mat::identity(size, size),
                &subset_blocks(size, &subset),
            );
            let x = spec.embed_rotated(&inner.q, &x_inner);
            make_point(model, a, Label::Subset(subset), x)
        }
        (ModelHandle::Stiefel(spec), SpectralFactors::Stiefel { weighted_svd, .. }) => {
            let eps = vec![1i8; spec.k()];
            let x = stiefel_point(&weighted_svd.u, &weighted_svd.v, spec.b_sqrt(), &eps);
            make_point(model, a, Label::Signs(eps), x)
        }
        _ => Err(EdError::InvalidParameter(
            "spectral data does not belong to this model".into(),
        )),
    }
}

/// Lowest-objective point; ties resolve to the earliest label.
pub fn argmin(points: &[StationaryPoint]) -> Option<&StationaryPoint> {
    points.iter().reduce(|best, p| {
        if p.objective < best.objective {
            p
        } else {
            best
        }
    })
}

/// Smallest Frobenius distance between two points (`+∞` for fewer than two).
pub fn min_pairwise_distance(points: &[StationaryPoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.min((&p.x - &q.x).norm());
        }
    }
    best
}

/// Summary of one certification run over the full stationary set.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub degree: u64,
    pub points: Vec<StationaryPoint>,
    pub max_membership_residual: f64,
    pub max_stationarity_residual: f64,
    pub min_pairwise_distance: f64,
    /// `None` when the model parameters are not ordered as the closed form
    /// requires.
    pub nearest: Option<StationaryPoint>,
    pub argmin_label: Option<Label>,
    pub anchor_norm: f64,
}

impl Certificate {
    /// Every bound of the ladder holds and the count equals the degree.
    pub fn passes(&self, tol: &Tolerances) -> bool {
        let scale = 1.0 + self.anchor_norm;
        let count_ok = self.points.len() as u64 == self.degree;
        let nearest_ok = match (&self.nearest, &self.argmin_label) {
            (Some(n), Some(l)) => &n.label == l,
            _ => true,
        };
        count_ok
            && nearest_ok
            && self.max_membership_residual <= tol.membership * scale
            && self.max_stationarity_residual <= tol.stationarity * scale
            && (self.points.len() < 2 || self.min_pairwise_distance > tol.distinctness * scale)
    }
}

/// Enumerates, measures every residual independently of the closed forms and
/// computes the nearest point.
pub fn certify(model: &ModelHandle, a: &Mat, tol: &Tolerances) -> Result<Certificate> {
    let spectra = check_generic(model, a, tol.gap)?;
    let points = enumerate_with(model, a, &spectra)?;
    let mut max_membership_residual: f64 = 0.0;
    let mut max_stationarity_residual: f64 = 0.0;
    for p in &points {
        max_membership_residual = max_membership_residual.max(model.membership_residual(&p.x)?);
        max_stationarity_residual = max_stationarity_residual.max(p.grad_residual);
    }
    let nearest = match nearest_with(model, a, &spectra) {
        Ok(p) => Some(p),
        Err(EdError::ParameterOrderViolation(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(Certificate {
        degree: model.ed_degree()?,
        max_membership_residual,
        max_stationarity_residual,
        min_pairwise_distance: min_pairwise_distance(&points),
        nearest,
        argmin_label: argmin(&points).map(|p| p.label.clone()),
        anchor_norm: a.norm(),
        points,
    })
}
