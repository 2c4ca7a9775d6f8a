//! The four matrix models as validated parameter records.
//!
//! | model     | ambient        | points                                   |
//! |-----------|----------------|------------------------------------------|
//! | flag      | `Sym²(ℝⁿ)`     | `V·diag(b_1 I_{s_1}, …, b_{p+1} I_{s_{p+1}})·Vᵀ` |
//! | Grassmann | `Sym²(ℝⁿ)`     | `V·diag(a I_k, b I_{n−k})·Vᵀ`            |
//! | Stiefel   | `ℝ^{n×k}`      | `X` with `XᵀX = B`                       |
//! | Schubert  | `Sym²(ℝⁿ)`     | `Q·diag(a I_k, b I_{n−m}, X)·Qᵀ`, `X ∈ Gr_{a,b}(l−k, m−k)` |

mod io;
mod isospectral;
mod schubert;
mod stiefel;

pub use io::MatrixFile;
pub use isospectral::OrbitFrame;
pub use schubert::{adapted_frame, SchubertResiduals, SchubertSpec};
pub use stiefel::StiefelSpec;

pub(crate) use isospectral::Orbit;

use crate::matcore::{binomial, multinomial, symmetrize};
use crate::{EdError, Mat, Result};

/// Default gate for [`ModelHandle::tangent_project`], applied to the
/// normalized membership residual and scaled by `n`.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

fn check_distinct(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EdError::InvalidParameter(format!("{what} must be finite")));
    }
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] == values[j] {
                return Err(EdError::InvalidParameter(format!(
                    "{what} must be pairwise distinct, got {values:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Isospectral model `Flag_{b_1,…,b_{p+1}}(k_1,…,k_p, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlagSpec {
    n: usize,
    ks: Vec<usize>,
    bs: Vec<f64>,
    orbit: Orbit,
}

impl FlagSpec {
    pub fn new(n: usize, ks: Vec<usize>, bs: Vec<f64>) -> Result<Self> {
        if ks.is_empty() {
            return Err(EdError::InvalidParameter("ks must be non-empty".into()));
        }
        if ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) || *ks.last().unwrap() >= n {
            return Err(EdError::InvalidParameter(format!(
                "need 0 < k_1 < … < k_p < n, got ks={ks:?} with n={n}"
            )));
        }
        if bs.len() != ks.len() + 1 {
            return Err(EdError::InvalidParameter(format!(
                "expected {} values of b, got {}",
                ks.len() + 1,
                bs.len()
            )));
        }
        check_distinct(&bs, "bs")?;
        let sizes = block_sizes(n, &ks);
        let orbit = Orbit::new(bs.clone(), sizes);
        Ok(Self { n, ks, bs, orbit })
    }

    /// Uses the default spectrum `bs = (p, p−1, …, 0)`.
    pub fn with_default_bs(n: usize, ks: Vec<usize>) -> Result<Self> {
        let p = ks.len();
        let bs = (0..=p).rev().map(|v| v as f64).collect();
        Self::new(n, ks, bs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    pub fn bs(&self) -> &[f64] {
        &self.bs
    }

    /// `(k_1, k_2 − k_1, …, n − k_p)`.
    pub fn block_sizes(&self) -> &[usize] {
        self.orbit.sizes()
    }

    pub(crate) fn orbit(&self) -> &Orbit {
        &self.orbit
    }
}

fn block_sizes(n: usize, ks: &[usize]) -> Vec<usize> {
    let mut prev = 0;
    let mut out: Vec<usize> = ks
        .iter()
        .map(|&k| {
            let s = k - prev;
            prev = k;
            s
        })
        .collect();
    out.push(n - prev);
    out
}

/// Quadratic model `Gr_{a,b}(k, n)`, `1 ≤ k < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannSpec {
    n: usize,
    k: usize,
    a: f64,
    b: f64,
    orbit: Orbit,
}

impl GrassmannSpec {
    pub fn new(n: usize, k: usize, a: f64, b: f64) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(EdError::InvalidParameter(format!(
                "Grassmann model needs 1 <= k < n, got k={k}, n={n}"
            )));
        }
        check_distinct(&[a, b], "(a, b)")?;
        Ok(Self {
            n,
            k,
            a,
            b,
            orbit: Orbit::new(vec![a, b], vec![k, n - k]),
        })
    }

    /// Projector model `(a, b) = (1, 0)`.
    pub fn projector(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, 1.0, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub(crate) fn orbit(&self) -> &Orbit {
        &self.orbit
    }
}

/// A validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelHandle {
    Flag(FlagSpec),
    Grassmann(GrassmannSpec),
    Stiefel(StiefelSpec),
    Schubert(SchubertSpec),
}

/// Cached per-point data for repeated projections at the same point.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalFrame {
    Orbit(OrbitFrame),
    Stiefel,
    Schubert(OrbitFrame),
}

impl From<FlagSpec> for ModelHandle {
    fn from(s: FlagSpec) -> Self {
        Self::Flag(s)
    }
}

impl From<GrassmannSpec> for ModelHandle {
    fn from(s: GrassmannSpec) -> Self {
        Self::Grassmann(s)
    }
}

impl From<StiefelSpec> for ModelHandle {
    fn from(s: StiefelSpec) -> Self {
        Self::Stiefel(s)
    }
}

impl From<SchubertSpec> for ModelHandle {
    fn from(s: SchubertSpec) -> Self {
        Self::Schubert(s)
    }
}

fn to_u64(count: Option<u128>) -> Result<u64> {
    match count {
        Some(c) if c <= u64::MAX as u128 => Ok(c as u64),
        Some(c) => Err(EdError::Overflow {
            count: c,
            cap: u64::MAX,
        }),
        None => Err(EdError::Overflow {
            count: u128::MAX,
            cap: u64::MAX,
        }),
    }
}

impl ModelHandle {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Flag(_) => "flag",
            Self::Grassmann(_) => "grassmann",
            Self::Stiefel(_) => "stiefel",
            Self::Schubert(_) => "schubert",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Flag(s) => s.n,
            Self::Grassmann(s) => s.n,
            Self::Stiefel(s) => s.n(),
            Self::Schubert(s) => s.n(),
        }
    }

    /// Shape of points and anchors.
    pub fn ambient_shape(&self) -> (usize, usize) {
        match self {
            Self::Stiefel(s) => (s.n(), s.k()),
            other => (other.n(), other.n()),
        }
    }

    pub fn is_symmetric_ambient(&self) -> bool {
        !matches!(self, Self::Stiefel(_))
    }

    pub(crate) fn check_shape(&self, x: &Mat) -> Result<()> {
        let expected = self.ambient_shape();
        if x.shape() != expected {
            return Err(EdError::ShapeMismatch {
                expected,
                found: x.shape(),
            });
        }
        Ok(())
    }

    /// Euclidean distance degree; depends only on the discrete parameters.
    pub fn ed_degree(&self) -> Result<u64> {
        match self {
            Self::Flag(s) => to_u64(multinomial(s.block_sizes())),
            Self::Grassmann(s) => to_u64(binomial(s.n, s.k)),
            Self::Stiefel(s) => to_u64(if s.k() < 128 {
                Some(1u128 << s.k())
            } else {
                None
            }),
            Self::Schubert(s) => to_u64(binomial(s.m() - s.k(), s.l() - s.k())),
        }
    }

    /// Real dimension of the model.
    pub fn dimension(&self) -> usize {
        match self {
            Self::Flag(s) => s.orbit.dimension(),
            Self::Grassmann(s) => s.k * (s.n - s.k),
            Self::Stiefel(s) => s.n() * s.k() - s.k() * (s.k() + 1) / 2,
            Self::Schubert(s) => (s.l() - s.k()) * (s.m() - s.l()),
        }
    }

    /// Normalized residual of the defining equations at `x` (0 on the model).
    pub fn membership_residual(&self, x: &Mat) -> Result<f64> {
        self.check_shape(x)?;
        match self {
            Self::Flag(s) => s.orbit.membership(x),
            Self::Grassmann(s) => s.orbit.membership(x),
            Self::Stiefel(s) => Ok(s.membership(x)),
            Self::Schubert(s) => Ok(s.residuals(x)?.max()),
        }
    }

    /// Seeded random point on the model.
    pub fn random_point(&self, seed: u64) -> Mat {
        match self {
            Self::Flag(s) => symmetrize(&s.orbit.random_point(seed)),
            Self::Grassmann(s) => symmetrize(&s.orbit.random_point(seed)),
            Self::Stiefel(s) => s.random_point(seed),
            Self::Schubert(s) => s.random_point(seed),
        }
    }

    fn ensure_on_model(&self, x: &Mat) -> Result<()> {
        let residual = self.membership_residual(x)?;
        let tol = DEFAULT_MEMBERSHIP_TOL * self.n().max(1) as f64;
        if residual.is_nan() || residual > tol {
            return Err(EdError::NotOnManifold { residual, tol });
        }
        Ok(())
    }

    /// Eigen data at an on-model point, reusable across projections.
    pub fn local_frame(&self, x: &Mat) -> Result<LocalFrame> {
        self.check_shape(x)?;
        Ok(match self {
            Self::Flag(s) => LocalFrame::Orbit(s.orbit.frame(x)?),
            Self::Grassmann(s) => LocalFrame::Orbit(s.orbit.frame(x)?),
            Self::Stiefel(_) => LocalFrame::Stiefel,
            Self::Schubert(s) => LocalFrame::Schubert(s.inner_frame(x)?),
        })
    }

    /// Orthogonal projection of the ambient direction `z` onto the tangent
    /// space at `x`. Fails with [`EdError::NotOnManifold`] when `x` is off
    /// the model.
    pub fn tangent_project(&self, x: &Mat, z: &Mat) -> Result<Mat> {
        self.check_shape(z)?;
        self.ensure_on_model(x)?;
        let frame = self.local_frame(x)?;
        Ok(self.project_with(&frame, x, z))
    }

    /// Tangent projection using a precomputed frame; no membership check.
    pub fn project_with(&self, frame: &LocalFrame, x: &Mat, z: &Mat) -> Mat {
        match (self, frame) {
            (Self::Flag(s), LocalFrame::Orbit(f)) => s.orbit.project(f, z),
            (Self::Grassmann(s), LocalFrame::Orbit(f)) => s.orbit.project(f, z),
            (Self::Stiefel(s), LocalFrame::Stiefel) => s.project(x, z),
            (Self::Schubert(s), LocalFrame::Schubert(f)) => s.project(f, z),
            _ => panic!("local frame does not belong to this model"),
        }
    }

    /// Maps an ambient matrix near the model back onto it, returning the
    /// retracted point with its frame.
    pub fn retract(&self, y: &Mat) -> Result<(Mat, LocalFrame)> {
        self.check_shape(y)?;
        match self {
            Self::Flag(s) => s.orbit.retract(y).map(|(x, f)| (x, LocalFrame::Orbit(f))),
            Self::Grassmann(s) => s.orbit.retract(y).map(|(x, f)| (x, LocalFrame::Orbit(f))),
            Self::Stiefel(s) => Ok((s.retract(y)?, LocalFrame::Stiefel)),
            Self::Schubert(s) => s.retract(y).map(|(x, f)| (x, LocalFrame::Schubert(f))),
        }
    }

    /// Frobenius-orthonormal basis of the tangent space at `x`.
    pub fn tangent_basis(&self, frame: &LocalFrame, x: &Mat) -> Vec<Mat> {
        match (self, frame) {
            (Self::Flag(s), LocalFrame::Orbit(f)) => s.orbit.tangent_basis(f),
            (Self::Grassmann(s), LocalFrame::Orbit(f)) => s.orbit.tangent_basis(f),
            (Self::Stiefel(s), LocalFrame::Stiefel) => s.tangent_basis(x),
            (Self::Schubert(s), LocalFrame::Schubert(f)) => s.tangent_basis(f),
            _ => panic!("local frame does not belong to this model"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{random_frame, random_spd, sym_eig_unchecked, SymmetricMatrix};
    use proptest::prelude::*;

    fn flag(n: usize, ks: &[usize]) -> ModelHandle {
        FlagSpec::with_default_bs(n, ks.to_vec()).unwrap().into()
    }

    fn stiefel(n: usize, b: SymmetricMatrix) -> ModelHandle {
        StiefelSpec::new(n, b).unwrap().into()
    }

    #[test]
    fn flag_validation() {
        assert!(FlagSpec::new(4, vec![2, 1], vec![0., 1., 2.]).is_err());
        assert!(FlagSpec::new(4, vec![1, 4], vec![0., 1., 2.]).is_err());
        assert!(FlagSpec::new(4, vec![1, 2], vec![0., 1., 1.]).is_err());
        assert!(FlagSpec::new(4, vec![1, 2], vec![0., 1.]).is_err());
        let f = FlagSpec::with_default_bs(4, vec![1, 2]).unwrap();
        assert_eq!(f.bs(), &[2.0, 1.0, 0.0]);
        assert_eq!(f.block_sizes(), &[1, 1, 2]);
    }

    #[test]
    fn grassmann_rejects_trivial_cases() {
        assert!(GrassmannSpec::projector(3, 0).is_err());
        assert!(GrassmannSpec::projector(3, 3).is_err());
        assert!(GrassmannSpec::new(3, 1, 2.0, 2.0).is_err());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(flag(4, &[1, 2]).ed_degree().unwrap(), 12);
        let gr: ModelHandle = GrassmannSpec::projector(5, 2).unwrap().into();
        assert_eq!(gr.ed_degree().unwrap(), 10);
        for n in 3..6 {
            let st = stiefel(n, random_spd(3, n as u64));
            assert_eq!(st.ed_degree().unwrap(), 8);
        }
        let sch: ModelHandle = SchubertSpec::random_nested(5, 1, 2, 4, 1.0, 0.0, 3)
            .unwrap()
            .into();
        assert_eq!(sch.ed_degree().unwrap(), 3);
    }

    #[test]
    fn dimension_examples() {
        let gr: ModelHandle = GrassmannSpec::projector(4, 2).unwrap().into();
        assert_eq!(gr.dimension(), 4);
        assert_eq!(stiefel(3, SymmetricMatrix::identity(3)).dimension(), 3);
        let sch: ModelHandle = SchubertSpec::random_nested(5, 1, 2, 4, 1.0, 0.0, 3)
            .unwrap()
            .into();
        assert_eq!(sch.dimension(), 2);
        assert_eq!(flag(4, &[1, 2]).dimension(), 5);
    }

    #[test]
    fn grassmann_and_p1_flag_dimensions_agree() {
        for n in 2..8 {
            for k in 1..n {
                let gr: ModelHandle = GrassmannSpec::projector(n, k).unwrap().into();
                assert_eq!(gr.dimension(), flag(n, &[k]).dimension());
                assert_eq!(gr.ed_degree().unwrap(), flag(n, &[k]).ed_degree().unwrap());
            }
        }
    }

    #[test]
    fn degree_is_parameter_independent() {
        for seed in 0..5u64 {
            let s = seed as f64;
            let f: ModelHandle = FlagSpec::new(5, vec![1, 3], vec![s, -1.0 - s, 2.5 + s])
                .unwrap()
                .into();
            assert_eq!(f.ed_degree().unwrap(), 30);
            let g: ModelHandle = GrassmannSpec::new(6, 2, s - 3.0, s + 0.5).unwrap().into();
            assert_eq!(g.ed_degree().unwrap(), 15);
            assert_eq!(stiefel(5, random_spd(3, seed)).ed_degree().unwrap(), 8);
            let sch: ModelHandle = SchubertSpec::random_nested(7, 1, 3, 5, s + 1.0, s, seed)
                .unwrap()
                .into();
            assert_eq!(sch.ed_degree().unwrap(), 6);
        }
    }

    #[test]
    fn projector_membership() {
        let gr: ModelHandle = GrassmannSpec::projector(2, 1).unwrap().into();
        let x = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(gr.membership_residual(&x).unwrap() <= 1e-12);
        let y = Mat::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 0.0]);
        assert!(gr.membership_residual(&y).unwrap() > 1e-3);
        assert!(matches!(
            gr.membership_residual(&Mat::zeros(3, 3)),
            Err(EdError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn orthonormal_frame_is_on_identity_stiefel() {
        let st = stiefel(5, SymmetricMatrix::identity(2));
        let x = random_frame(5, 2, 8);
        assert!(st.membership_residual(&x).unwrap() <= 1e-10);
    }

    #[test]
    fn flag_random_point_spectrum() {
        let f: ModelHandle = FlagSpec::new(3, vec![1], vec![1.0, 0.0]).unwrap().into();
        let x = f.random_point(17);
        let e = sym_eig_unchecked(&x).unwrap();
        let expect = [1.0, 0.0, 0.0];
        for (l, t) in e.lambdas.iter().zip(expect) {
            assert!((l - t).abs() < 1e-12);
        }
    }

    #[test]
    fn stiefel_random_point_gram() {
        let b = SymmetricMatrix::from_diagonal(&[4.0, 1.0]);
        let st = stiefel(3, b.clone());
        let x = st.random_point(2);
        assert!((x.tr_mul(&x) - b.as_mat()).norm() <= 1e-10);
    }

    #[test]
    fn flag_tangent_at_diagonal_point() {
        let f: ModelHandle = FlagSpec::new(2, vec![1], vec![3.0, -1.0]).unwrap().into();
        let x = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0]));
        let z = Mat::from_row_slice(2, 2, &[5.0, 2.0, 2.0, -7.0]);
        let t = f.tangent_project(&x, &z).unwrap();
        let expect = Mat::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]);
        assert!((t - expect).norm() < 1e-12);
    }

    #[test]
    fn stiefel_normal_directions_project_to_zero() {
        let st = stiefel(4, random_spd(2, 5));
        let x = st.random_point(9);
        let z0 = Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0]);
        let t = st.tangent_project(&x, &(&x * z0)).unwrap();
        assert!(t.norm() <= 1e-10);
    }

    #[test]
    fn off_model_point_is_rejected() {
        let gr: ModelHandle = GrassmannSpec::projector(3, 1).unwrap().into();
        let err = gr
            .tangent_project(&Mat::identity(3, 3), &Mat::identity(3, 3))
            .unwrap_err();
        assert!(matches!(err, EdError::NotOnManifold { .. }));
    }

    fn models() -> Vec<ModelHandle> {
        vec![
            flag(4, &[1, 2]),
            FlagSpec::new(5, vec![2, 3], vec![-1.0, 4.0, 0.5])
                .unwrap()
                .into(),
            GrassmannSpec::new(5, 2, 2.0, -1.0).unwrap().into(),
            stiefel(4, random_spd(3, 1)),
            stiefel(3, SymmetricMatrix::identity(3)),
            SchubertSpec::random_nested(7, 1, 3, 5, 1.0, 0.0, 4)
                .unwrap()
                .into(),
        ]
    }

    fn ambient_noise(model: &ModelHandle, seed: u64) -> Mat {
        let (r, c) = model.ambient_shape();
        let g = crate::matcore::random_rect(r.max(c), c, seed).into_inner();
        g.rows(0, r).into_owned()
    }

    #[test]
    fn tangent_projection_is_idempotent_with_normal_complement() {
        for model in models() {
            for seed in 0..20 {
                let x = model.random_point(seed);
                let z = ambient_noise(&model, seed + 100);
                let t = model.tangent_project(&x, &z).unwrap();
                let tt = model.tangent_project(&x, &t).unwrap();
                assert!((&tt - &t).norm() <= 1e-9, "{}", model.kind());
                let normal = if model.is_symmetric_ambient() {
                    symmetrize(&z) - &t
                } else {
                    &z - &t
                };
                // tangent and normal parts are Frobenius-orthogonal
                assert!(t.dot(&normal).abs() <= 1e-9 * (1.0 + z.norm_squared()));
                match &model {
                    ModelHandle::Stiefel(s) => {
                        assert!((x.tr_mul(&t) + t.tr_mul(&x)).norm() <= 1e-9);
                        // normal component is X·S with S symmetric
                        let s_mat = s.solve_normal_coefficients(&x, &normal);
                        assert!((&x * &s_mat - &normal).norm() <= 1e-9);
                        assert!((&s_mat - s_mat.transpose()).norm() <= 1e-9);
                    }
                    ModelHandle::Flag(_) | ModelHandle::Grassmann(_) => {
                        let LocalFrame::Orbit(f) = model.local_frame(&x).unwrap() else {
                            unreachable!()
                        };
                        let c = f.v.tr_mul(&normal) * &f.v;
                        for i in 0..c.nrows() {
                            for j in 0..c.ncols() {
                                if f.blocks[i] != f.blocks[j] {
                                    assert!(c[(i, j)].abs() <= 1e-9);
                                }
                            }
                        }
                    }
                    ModelHandle::Schubert(_) => {}
                }
            }
        }
    }

    #[test]
    fn tangent_basis_is_orthonormal_with_model_dimension() {
        for model in models() {
            let x = model.random_point(3);
            let frame = model.local_frame(&x).unwrap();
            let basis = model.tangent_basis(&frame, &x);
            assert_eq!(basis.len(), model.dimension(), "{}", model.kind());
            for (i, e) in basis.iter().enumerate() {
                assert!((model.tangent_project(&x, e).unwrap() - e).norm() <= 1e-10);
                for (j, f) in basis.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((e.dot(f) - expect).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn retraction_fixes_model_points() {
        for model in models() {
            for seed in 0..10 {
                let x = model.random_point(seed);
                let (r, _) = model.retract(&x).unwrap();
                assert!((&r - &x).norm() <= 1e-10, "{}", model.kind());
                let y = &x + ambient_noise(&model, seed) * 0.05;
                let (r, _) = model.retract(&y).unwrap();
                assert!(model.membership_residual(&r).unwrap() <= 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn random_points_lie_on_every_model(seed in any::<u64>()) {
            for model in models() {
                let x = model.random_point(seed);
                let r = model.membership_residual(&x).unwrap();
                prop_assert!(r <= 1e-9 * model.n() as f64, "{} residual {}", model.kind(), r);
            }
        }
    }
}
