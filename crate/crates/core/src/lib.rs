//! Matrix models of the flag, Grassmann and Stiefel manifolds and of the
//! Schubert varieties Ω(𝕌, 𝕎), together with closed-form enumeration of every
//! stationary point of the squared-distance function X ↦ ½‖X − A‖²_F.
//!
//! The crate is organised bottom-up:
//!
//! - [`matcore`]: eigen/SVD factorizations, combinatorial enumerators and
//!   seeded samplers.
//! - [`models`]: validated model parameters, ED-degree and dimension
//!   formulas, membership residuals, tangent projections and retractions.
//! - [`stationary`]: objective, genericity checks, enumeration of stationary
//!   points and closed-form nearest points.
//! - [`empiric`]: a multistart Riemannian solver that rediscovers stationary
//!   points without the closed forms, used as an independent oracle.

pub mod empiric;
mod error;
pub mod matcore;
pub mod models;
pub mod stationary;

pub use error::{EdError, Result};
pub use matcore::{BlockAssignment, EigenPair, RectMatrix, SvdData, SymmetricMatrix};
pub use models::{FlagSpec, GrassmannSpec, ModelHandle, SchubertSpec, StiefelSpec};
pub use stationary::{Label, SpectralData, StationaryPoint};

/// Dense real matrix used for points and anchors throughout the crate.
pub type Mat = nalgebra::DMatrix<f64>;
