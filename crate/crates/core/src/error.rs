use thiserror::Error;

pub type Result<T> = std::result::Result<T, EdError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdError {
    /// Two eigenvalues closer than the genericity threshold.
    #[error("degenerate spectrum: eigenvalue gap {gap:.3e} below threshold {threshold:.3e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    #[error("decomposition failure: {0}")]
    DecompositionFailure(String),

    #[error("enumeration of {count} items exceeds cap {cap}")]
    Overflow { count: u128, cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("point is not on the model: membership residual {residual:.3e} > {tol:.3e}")]
    NotOnManifold { residual: f64, tol: f64 },

    #[error("subspace U is not contained in W (deviation {deviation:.3e})")]
    NotNested { deviation: f64 },

    #[error("basis is rank deficient: {0}")]
    RankDeficient(String),

    /// The anchor violates the model's genericity predicate.
    #[error("degenerate input: {predicate}")]
    DegenerateInput { predicate: String },

    #[error("parameter order violation: {0}")]
    ParameterOrderViolation(String),

    #[error("descent did not converge: final residual {residual:.3e}")]
    NoConvergence { residual: f64 },
}
