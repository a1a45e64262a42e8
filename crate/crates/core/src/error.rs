//! Error type shared by every module of the crate.

use thiserror::Error;

/// All failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A combinatorial routine was called outside its parameter range.
    #[error("domain error: {0}")]
    Domain(String),
    /// Monomials of mixed total degree.
    #[error("polynomial is not homogeneous: found degrees {0} and {1}")]
    NonHomogeneous(usize, usize),
    /// Degree exceeds the ambient dimension (c1 > 0 requires d <= n).
    #[error("degree {d} exceeds ambient dimension {n}")]
    DegreeTooLarge { d: usize, n: usize },
    /// All coefficients cancelled.
    #[error("zero polynomial")]
    ZeroPolynomial,
    /// The diagonal field is not tangent to the hypersurface.
    #[error("field is not tangent: monomial eigenvalues {0} and {1} differ")]
    NotTangent(String, String),
    /// The univariate fiber polynomial vanishes identically at this chart point.
    #[error("degenerate fiber: univariate restriction is identically zero")]
    DegenerateFiber,
    /// Two fiber roots coincide within tolerance.
    #[error("multiple root in fiber (separation {0:.3e})")]
    MultipleRoots(f64),
    /// The chart validity guard |F_1|^2 / sum |F_k|^2 failed.
    #[error("chart degenerate: |F1|^2 ratio {0:.3e} below threshold")]
    ChartDegenerate(f64),
    /// A finite-difference stencil point could not be re-solved.
    #[error("stencil failure at finite-difference point")]
    StencilFailure,
    /// Monte Carlo rejection budget exhausted before enough samples accepted.
    #[error("rejection budget exhausted: {accepted} accepted of {requested} requested")]
    BudgetExhausted { accepted: usize, requested: usize },
    /// Forms over different chart dimensions cannot be combined.
    #[error("form dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    /// Top-coefficient extraction on a form of lower degree.
    #[error("wrong degree: expected (p,p) with p = {expected}, got p = {got}")]
    WrongDegree { expected: usize, got: usize },
    /// Manifest parsing or validation failure.
    #[error("manifest error: {0}")]
    Manifest(String),
}

pub type Result<T> = std::result::Result<T, Error>;
