use thiserror::Error;

/// Crate-wide error type. Numerical failures carry enough context to decide
/// whether to retry with a finer quadrature or to give up.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNotConverged { residual: f64, tolerance: f64 },

    #[error("principal-value extrapolation failed: residuals {residuals:?} are not decreasing")]
    ExtrapolationFailed { residuals: Vec<f64> },

    #[error("no bracket found for root in [{lo:.3e}, {hi:.3e}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("node count {nodes} exceeds cap {cap}; coarsen the grid, shrink the region, or raise the cap")]
    NodeCapExceeded { nodes: usize, cap: usize },

    #[error("spacing {spacing:.3e} exceeds the spacing rule {rule:.3e} for alpha = {alpha}")]
    SpacingTooCoarse { spacing: f64, rule: f64, alpha: f64 },

    #[error("eigenvalue {value:.6e} lies {excess:.3e} outside the symbol range [{lo}, {hi}]; grid is under-resolved")]
    SpectrumOutOfRange {
        value: f64,
        excess: f64,
        lo: f64,
        hi: f64,
    },

    #[error("sub-level set is unbounded for level {0}")]
    UnboundedSubLevelSet(f64),

    #[error("symbol is not even; the transform and pv pairing require evenness")]
    SymbolNotEven,

    #[error("Fourier transform unavailable for this symbol kind")]
    TransformUnavailable,

    #[error("complement-term estimate unstable: margin doubling moved the result by {change_pct:.2}% (> {limit_pct}%); enlarge the enclosing box")]
    ComplementUnstable { change_pct: f64, limit_pct: f64 },

    #[error("LAPACK dsyev failed with info = {0}")]
    Lapack(i32),

    #[error("series acceleration failed; partial sums: {0:?}")]
    AccelerationFailed(Vec<f64>),

    #[error("f(0) = {0:.3e} != 0; trace functionals over a truncated grid require f(0) = 0")]
    NonzeroAtOrigin(f64),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
