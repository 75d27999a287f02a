use thiserror::Error;

/// Errors surfaced by the geometry and quadrature pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not positive definite at {context}")]
    NotPositiveDefinite { context: String },

    #[error("metric asymmetry {residual:e} exceeds tolerance at {context}")]
    AsymmetricMetric { residual: f64, context: String },

    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("point violates constraint {index} by {violation:e}")]
    OutsideRegion { index: usize, violation: f64 },

    #[error("operation requires dimension {expected}, chart has {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("capability limit: {0}")]
    Capability(String),

    #[error("numerical quality: {0}")]
    NumericalQuality(String),

    #[error("constraint gradient too small ({norm:e}) at boundary point")]
    SingularGradient { norm: f64 },

    #[error("active constraint gradients are linearly dependent at corner")]
    CornerRegularity,

    #[error("region topology unknown and no cell data supplied")]
    InsufficientData,

    #[error("model consistency violated: {0}")]
    ModelConsistency(String),

    #[error("quadrature and Monte Carlo estimates disagree: {quad} vs {mc} (allowance {allowance:e})")]
    EstimateInconsistency { quad: f64, mc: f64, allowance: f64 },

    #[error("argument out of the supported range: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;
