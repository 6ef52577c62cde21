use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("frame undefined at origin")]
    FrameAtOrigin,
    #[error("degenerate index pair ({0}, {0})")]
    DegenerateIndexPair(usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(&'static str),
    #[error("singular metric at grid point {index:?}")]
    SingularMetric { index: [usize; 3] },
    #[error("window too small: {0}")]
    WindowTooSmall(&'static str),
    #[error("insufficient time window: need {needed} levels, have {available}")]
    InsufficientWindow { needed: usize, available: usize },
    #[error("identity degenerate on the cone")]
    OnCone,
    #[error("data generation failed: {0}")]
    DataGeneration(String),
    #[error("metric degenerate at step {step} (t = {t})")]
    MetricDegenerate { step: usize, t: f64 },
    #[error("non-finite state at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("q-CFL violated: dl = {dl}, limit = {limit}")]
    QCfl { dl: f64, limit: f64 },
    #[error("insufficient span: {0}")]
    InsufficientSpan(&'static str),
    #[error("annulus clipped by boundary")]
    AnnulusClipped,
    #[error("zero denominator with nonzero numerator")]
    ZeroDenominator,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
