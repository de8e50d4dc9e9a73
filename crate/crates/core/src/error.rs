use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("angle dimension {0} is not supported (1..=8)")]
    UnsupportedDimension(usize),

    #[error("Fourier mode {k:?} lies outside the truncation radius {kmax}")]
    ModeOutOfRange { k: Vec<i64>, kmax: usize },

    #[error("coefficient at k={k:?} violates reality by {defect:e}")]
    Reality { k: Vec<i64>, defect: f64 },

    #[error("{component}: term alpha={alpha:?} has a mode k={k:?} of the wrong parity")]
    Parity {
        component: String,
        alpha: Vec<usize>,
        k: Vec<i64>,
    },

    #[error("{component}: term alpha={alpha:?} has degree {degree}, below the required order {required}")]
    Order {
        component: String,
        alpha: Vec<usize>,
        degree: usize,
        required: usize,
    },

    #[error("composition does not terminate: the shift has an angle-dependent degree-0 part")]
    NonTerminating,

    #[error("near-identity inversion failed to contract (last update {update:e})")]
    NonContractive { update: f64 },

    #[error("small divisor |<k,w>| = {divisor:e} at k={k:?}")]
    SmallDivisor { k: Vec<i64>, divisor: f64 },

    #[error("the zero mode has no small divisor")]
    ZeroMode,

    #[error("requested order {order} exceeds the series degree budget {ymax}")]
    TruncationOverflow { order: usize, ymax: usize },

    #[error("homological equation is inconsistent: mean {mean:e} exceeds the floor")]
    NonzeroMean { mean: f64 },

    #[error("normalization condition violated: residual {residual:e}")]
    Normalization { residual: f64 },

    #[error("iteration stopped contracting at stage {stage}; epsilon trace {trace:?}")]
    NonContraction { stage: usize, trace: Vec<f64> },

    #[error("singular matrix in linear solve")]
    Singular,

    #[error("Newton iteration diverged (residual {residual:e} after {iterations} iterations)")]
    NewtonDivergence { residual: f64, iterations: usize },

    #[error("parameter point lies outside the sampled grid")]
    OutsideGrid,

    #[error("integrator step size underflow at t={t}")]
    StepUnderflow { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
