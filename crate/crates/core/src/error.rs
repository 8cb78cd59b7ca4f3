use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidScenario { field: String, reason: String },

    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("bit count {bits} is not a multiple of {per_symbol} bits per symbol")]
    MisalignedBits { bits: usize, per_symbol: usize },

    #[error("subcarrier index {index} outside [-{half}, {half})")]
    IndexOutOfRange { index: i64, half: usize },

    #[error("receiver window [{start}, {end}) outside the valid range [{min}, {max})")]
    WindowOutOfRange {
        start: i64,
        end: i64,
        min: i64,
        max: i64,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("sample-rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(f64, f64),

    #[error("clipping amplitude must be positive, got {0}")]
    InvalidAmplitude(f64),

    #[error("signal contains non-finite samples")]
    NonFinite,

    #[error("signal has zero power")]
    ZeroPower,

    #[error("empty input")]
    Empty,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("fast-convolution geometry: {0}")]
    FcGeometry(String),

    #[error("subband supports overlap at FC bin {0}")]
    OverlappingSupports(i64),

    #[error("signal of {len} samples is shorter than one {segment}-sample segment")]
    SignalTooShort { len: usize, segment: usize },

    #[error("adjacent channel at {offset_hz} Hz exceeds the Nyquist span ±{nyquist_hz} Hz")]
    BeyondNyquist { offset_hz: f64, nyquist_hz: f64 },

    #[error("emission mask does not cover any evaluated frequency")]
    MaskDomain,

    #[error("method {0} is not handled by this routine")]
    MethodMismatch(&'static str),
}

impl Error {
    pub(crate) fn scenario(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidScenario {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
