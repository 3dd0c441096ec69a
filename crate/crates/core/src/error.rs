use core::fmt;

use crate::Source;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two grids or matrices that must agree in shape do not.
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    InvalidConfig(&'static str),
    /// Peak normalization of an all-zero signal.
    ZeroPeak,
    NonFinite(&'static str),
    AlphaOutOfRange(f64),
    SampleRateMismatch {
        expected: u32,
        found: u32,
    },
    MissingLabel(Source),
    Empty(&'static str),
    NegativeInput(&'static str),
    InvalidTarget {
        index: usize,
        value: f64,
    },
    NanLoss {
        epoch: usize,
        example: usize,
    },
    /// The overlap-add envelope vanished inside the signal.
    ZeroEnvelope {
        sample: usize,
    },
    ZeroReference,
    /// All decomposition components are zero; no ratio is defined.
    UndefinedMetrics,
    BadMagic,
    Truncated,
    Corrupt(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::ZeroPeak => f.write_str("zero peak: cannot normalize an all-zero signal"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::AlphaOutOfRange(a) => write!(f, "alpha {a} outside the open interval (0, 1)"),
            Error::SampleRateMismatch { expected, found } => {
                write!(f, "sample rate mismatch: expected {expected} Hz, found {found} Hz")
            }
            Error::MissingLabel(src) => write!(f, "no stem labelled {src}"),
            Error::Empty(what) => write!(f, "empty input: {what}"),
            Error::NegativeInput(what) => write!(f, "negative entry in {what}"),
            Error::InvalidTarget { index, value } => {
                write!(f, "target element {index} is {value}, expected 0 or 1")
            }
            Error::NanLoss { epoch, example } => {
                write!(f, "loss became NaN at epoch {epoch}, example {example}")
            }
            Error::ZeroEnvelope { sample } => {
                write!(f, "overlap-add envelope is zero at sample {sample}")
            }
            Error::ZeroReference => f.write_str("target reference signal is all zeros"),
            Error::UndefinedMetrics => {
                f.write_str("estimate has no target, interference or artefact energy")
            }
            Error::BadMagic => f.write_str("unrecognized file magic"),
            Error::Truncated => f.write_str("truncated data"),
            Error::Corrupt(what) => write!(f, "corrupt data: {what}"),
        }
    }
}

impl core::error::Error for Error {}
