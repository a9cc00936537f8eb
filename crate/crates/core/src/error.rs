use std::fmt;

use crate::weights::WeightMode;

/// Unified error type for matrix construction, set algebra, estimation,
/// and verification.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An entry is negative, NaN, or infinite.
    InvalidEntry { row: usize, col: usize, value: f64 },
    /// Entry buffer length disagrees with the declared shape.
    EntryCount { rows: usize, cols: usize, len: usize },
    /// Zero rows or zero columns.
    EmptyShape,
    /// Two matrices that must share a shape do not.
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Inner dimensions of a matrix product disagree.
    InnerDim {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// A square matrix was required.
    NotSquare { rows: usize, cols: usize },
    /// Hadamard exponent must be positive and finite.
    BadExponent { value: f64 },
    /// Scale factor must be positive and finite.
    BadScale { value: f64 },
    /// Tolerance argument is out of range for the operation.
    BadTolerance { value: f64 },
    /// A weight is non-positive, NaN, or infinite.
    BadWeight { index: usize, value: f64 },
    /// Weight sum violates the chosen normalization mode.
    BadWeightSum { sum: f64, mode: WeightMode },
    /// Two collections that must have equal lengths do not.
    LengthMismatch { expected: usize, found: usize },
    /// An operator set must hold at least one member.
    EmptySet,
    /// Members of a set (or sets being combined) disagree on dimension.
    DimMismatch { expected: usize, found: usize },
    /// A product word must have at least one letter.
    EmptyWord,
    /// A word letter indexes past the end of its set.
    WordIndex {
        position: usize,
        index: usize,
        bound: usize,
    },
    /// An enumeration would evaluate more words than the caller allowed.
    BudgetExceeded { required: u128, budget: u64 },
    /// The spectral radius iteration stalled; carries the last certified
    /// enclosure so callers can still reason about the value.
    NonConvergence {
        lower: f64,
        upper: f64,
        iterations: u64,
    },
    /// A kernel function produced an unusable sample.
    KernelSample { x: f64, y: f64, value: f64 },
    /// A configuration value is out of range.
    BadConfig { message: String },
    /// Filesystem failure while reading or writing.
    Io { path: String, message: String },
    /// A file was read but its contents could not be interpreted.
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidEntry { row, col, value } => write!(
                f,
                "entry ({row},{col}) is {value}; entries must be finite and non-negative"
            ),
            Error::EntryCount { rows, cols, len } => write!(
                f,
                "entry buffer holds {len} values, expected {rows}x{cols} = {}",
                rows * cols
            ),
            Error::EmptyShape => write!(f, "matrix dimensions must be positive"),
            Error::ShapeMismatch { left, right } => write!(
                f,
                "shape mismatch: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::InnerDim { left, right } => write!(
                f,
                "cannot multiply {}x{} by {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix is {rows}x{cols}, operation requires square")
            }
            Error::BadExponent { value } => write!(
                f,
                "Hadamard exponent must be positive and finite, got {value}"
            ),
            Error::BadScale { value } => {
                write!(f, "scale factor must be positive and finite, got {value}")
            }
            Error::BadTolerance { value } => write!(f, "invalid tolerance {value}"),
            Error::BadWeight { index, value } => write!(
                f,
                "weight {index} must be positive and finite, got {value}"
            ),
            Error::BadWeightSum { sum, mode } => {
                write!(f, "weight sum {sum} violates mode {mode}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} items, found {found}")
            }
            Error::EmptySet => write!(f, "operator set needs at least one member"),
            Error::DimMismatch { expected, found } => write!(
                f,
                "operator dimension mismatch: expected {expected}, found {found}"
            ),
            Error::EmptyWord => write!(f, "product word must have at least one letter"),
            Error::WordIndex {
                position,
                index,
                bound,
            } => write!(
                f,
                "word letter {position} selects member {index}, only {bound} available"
            ),
            Error::BudgetExceeded { required, budget } => write!(
                f,
                "enumeration needs {required} word evaluations, budget is {budget}"
            ),
            Error::NonConvergence {
                lower,
                upper,
                iterations,
            } => write!(
                f,
                "spectral radius iteration stalled after {iterations} steps, enclosure [{lower}, {upper}]"
            ),
            Error::KernelSample { x, y, value } => write!(
                f,
                "kernel returned {value} at ({x}, {y}); samples must be finite and non-negative"
            ),
            Error::BadConfig { message } => write!(f, "{message}"),
            Error::Io { path, message } => write!(f, "{path}: {message}"),
            Error::Parse { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for Error {}
