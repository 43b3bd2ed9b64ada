use thiserror::Error;

/// Crate-wide error type.
///
/// `Dimension` and `Structural` signal malformed inputs, as opposed to a
/// check that ran and found a violation (those come back as failing
/// [`crate::CheckReport`]s, never as errors).
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of matrices, grids or arrays do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix entry is NaN or infinite.
    #[error("non-finite entry at row {row}, col {col}")]
    NonFinite { row: usize, col: usize },

    /// Expression text failed to parse; `pos` is a byte offset into the source.
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A generator index fell outside `1..=n`.
    #[error("generator index ({i},{j}) out of range 1..={n}")]
    IndexRange { i: u32, j: u32, n: u32 },

    /// Input violates a structural precondition (invalid gluing data,
    /// inconsistent sizes between a space and a unitary, and so on).
    #[error("structural error: {0}")]
    Structural(String),
}
