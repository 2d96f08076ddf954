use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A column index does not exist in the dataset.
    IndexOutOfRange {
        index: usize,
        columns: usize,
    },
    /// A column index is used twice among `x`, `y` and the conditioning set.
    OverlappingIndex {
        index: usize,
    },
    /// A column does not have the dataset's row count.
    RaggedColumn {
        column: String,
        expected: usize,
        found: usize,
    },
    /// A level code lies outside `[0, levels)`.
    CodeOutOfRange {
        column: String,
        row: usize,
        code: u32,
        levels: usize,
    },
    /// Column metadata is inconsistent (zero levels, duplicate labels, ...).
    InvalidColumn {
        column: String,
        reason: &'static str,
    },
    EmptyDataset,
    EmptyTable,
    /// The cell count of a table overflows the index type, or a dense
    /// buffer would exceed the allowed size.
    TableTooLarge {
        cells: Option<usize>,
        limit: usize,
    },
    /// Two arrays that should share a shape do not.
    ShapeMismatch {
        expected: usize,
        found: usize,
    },
    /// Observed count is positive where the expected count is zero.
    ZeroExpected {
        cell: usize,
    },
    /// The operation needs at least `needed` table dimensions.
    TooFewDims {
        needed: usize,
        found: usize,
    },
    /// A chi-squared distribution with zero degrees of freedom.
    ZeroDof,
    /// Negative or NaN test statistic.
    InvalidStatistic,
    InvalidModel {
        reason: &'static str,
    },
    NotConverged {
        iterations: usize,
        discrepancy: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { index, columns } => {
                write!(f, "column index {index} out of range (dataset has {columns} columns)")
            }
            Error::OverlappingIndex { index } => {
                write!(f, "column index {index} appears more than once among x, y and the conditioning set")
            }
            Error::RaggedColumn { column, expected, found } => {
                write!(f, "column `{column}` has {found} entries, expected {expected}")
            }
            Error::CodeOutOfRange { column, row, code, levels } => {
                write!(f, "column `{column}` row {row}: code {code} outside [0, {levels})")
            }
            Error::InvalidColumn { column, reason } => write!(f, "column `{column}`: {reason}"),
            Error::EmptyDataset => f.write_str("dataset has no rows"),
            Error::EmptyTable => f.write_str("contingency table has total count 0"),
            Error::TableTooLarge { cells: Some(cells), limit } => {
                write!(f, "table with {cells} cells exceeds the limit of {limit}")
            }
            Error::TableTooLarge { cells: None, limit } => {
                write!(f, "table cell count overflows (limit {limit})")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected {expected} cells, found {found}")
            }
            Error::ZeroExpected { cell } => {
                write!(f, "cell {cell} has a positive count but zero expected frequency")
            }
            Error::TooFewDims { needed, found } => {
                write!(f, "table needs at least {needed} dimensions, found {found}")
            }
            Error::ZeroDof => f.write_str("chi-squared distribution with zero degrees of freedom"),
            Error::InvalidStatistic => f.write_str("test statistic must be a non-negative number"),
            Error::InvalidModel { reason } => write!(f, "invalid log-linear model: {reason}"),
            Error::NotConverged { iterations, discrepancy } => {
                write!(f, "IPF did not converge after {iterations} cycles (max margin discrepancy {discrepancy:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
