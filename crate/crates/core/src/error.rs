use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("input has no header row")]
    EmptyInput,
    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate header `{0}`")]
    DuplicateHeader(String),
    #[error("cell at row {row}, column `{column}` exceeds {limit} bytes")]
    CellTooLarge {
        row: usize,
        column: String,
        limit: usize,
    },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("column `{0}` has no non-missing values")]
    AllMissing(String),
    #[error("{columns} columns exceeds the dependency search cap of {cap}")]
    ComplexityCap { columns: usize, cap: usize },
    #[error("unknown anchor column `{0}`")]
    UnknownAnchor(String),
    #[error("column `{0}` required for a join is missing")]
    MissingJoinColumn(String),
    #[error("column `{name}` has type {first} in `{first_table}` but {second} in `{second_table}`")]
    NameCollision {
        name: String,
        first: String,
        first_table: String,
        second: String,
        second_table: String,
    },
    #[error("anchor key `{0}` has no label")]
    LabelMismatch(String),
    #[error("label has a single class")]
    DegenerateLabel,
    #[error("test set contains a single class; AUC is undefined (accuracy {accuracy:.4})")]
    SingleClassTest { accuracy: f64 },
    #[error("sample is empty")]
    EmptySample,
    #[error("dimension mismatch: reference has {reference} columns, incoming has {incoming}")]
    DimensionMismatch { reference: usize, incoming: usize },
    #[error("missingness label is constant for cluster {0:?}")]
    Degenerate(Vec<String>),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed artifact {path}: {message}")]
    Artifact { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::FileNotFound(_) => "FileNotFound",
            Error::EmptyInput => "EmptyInput",
            Error::RaggedRow { .. } => "RaggedRow",
            Error::DuplicateHeader(_) => "DuplicateHeader",
            Error::CellTooLarge { .. } => "CellTooLarge",
            Error::Csv(_) => "Csv",
            Error::AllMissing(_) => "AllMissing",
            Error::ComplexityCap { .. } => "ComplexityCap",
            Error::UnknownAnchor(_) => "UnknownAnchor",
            Error::MissingJoinColumn(_) => "MissingJoinColumn",
            Error::NameCollision { .. } => "NameCollision",
            Error::LabelMismatch(_) => "LabelMismatch",
            Error::DegenerateLabel => "DegenerateLabel",
            Error::SingleClassTest { .. } => "SingleClassTest",
            Error::EmptySample => "EmptySample",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Degenerate(_) => "Degenerate",
            Error::UnknownColumn(_) => "UnknownColumn",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Artifact { .. } => "Artifact",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
