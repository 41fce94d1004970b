//! Wire formats: the two-row CSV export and the lossless session document.

mod csv;
mod date;
mod session;

use chrono::NaiveDate;

use crate::model::Violation;

pub use self::csv::{export_csv, export_filename, parse_csv, UNSPECIFIED_LABEL};
pub use self::date::{format_date, parse_date, PIVOT_MAX_YEAR, PIVOT_MIN_YEAR};
pub use self::session::{
    deserialize_session, read_session_document, serialize_session, session_filename,
    write_session_document, SessionDocument, SESSION_SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("date {0} is outside the two-digit year window 1970..=2069")]
    DateOutOfPivotRange(NaiveDate),
    #[error("malformed date {0:?}: expected MM/DD/YY")]
    MalformedDate(String),
    #[error("pathway is not valid: {}", join(.0))]
    InvalidPathway(Vec<Violation>),
    #[error("expected exactly 2 lines, found {0}")]
    RowCountMismatch(usize),
    #[error("header has {header} fields but date row has {dates}")]
    ColumnCountMismatch { header: usize, dates: usize },
    #[error("missing anchors: {0}")]
    MissingAnchors(String),
    #[error("date row must start with an empty field, found {0:?}")]
    UnexpectedLeadingField(String),
    #[error("column {column} ({code}) dated before the preceding timeline item")]
    NonChronological { column: usize, code: String },
    #[error("parsed pathway is not valid: {}", join(.0))]
    ParseValidation(Vec<Violation>),
    #[error("unsupported session schema version {0}")]
    SchemaVersionUnsupported(u64),
    #[error("malformed session document: {0}")]
    MalformedDocument(String),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
