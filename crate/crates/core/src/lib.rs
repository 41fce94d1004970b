//! Pathway-to-care records for first-episode psychosis research.
//!
//! [`model`] holds the record types and validator, [`codec`] the CSV export
//! and session documents, [`analytics`] the delay statistics and cohort
//! network. [`synth`] generates random valid pathways for tests and benches.

pub mod analytics;
pub mod codec;
pub mod exec;
pub mod fixture;
pub mod model;
pub mod synth;

pub use exec::Execution;
pub use model::{CareEvent, EventId, NodeCategory, PathwayRecord, RuleCode, Violation};
