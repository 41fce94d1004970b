//! Pathway records, the node taxonomy, and validation.

pub mod catalog;
mod pathway;
mod validate;

pub use catalog::{node_catalog, NodeCategory, NodeType};
pub use pathway::{
    AnchorKind, CareEvent, EventId, EventPatch, NewEvent, PathwayError, PathwayRecord, TimelineItem,
};
pub use validate::{rule_codes, subject_id_violation, validate, RuleCode, Violation};
