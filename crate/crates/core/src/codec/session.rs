//! Lossless JSON session documents, one per pathway on disk.

use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::CodecError;
use crate::model::{validate, PathwayRecord};

pub const SESSION_SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDocument {
    pub schema_version: u64,
    pub pathway: PathwayRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_modified: Option<DateTime<Utc>>,
}

/// `{subject_id}.session`
pub fn session_filename(subject_id: &str) -> String {
    format!("{subject_id}.session")
}

pub fn write_session_document(doc: &SessionDocument) -> Result<String, CodecError> {
    let violations = validate(&doc.pathway);
    if !violations.is_empty() {
        return Err(CodecError::InvalidPathway(violations));
    }
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CodecError::MalformedDocument(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn serialize_session(p: &PathwayRecord) -> Result<String, CodecError> {
    write_session_document(&SessionDocument {
        schema_version: SESSION_SCHEMA_VERSION,
        pathway: p.clone(),
        last_modified: None,
    })
}

pub fn read_session_document(text: &str) -> Result<SessionDocument, CodecError> {
    let malformed = |msg: String| CodecError::MalformedDocument(msg);
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let version = value
        .get("schema_version")
        .ok_or_else(|| malformed("missing schema_version".into()))?
        .as_u64()
        .ok_or_else(|| malformed("schema_version must be a non-negative integer".into()))?;
    if version != SESSION_SCHEMA_VERSION {
        return Err(CodecError::SchemaVersionUnsupported(version));
    }
    let doc: SessionDocument =
        serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;

    let mut ids = HashSet::new();
    if let Some(dupe) = doc.pathway.events.iter().find(|e| !ids.insert(&e.id)) {
        return Err(malformed(format!("duplicate event id `{}`", dupe.id)));
    }
    let violations = validate(&doc.pathway);
    if !violations.is_empty() {
        return Err(CodecError::ParseValidation(violations));
    }
    Ok(doc)
}

pub fn deserialize_session(text: &str) -> Result<PathwayRecord, CodecError> {
    read_session_document(text).map(|doc| doc.pathway)
}
