//! Whole-record consistency checks.
//!
//! `validate` accepts arbitrary (e.g. freshly deserialized) records and
//! reports every broken invariant; an empty result means the record is safe
//! to export and analyze.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::pathway::{EventId, PathwayRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleCode {
    EmptySubject,
    IllegalSubjectChars,
    AnchorOrder,
    EventOutOfRange,
    DuplicateAp,
    DuplicateDateOrder,
    MissingCustomLabel,
    UnknownNode,
}

impl RuleCode {
    pub const ALL: [RuleCode; 8] = [
        RuleCode::EmptySubject,
        RuleCode::IllegalSubjectChars,
        RuleCode::AnchorOrder,
        RuleCode::EventOutOfRange,
        RuleCode::DuplicateAp,
        RuleCode::DuplicateDateOrder,
        RuleCode::MissingCustomLabel,
        RuleCode::UnknownNode,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleCode::EmptySubject => "EMPTY_SUBJECT",
            RuleCode::IllegalSubjectChars => "ILLEGAL_SUBJECT_CHARS",
            RuleCode::AnchorOrder => "ANCHOR_ORDER",
            RuleCode::EventOutOfRange => "EVENT_OUT_OF_RANGE",
            RuleCode::DuplicateAp => "DUPLICATE_AP",
            RuleCode::DuplicateDateOrder => "DUPLICATE_DATE_ORDER",
            RuleCode::MissingCustomLabel => "MISSING_CUSTOM_LABEL",
            RuleCode::UnknownNode => "UNKNOWN_NODE",
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(rename = "rule_code")]
    pub rule: RuleCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_id: Option<EventId>,
}

impl Violation {
    fn record(rule: RuleCode, message: String) -> Self {
        Violation {
            rule,
            message,
            event_id: None,
        }
    }

    fn event(rule: RuleCode, id: &EventId, message: String) -> Self {
        Violation {
            rule,
            message,
            event_id: Some(id.clone()),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

pub fn subject_id_violation(subject_id: &str) -> Option<Violation> {
    if subject_id.trim().is_empty() {
        return Some(Violation::record(
            RuleCode::EmptySubject,
            "subject id is empty".into(),
        ));
    }
    if subject_id.contains([',', '\n', '\r']) {
        return Some(Violation::record(
            RuleCode::IllegalSubjectChars,
            format!("subject id {subject_id:?} contains a comma or line break"),
        ));
    }
    None
}

/// Reports every broken invariant of `p`, in a stable order: record-level
/// rules first, then per-event rules in storage order, then cross-event rules
/// in timeline order.
pub fn validate(p: &PathwayRecord) -> Vec<Violation> {
    let mut out = Vec::new();

    out.extend(subject_id_violation(&p.subject_id));

    if !(p.onset <= p.consent && p.consent <= p.admission) || p.onset == p.admission {
        out.push(Violation::record(
            RuleCode::AnchorOrder,
            format!(
                "anchors must satisfy onset <= consent <= admission with onset < admission \
                 (onset {}, consent {}, admission {})",
                p.onset, p.consent, p.admission
            ),
        ));
    }

    for e in &p.events {
        match e.node() {
            None => out.push(Violation::event(
                RuleCode::UnknownNode,
                &e.id,
                format!("unknown node {}/{}", e.category, e.code),
            )),
            Some(node) if node.is_other() && e.label().is_none() => out.push(Violation::event(
                RuleCode::MissingCustomLabel,
                &e.id,
                format!(
                    "{} Other event on {} needs a custom label",
                    e.category, e.date
                ),
            )),
            Some(node) if !node.is_other() && e.label().is_some() => out.push(Violation::event(
                RuleCode::MissingCustomLabel,
                &e.id,
                format!(
                    "custom labels are only allowed on Other nodes, not {}",
                    e.code
                ),
            )),
            Some(_) => {}
        }
        if e.date < p.onset || e.date > p.admission {
            out.push(Violation::event(
                RuleCode::EventOutOfRange,
                &e.id,
                format!(
                    "{} on {} is outside {}..={}",
                    e.code, e.date, p.onset, p.admission
                ),
            ));
        }
    }

    let mut seen_ap = false;
    let mut slots = HashSet::new();
    for e in p.sorted_events() {
        if e.is_ap() {
            if seen_ap {
                out.push(Violation::event(
                    RuleCode::DuplicateAp,
                    &e.id,
                    format!("second first-antipsychotic event on {}", e.date),
                ));
            }
            seen_ap = true;
        }
        if !slots.insert((e.date, e.order)) {
            out.push(Violation::event(
                RuleCode::DuplicateDateOrder,
                &e.id,
                format!("another event already holds {} order {}", e.date, e.order),
            ));
        }
    }

    out
}

/// Distinct rule codes present in a violation list, sorted.
pub fn rule_codes(violations: &[Violation]) -> Vec<RuleCode> {
    let mut codes: Vec<RuleCode> = violations.iter().map(|v| v.rule).collect();
    codes.sort();
    codes.dedup();
    codes
}
