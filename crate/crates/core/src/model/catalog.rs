//! The closed node taxonomy used on every pathway.
//!
//! Codes are the short labels written to the CSV export and used as graph
//! node names. `Other` is the only code shared by two categories, so lookups
//! always take the category alongside the code.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeCategory {
    /// Care-seeking facilitators.
    Community,
    /// Locations of care.
    Clinical,
    /// Milestones that sit on the timeline but are not encounters.
    Key,
    /// Framing dates of the timeline.
    Anchor,
}

impl NodeCategory {
    pub const ALL: [NodeCategory; 4] = [
        NodeCategory::Community,
        NodeCategory::Clinical,
        NodeCategory::Key,
        NodeCategory::Anchor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeCategory::Community => "community",
            NodeCategory::Clinical => "clinical",
            NodeCategory::Key => "key",
            NodeCategory::Anchor => "anchor",
        }
    }

    /// Whether events of this category count as encounters in analytics.
    pub fn is_encounter(self) -> bool {
        matches!(self, NodeCategory::Community | NodeCategory::Clinical)
    }
}

impl fmt::Display for NodeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown node category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for NodeCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// One entry of the node taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NodeType {
    pub category: NodeCategory,
    pub code: &'static str,
    pub display_name: &'static str,
}

impl NodeType {
    const fn new(category: NodeCategory, code: &'static str, display_name: &'static str) -> Self {
        NodeType {
            category,
            code,
            display_name,
        }
    }

    pub fn is_other(&self) -> bool {
        self.code == OTHER
    }
}

pub const OTHER: &str = "Other";
pub const AP: &str = "AP";
pub const ONSET: &str = "Onset";
pub const CONSENT: &str = "Consent";
pub const ADMISSION: &str = "Admission";

use NodeCategory::{Anchor, Clinical, Community, Key};

/// Listing order matches the event dialog.
static CATALOG: [NodeType; 19] = [
    NodeType::new(Community, "Self", "Patient Instigates Care-seeking"),
    NodeType::new(Community, "Family", "Any Family"),
    NodeType::new(Community, "Police", "Police"),
    NodeType::new(Community, "Education", "Teacher or Guidance Counselor"),
    NodeType::new(Community, OTHER, "Other"),
    NodeType::new(Clinical, "ED", "Emergency Department Visit"),
    NodeType::new(Clinical, "Inpt", "Psychiatric Inpatient Admission"),
    NodeType::new(Clinical, "IOP", "Intensive Outpatient"),
    NodeType::new(Clinical, "PCP", "Primary Care Provider"),
    NodeType::new(Clinical, "Outpt", "Outpatient Mental Health"),
    NodeType::new(Clinical, "Acute", "Acute Evaluation"),
    NodeType::new(Clinical, "Mobile", "Mobile Evaluation"),
    NodeType::new(Clinical, "OtherMH", "Other Mental Health"),
    NodeType::new(Clinical, "OtherMed", "Other Medical Provider"),
    NodeType::new(Clinical, OTHER, "Other"),
    NodeType::new(Key, AP, "First antipsychotic (for psychosis)"),
    NodeType::new(Anchor, ONSET, "Psychosis Onset"),
    NodeType::new(Anchor, CONSENT, "Consent"),
    NodeType::new(Anchor, ADMISSION, "Admission"),
];

/// The whole taxonomy in dialog order.
pub fn node_catalog() -> &'static [NodeType] {
    &CATALOG
}

/// Entries of one category, in dialog order.
pub fn nodes_in(category: NodeCategory) -> impl Iterator<Item = &'static NodeType> {
    CATALOG.iter().filter(move |n| n.category == category)
}

/// Exact lookup by category and code.
pub fn lookup_in(category: NodeCategory, code: &str) -> Option<&'static NodeType> {
    CATALOG
        .iter()
        .find(|n| n.category == category && n.code == code)
}

/// Lookup by code alone. `Other` resolves to the community entry.
pub fn lookup(code: &str) -> Option<&'static NodeType> {
    CATALOG.iter().find(|n| n.code == code)
}

/// Resolves a code that may be written to the timeline as an event.
/// Anchors are excluded; `Other` resolves to the community entry.
pub fn lookup_event_code(code: &str) -> Option<&'static NodeType> {
    CATALOG
        .iter()
        .find(|n| n.code == code && n.category != Anchor)
}
