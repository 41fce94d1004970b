use std::cmp::Ordering;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize};

use super::catalog::{self, NodeCategory, NodeType};
use super::validate::{validate, RuleCode, Violation};

/// Opaque per-event identifier, unique within a pathway.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(String);

impl EventId {
    pub fn generate() -> Self {
        EventId(uuid::Uuid::new_v4().simple().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for EventId {
    fn from(s: &str) -> Self {
        EventId(s.to_string())
    }
}

impl From<String> for EventId {
    fn from(s: String) -> Self {
        EventId(s)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One dated interaction on the timeline.
///
/// The node is held as raw category + code so that records read back from
/// disk can be validated rather than rejected at parse time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CareEvent {
    pub id: EventId,
    pub category: NodeCategory,
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_label: Option<String>,
    pub date: NaiveDate,
    pub order: u32,
}

impl CareEvent {
    /// The catalog entry this event refers to, if any. Anchors never resolve.
    pub fn node(&self) -> Option<&'static NodeType> {
        if self.category == NodeCategory::Anchor {
            return None;
        }
        catalog::lookup_in(self.category, &self.code)
    }

    pub fn is_ap(&self) -> bool {
        self.category == NodeCategory::Key && self.code == catalog::AP
    }

    /// Community or clinical event, i.e. counted by analytics.
    pub fn is_encounter(&self) -> bool {
        self.category.is_encounter()
    }

    /// Custom label if it carries any non-blank text.
    pub fn label(&self) -> Option<&str> {
        self.custom_label
            .as_deref()
            .filter(|l| !l.trim().is_empty())
    }

    fn sort_key(&self) -> (NaiveDate, u32, &EventId) {
        (self.date, self.order, &self.id)
    }
}

/// One participant's full pathway to care.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwayRecord {
    pub subject_id: String,
    pub onset: NaiveDate,
    pub consent: NaiveDate,
    pub admission: NaiveDate,
    #[serde(default)]
    pub events: Vec<CareEvent>,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathwayError {
    #[error("subject id is empty")]
    EmptySubjectId,
    #[error("{0}")]
    IllegalSubjectChars(String),
    #[error("{0}")]
    AnchorOrderViolation(String),
    #[error("{0}")]
    DateOutOfRange(String),
    #[error("{0}")]
    DuplicateAp(String),
    #[error("{0}")]
    UnknownNode(String),
    #[error("{0}")]
    MissingCustomLabel(String),
    #[error("{0}")]
    DuplicateDateOrder(String),
    #[error("no event with id `{0}`")]
    UnknownEventId(EventId),
}

impl PathwayError {
    /// Rule code this error corresponds to, when it came from validation.
    pub fn rule(&self) -> Option<RuleCode> {
        Some(match self {
            PathwayError::EmptySubjectId => RuleCode::EmptySubject,
            PathwayError::IllegalSubjectChars(_) => RuleCode::IllegalSubjectChars,
            PathwayError::AnchorOrderViolation(_) => RuleCode::AnchorOrder,
            PathwayError::DateOutOfRange(_) => RuleCode::EventOutOfRange,
            PathwayError::DuplicateAp(_) => RuleCode::DuplicateAp,
            PathwayError::UnknownNode(_) => RuleCode::UnknownNode,
            PathwayError::MissingCustomLabel(_) => RuleCode::MissingCustomLabel,
            PathwayError::DuplicateDateOrder(_) => RuleCode::DuplicateDateOrder,
            PathwayError::UnknownEventId(_) => return None,
        })
    }
}

impl From<Violation> for PathwayError {
    fn from(v: Violation) -> Self {
        let msg = v.message;
        match v.rule {
            RuleCode::EmptySubject => PathwayError::EmptySubjectId,
            RuleCode::IllegalSubjectChars => PathwayError::IllegalSubjectChars(msg),
            RuleCode::AnchorOrder => PathwayError::AnchorOrderViolation(msg),
            RuleCode::EventOutOfRange => PathwayError::DateOutOfRange(msg),
            RuleCode::DuplicateAp => PathwayError::DuplicateAp(msg),
            RuleCode::DuplicateDateOrder => PathwayError::DuplicateDateOrder(msg),
            RuleCode::MissingCustomLabel => PathwayError::MissingCustomLabel(msg),
            RuleCode::UnknownNode => PathwayError::UnknownNode(msg),
        }
    }
}

/// Input for [`PathwayRecord::add_event`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewEvent {
    pub category: NodeCategory,
    pub code: String,
    #[serde(default)]
    pub custom_label: Option<String>,
    pub date: NaiveDate,
    /// Same-day position; assigned automatically when absent.
    #[serde(default)]
    pub order: Option<u32>,
}

impl NewEvent {
    pub fn new(category: NodeCategory, code: impl Into<String>, date: NaiveDate) -> Self {
        NewEvent {
            category,
            code: code.into(),
            custom_label: None,
            date,
            order: None,
        }
    }

    /// Resolves the category from the code; `Other` defaults to community.
    /// Unknown codes are kept and rejected when the event is added.
    pub fn from_code(code: &str, date: NaiveDate) -> Self {
        let category = catalog::lookup_event_code(code)
            .map(|n| n.category)
            .unwrap_or(NodeCategory::Community);
        NewEvent::new(category, code, date)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.custom_label = Some(label.into());
        self
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.order = Some(order);
        self
    }
}

/// Partial update for [`PathwayRecord::update_event`]. Absent fields are kept.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventPatch {
    #[serde(default)]
    pub category: Option<NodeCategory>,
    #[serde(default)]
    pub code: Option<String>,
    /// `Some(None)` clears the label.
    #[serde(default, deserialize_with = "present_option")]
    pub custom_label: Option<Option<String>>,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    #[serde(default)]
    pub order: Option<u32>,
}

fn present_option<'de, D>(de: D) -> Result<Option<Option<String>>, D::Error>
where
    D: Deserializer<'de>,
{
    Option::<String>::deserialize(de).map(Some)
}

/// Framing dates of the timeline, in sequence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorKind {
    Onset,
    Consent,
    Admission,
}

impl AnchorKind {
    pub fn code(self) -> &'static str {
        match self {
            AnchorKind::Onset => catalog::ONSET,
            AnchorKind::Consent => catalog::CONSENT,
            AnchorKind::Admission => catalog::ADMISSION,
        }
    }
}

/// An entry of [`PathwayRecord::sorted_sequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimelineItem<'a> {
    Anchor { kind: AnchorKind, date: NaiveDate },
    Event(&'a CareEvent),
}

impl<'a> TimelineItem<'a> {
    pub fn code(&self) -> &'a str {
        match self {
            TimelineItem::Anchor { kind, .. } => kind.code(),
            TimelineItem::Event(e) => e.code.as_str(),
        }
    }

    pub fn date(&self) -> NaiveDate {
        match self {
            TimelineItem::Anchor { date, .. } => *date,
            TimelineItem::Event(e) => e.date,
        }
    }

    pub fn as_event(&self) -> Option<&'a CareEvent> {
        match self {
            TimelineItem::Event(e) => Some(e),
            TimelineItem::Anchor { .. } => None,
        }
    }
}

fn first_violation(p: &PathwayRecord) -> Result<(), PathwayError> {
    match validate(p).into_iter().next() {
        Some(v) => Err(v.into()),
        None => Ok(()),
    }
}

impl PathwayRecord {
    /// Starts a pathway from its baseline fields. The result has no events
    /// and version 1.
    pub fn create(
        subject_id: impl Into<String>,
        onset: NaiveDate,
        consent: NaiveDate,
        admission: NaiveDate,
    ) -> Result<Self, PathwayError> {
        let p = PathwayRecord {
            subject_id: subject_id.into(),
            onset,
            consent,
            admission,
            events: Vec::new(),
            version: 1,
        };
        first_violation(&p)?;
        Ok(p)
    }

    pub fn event(&self, id: &EventId) -> Option<&CareEvent> {
        self.events.iter().find(|e| &e.id == id)
    }

    fn next_order_on(&self, date: NaiveDate, skip: Option<&EventId>) -> u32 {
        self.events
            .iter()
            .filter(|e| e.date == date && Some(&e.id) != skip)
            .map(|e| e.order + 1)
            .max()
            .unwrap_or(0)
    }

    /// Replaces `self` with `candidate` only if the candidate validates.
    fn commit(&mut self, mut candidate: PathwayRecord) -> Result<(), PathwayError> {
        candidate.version = self.version + 1;
        first_violation(&candidate)?;
        *self = candidate;
        Ok(())
    }

    /// Appends an event. On error the record is left untouched.
    pub fn add_event(&mut self, new: NewEvent) -> Result<EventId, PathwayError> {
        let order = new
            .order
            .unwrap_or_else(|| self.next_order_on(new.date, None));
        let id = EventId::generate();
        let mut candidate = self.clone();
        candidate.events.push(CareEvent {
            id: id.clone(),
            category: new.category,
            code: new.code,
            custom_label: new.custom_label,
            date: new.date,
            order,
        });
        self.commit(candidate)?;
        Ok(id)
    }

    /// Applies a patch to one event. Moving an event to another date without
    /// an explicit order re-queues it at the end of that day.
    pub fn update_event(&mut self, id: &EventId, patch: EventPatch) -> Result<(), PathwayError> {
        let idx = self
            .events
            .iter()
            .position(|e| &e.id == id)
            .ok_or_else(|| PathwayError::UnknownEventId(id.clone()))?;
        let current = &self.events[idx];

        let mut ev = current.clone();
        let node_changed = patch.category.is_some() || patch.code.is_some();
        if let Some(category) = patch.category {
            ev.category = category;
        }
        if let Some(code) = patch.code {
            ev.code = code;
        }
        match patch.custom_label {
            Some(label) => ev.custom_label = label,
            None if node_changed && ev.code != catalog::OTHER => ev.custom_label = None,
            None => {}
        }
        if let Some(date) = patch.date {
            ev.date = date;
        }
        ev.order = match patch.order {
            Some(order) => order,
            None if ev.date != current.date => self.next_order_on(ev.date, Some(id)),
            None => current.order,
        };

        let mut candidate = self.clone();
        candidate.events[idx] = ev;
        self.commit(candidate)
    }

    pub fn remove_event(&mut self, id: &EventId) -> Result<CareEvent, PathwayError> {
        let idx = self
            .events
            .iter()
            .position(|e| &e.id == id)
            .ok_or_else(|| PathwayError::UnknownEventId(id.clone()))?;
        let mut candidate = self.clone();
        let removed = candidate.events.remove(idx);
        self.commit(candidate)?;
        Ok(removed)
    }

    /// Events ordered by date then same-day order.
    pub fn sorted_events(&self) -> Vec<&CareEvent> {
        let mut events: Vec<&CareEvent> = self.events.iter().collect();
        events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        events
    }

    /// The full timeline: Onset, events in order, then Consent and Admission.
    pub fn sorted_sequence(&self) -> Vec<TimelineItem<'_>> {
        let mut items = Vec::with_capacity(self.events.len() + 3);
        items.push(TimelineItem::Anchor {
            kind: AnchorKind::Onset,
            date: self.onset,
        });
        items.extend(self.sorted_events().into_iter().map(TimelineItem::Event));
        items.push(TimelineItem::Anchor {
            kind: AnchorKind::Consent,
            date: self.consent,
        });
        items.push(TimelineItem::Anchor {
            kind: AnchorKind::Admission,
            date: self.admission,
        });
        items
    }

    pub fn ap_event(&self) -> Option<&CareEvent> {
        self.events.iter().find(|e| e.is_ap())
    }

    /// Compares two pathways ignoring event ids, event storage order and version.
    pub fn same_content(&self, other: &PathwayRecord) -> bool {
        fn strip(p: &PathwayRecord) -> Vec<(NaiveDate, u32, NodeCategory, &str, Option<&str>)> {
            p.sorted_events()
                .into_iter()
                .map(|e| (e.date, e.order, e.category, e.code.as_str(), e.label()))
                .collect()
        }
        self.subject_id == other.subject_id
            && self.onset == other.onset
            && self.consent == other.consent
            && self.admission == other.admission
            && strip(self) == strip(other)
    }
}

impl PartialOrd for CareEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CareEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key()
            .cmp(&other.sort_key())
            .then_with(|| self.code.cmp(&other.code))
    }
}
