//! Per-pathway time measures and marginal-delay attribution.
//!
//! An *encounter* is a community or clinical event; anchors and the AP
//! milestone are not encounters. Each encounter is charged the days until the
//! next encounter, or until Admission for the last one, so the charged days
//! plus the help-seeking delay always add up to the onset-to-admission span.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::{CareEvent, NodeCategory, PathwayRecord, TimelineItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Epoch {
    Demand,
    Supply,
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Epoch::Demand => "demand",
            Epoch::Supply => "supply",
        })
    }
}

/// Demand/supply rule: an encounter is demand iff it sits before the AP
/// event in timeline order. Without an AP event everything is demand.
pub fn epoch_at(position: usize, ap_position: Option<usize>) -> Epoch {
    match ap_position {
        Some(cut) if position > cut => Epoch::Supply,
        _ => Epoch::Demand,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayAttribution {
    pub subject_id: String,
    pub category: NodeCategory,
    pub code: String,
    pub epoch: Epoch,
    pub days: i64,
    pub from_date: NaiveDate,
    pub to_date: NaiveDate,
}

/// An encounter with its timeline position and epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encounter<'a> {
    pub event: &'a CareEvent,
    pub position: usize,
    pub epoch: Epoch,
}

fn days_between(from: NaiveDate, to: NaiveDate) -> i64 {
    (to - from).num_days()
}

pub fn total_pathway_days(p: &PathwayRecord) -> i64 {
    days_between(p.onset, p.admission)
}

/// Onset to first antipsychotic; `None` without an AP event.
pub fn dup_days(p: &PathwayRecord) -> Option<i64> {
    p.ap_event().map(|ap| days_between(p.onset, ap.date))
}

/// Onset to the first encounter.
pub fn help_seeking_delay_days(p: &PathwayRecord) -> Option<i64> {
    encounters(p)
        .first()
        .map(|e| days_between(p.onset, e.event.date))
}

pub fn encounters(p: &PathwayRecord) -> Vec<Encounter<'_>> {
    let seq = p.sorted_sequence();
    let ap_position = seq
        .iter()
        .position(|item| matches!(item, TimelineItem::Event(e) if e.is_ap()));
    seq.iter()
        .enumerate()
        .filter_map(|(position, item)| {
            let event = item.as_event().filter(|e| e.is_encounter())?;
            Some(Encounter {
                event,
                position,
                epoch: epoch_at(position, ap_position),
            })
        })
        .collect()
}

pub fn marginal_delays(p: &PathwayRecord) -> Vec<DelayAttribution> {
    let enc = encounters(p);
    enc.iter()
        .enumerate()
        .map(|(i, e)| {
            let to_date = enc.get(i + 1).map_or(p.admission, |next| next.event.date);
            DelayAttribution {
                subject_id: p.subject_id.clone(),
                category: e.event.category,
                code: e.event.code.clone(),
                epoch: e.epoch,
                days: days_between(e.event.date, to_date),
                from_date: e.event.date,
                to_date,
            }
        })
        .collect()
}
