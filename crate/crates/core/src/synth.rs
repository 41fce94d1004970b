//! Random pathway generation for property tests and benchmarks.
//!
//! [`random_pathway`] always produces records that pass `validate`;
//! [`seed_defect`] breaks exactly one rule of a valid record.

use chrono::{Duration, NaiveDate};
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::model::catalog::{self, NodeCategory};
use crate::model::{CareEvent, EventId, PathwayRecord, RuleCode};

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_events: usize,
    pub max_span_days: i64,
    /// Chance that an event reuses an already-used date.
    pub same_day_bias: f64,
    pub ap_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_events: 30,
            max_span_days: 1500,
            same_day_bias: 0.3,
            ap_probability: 0.7,
        }
    }
}

fn encounter_nodes() -> Vec<(NodeCategory, &'static str)> {
    catalog::node_catalog()
        .iter()
        .filter(|n| n.category.is_encounter())
        .map(|n| (n.category, n.code))
        .collect()
}

fn next_order(events: &[CareEvent], date: NaiveDate) -> u32 {
    events
        .iter()
        .filter(|e| e.date == date)
        .map(|e| e.order + 1)
        .max()
        .unwrap_or(0)
}

fn make_event(
    events: &[CareEvent],
    category: NodeCategory,
    code: &str,
    label: Option<String>,
    date: NaiveDate,
) -> CareEvent {
    CareEvent {
        id: EventId::from(format!("g{}", events.len() + 1)),
        category,
        code: code.to_string(),
        custom_label: label,
        date,
        order: next_order(events, date),
    }
}

fn random_date_in<R: Rng + ?Sized>(rng: &mut R, from: NaiveDate, to: NaiveDate) -> NaiveDate {
    from + Duration::days(rng.random_range(0..=(to - from).num_days()))
}

pub fn random_pathway<R: Rng + ?Sized>(
    rng: &mut R,
    subject_id: impl Into<String>,
    cfg: &GenConfig,
) -> PathwayRecord {
    let base = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    let onset = base + Duration::days(rng.random_range(0..365 * 50));
    let admission = onset + Duration::days(rng.random_range(1..=cfg.max_span_days.max(1)));
    let consent = random_date_in(rng, onset, admission);

    let nodes = encounter_nodes();
    let n_events = rng.random_range(0..=cfg.max_events);
    let ap_at = rng
        .random_bool(cfg.ap_probability)
        .then(|| rng.random_range(0..=n_events));
    let mut events: Vec<CareEvent> = Vec::with_capacity(n_events + 1);
    for i in 0..=n_events {
        let date = if !events.is_empty() && rng.random_bool(cfg.same_day_bias) {
            events.choose(rng).unwrap().date
        } else {
            random_date_in(rng, onset, admission)
        };
        if ap_at == Some(i) {
            let ev = make_event(&events, NodeCategory::Key, catalog::AP, None, date);
            events.push(ev);
        }
        if i == n_events {
            break;
        }
        let &(category, code) = nodes.choose(rng).unwrap();
        let label = (code == catalog::OTHER).then(|| format!("custom {i}"));
        let ev = make_event(&events, category, code, label, date);
        events.push(ev);
    }

    let p = PathwayRecord {
        subject_id: subject_id.into(),
        onset,
        consent,
        admission,
        events,
        version: 1,
    };
    debug_assert!(crate::model::validate(&p).is_empty());
    p
}

pub fn random_cohort<R: Rng + ?Sized>(
    rng: &mut R,
    size: usize,
    cfg: &GenConfig,
) -> Vec<PathwayRecord> {
    (0..size)
        .map(|i| random_pathway(rng, format!("P{i:04}"), cfg))
        .collect()
}

/// Returns a copy of a valid `p` that violates exactly `rule`.
pub fn seed_defect<R: Rng + ?Sized>(
    rng: &mut R,
    p: &PathwayRecord,
    rule: RuleCode,
) -> PathwayRecord {
    let mut q = p.clone();
    let in_range = |rng: &mut R, q: &PathwayRecord| random_date_in(rng, q.onset, q.admission);
    match rule {
        RuleCode::EmptySubject => {
            q.subject_id = [" ", "", "\t", "   "].choose(rng).unwrap().to_string();
        }
        RuleCode::IllegalSubjectChars => {
            let bad = *[',', '\n', '\r'].choose(rng).unwrap();
            let at = rng.random_range(0..=q.subject_id.len());
            let at = (0..=at)
                .rev()
                .find(|&i| q.subject_id.is_char_boundary(i))
                .unwrap();
            q.subject_id.insert(at, bad);
        }
        RuleCode::AnchorOrder => {
            if rng.random_bool(0.5) {
                q.consent = q.admission + Duration::days(rng.random_range(1..30));
            } else {
                q.consent = q.onset - Duration::days(rng.random_range(1..30));
            }
        }
        RuleCode::EventOutOfRange => {
            if q.events.is_empty() {
                let date = in_range(rng, &q);
                let ev = make_event(&q.events, NodeCategory::Clinical, "ED", None, date);
                q.events.push(ev);
            }
            let idx = rng.random_range(0..q.events.len());
            q.events[idx].date = if rng.random_bool(0.5) {
                q.admission + Duration::days(rng.random_range(1..400))
            } else {
                q.onset - Duration::days(rng.random_range(1..400))
            };
            q.events[idx].order = 0;
        }
        RuleCode::DuplicateAp => {
            let extra = if q.ap_event().is_some() { 1 } else { 2 };
            for _ in 0..extra {
                let date = in_range(rng, &q);
                let ev = make_event(&q.events, NodeCategory::Key, catalog::AP, None, date);
                q.events.push(ev);
            }
        }
        RuleCode::DuplicateDateOrder => {
            if q.events.is_empty() {
                let date = in_range(rng, &q);
                q.events.push(make_event(
                    &q.events,
                    NodeCategory::Community,
                    "Family",
                    None,
                    date,
                ));
            }
            let target = q.events.choose(rng).unwrap().clone();
            let mut ev = make_event(
                &q.events,
                NodeCategory::Community,
                "Police",
                None,
                target.date,
            );
            ev.order = target.order;
            q.events.push(ev);
        }
        RuleCode::MissingCustomLabel => {
            let others: Vec<usize> = (0..q.events.len())
                .filter(|&i| q.events[i].code == catalog::OTHER)
                .collect();
            let plain: Vec<usize> = (0..q.events.len())
                .filter(|&i| q.events[i].code != catalog::OTHER)
                .collect();
            match rng.random_range(0..3) {
                0 if !others.is_empty() => {
                    q.events[*others.choose(rng).unwrap()].custom_label = None;
                }
                1 if !plain.is_empty() => {
                    q.events[*plain.choose(rng).unwrap()].custom_label = Some("stray".into());
                }
                _ => {
                    let date = in_range(rng, &q);
                    let category = *[NodeCategory::Community, NodeCategory::Clinical]
                        .choose(rng)
                        .unwrap();
                    let label = [None, Some(String::new()), Some("  ".to_string())]
                        .choose(rng)
                        .unwrap()
                        .clone();
                    q.events
                        .push(make_event(&q.events, category, catalog::OTHER, label, date));
                }
            }
        }
        RuleCode::UnknownNode => {
            let date = in_range(rng, &q);
            let (category, code) = *[
                (NodeCategory::Community, "ZZZ"),
                (NodeCategory::Clinical, "Family"),
                (NodeCategory::Key, "ED"),
                (NodeCategory::Anchor, catalog::ONSET),
                (NodeCategory::Community, "ap"),
            ]
            .choose(rng)
            .unwrap();
            q.events
                .push(make_event(&q.events, category, code, None, date));
        }
    }
    q
}
