//! Reference implementations that share nothing with the engine beyond the
//! record types: a hand-rolled proleptic Gregorian day count, a column walk
//! over the raw two-row export, and naive cohort aggregation.

use std::collections::HashMap;

use ptc_core::{NodeCategory, PathwayRecord};

const MONTH_DAYS: [i64; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

fn is_leap(y: i64) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

/// Days since 1900-01-01, by stepping whole years then whole months.
pub fn day_number(y: i64, m: u32, d: u32) -> i64 {
    assert!(y >= 1900);
    let mut n = 0;
    for year in 1900..y {
        n += if is_leap(year) { 366 } else { 365 };
    }
    for month in 1..m {
        n += MONTH_DAYS[month as usize - 1];
        if month == 2 && is_leap(y) {
            n += 1;
        }
    }
    n + d as i64 - 1
}

pub fn chrono_day(date: chrono::NaiveDate) -> i64 {
    use chrono::Datelike;
    day_number(date.year() as i64, date.month(), date.day())
}

/// MM/DD/YY with 70..99 in the 1900s and 00..69 in the 2000s.
fn wire_day(text: &str) -> i64 {
    let parts: Vec<i64> = text.split('/').map(|p| p.parse().unwrap()).collect();
    let year = if parts[2] >= 70 {
        1900 + parts[2]
    } else {
        2000 + parts[2]
    };
    day_number(year, parts[0] as u32, parts[1] as u32)
}

pub struct ExportFacts {
    pub total: i64,
    pub dup: Option<i64>,
    pub help_seeking: Option<i64>,
    /// (code, demand?, days) per encounter.
    pub marginal: Vec<(String, bool, i64)>,
}

/// Reads the delay measures straight off the export columns.
pub fn facts_from_export(text: &str) -> ExportFacts {
    let mut lines = text.lines();
    let codes: Vec<&str> = lines.next().unwrap().split(',').skip(1).collect();
    let days: Vec<i64> = lines
        .next()
        .unwrap()
        .split(',')
        .skip(1)
        .map(wire_day)
        .collect();
    let onset = days[0];
    let admission = days[codes.len() - 1];
    let ap_col = codes.iter().position(|c| *c == "AP");
    let encounter_cols: Vec<usize> = (0..codes.len())
        .filter(|&i| !matches!(codes[i], "Onset" | "AP" | "Consent" | "Admission"))
        .collect();
    let marginal = encounter_cols
        .iter()
        .enumerate()
        .map(|(k, &col)| {
            let next = encounter_cols.get(k + 1).map_or(admission, |&c| days[c]);
            let demand = ap_col.is_none_or(|ap| col < ap);
            (codes[col].to_string(), demand, next - days[col])
        })
        .collect();
    ExportFacts {
        total: admission - onset,
        dup: ap_col.map(|c| days[c] - onset),
        help_seeking: encounter_cols.first().map(|&c| days[c] - onset),
        marginal,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub category: &'static str,
    pub code: String,
    pub total: u64,
    pub pct_all: f64,
    pub unique: u64,
    pub pct_participants: f64,
    pub demand: Vec<i64>,
    pub supply: Vec<i64>,
}

fn category_name(c: NodeCategory) -> &'static str {
    match c {
        NodeCategory::Community => "community",
        NodeCategory::Clinical => "clinical",
        NodeCategory::Key => "key",
        NodeCategory::Anchor => "anchor",
    }
}

fn is_encounter(category: NodeCategory) -> bool {
    matches!(category, NodeCategory::Community | NodeCategory::Clinical)
}

/// Half-up to one decimal.
pub fn round_pct(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        return 0.0;
    }
    (1000.0 * part as f64 / whole as f64 + 0.5).floor() / 10.0
}

pub fn median_of(values: &[i64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort();
    match v.len() {
        0 => None,
        n if n % 2 == 1 => Some(v[n / 2] as f64),
        n => Some((v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0),
    }
}

/// (category, code, demand?, days) for every encounter of `p`.
fn attributions(p: &PathwayRecord) -> Vec<(NodeCategory, String, bool, i64)> {
    let mut events: Vec<_> = p.events.iter().collect();
    events.sort_by_key(|e| (e.date, e.order));
    let ap = events
        .iter()
        .position(|e| e.code == "AP" && e.category == NodeCategory::Key);
    let enc: Vec<usize> = (0..events.len())
        .filter(|&i| is_encounter(events[i].category))
        .collect();
    let admission = chrono_day(p.admission);
    enc.iter()
        .enumerate()
        .map(|(k, &i)| {
            let next = enc
                .get(k + 1)
                .map_or(admission, |&j| chrono_day(events[j].date));
            let e = events[i];
            let demand = ap.is_none_or(|a| i < a);
            (
                e.category,
                e.code.clone(),
                demand,
                next - chrono_day(e.date),
            )
        })
        .collect()
}

pub struct NaiveStats {
    pub rows: Vec<Row>,
    pub participants: u64,
    pub encounters: u64,
    pub demand: u64,
    pub supply: u64,
}

pub fn naive_stats(cohort: &[PathwayRecord]) -> NaiveStats {
    let mut rows: Vec<Row> = Vec::new();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut encounters = 0;
    let (mut demand, mut supply) = (0, 0);
    for (pi, p) in cohort.iter().enumerate() {
        for (category, code, is_demand, days) in attributions(p) {
            encounters += 1;
            let cat = category_name(category);
            let idx = match rows
                .iter()
                .position(|r| r.category == cat && r.code == code)
            {
                Some(i) => i,
                None => {
                    rows.push(Row {
                        category: cat,
                        code,
                        total: 0,
                        pct_all: 0.0,
                        unique: 0,
                        pct_participants: 0.0,
                        demand: vec![],
                        supply: vec![],
                    });
                    seen.push(vec![]);
                    rows.len() - 1
                }
            };
            rows[idx].total += 1;
            if !seen[idx].contains(&pi) {
                seen[idx].push(pi);
                rows[idx].unique += 1;
            }
            if is_demand {
                demand += 1;
                rows[idx].demand.push(days);
            } else {
                supply += 1;
                rows[idx].supply.push(days);
            }
        }
    }
    let participants = cohort.len() as u64;
    for r in &mut rows {
        r.pct_all = round_pct(r.total, encounters);
        r.pct_participants = round_pct(r.unique, participants);
    }
    let block = |c: &str| if c == "community" { 0 } else { 1 };
    rows.sort_by(|a, b| {
        block(a.category)
            .cmp(&block(b.category))
            .then(b.total.cmp(&a.total))
            .then(a.code.cmp(&b.code))
    });
    NaiveStats {
        rows,
        participants,
        encounters,
        demand,
        supply,
    }
}

/// Node and edge counts keyed by "category/code".
pub fn naive_graph(
    cohort: &[PathwayRecord],
) -> (HashMap<String, u64>, HashMap<(String, String), u64>) {
    let mut nodes = HashMap::new();
    let mut edges = HashMap::new();
    for p in cohort {
        let mut events: Vec<_> = p.events.iter().collect();
        events.sort_by_key(|e| (e.date, e.order));
        let mut walk = vec!["anchor/Onset".to_string()];
        for e in events {
            if is_encounter(e.category) {
                walk.push(format!("{}/{}", category_name(e.category), e.code));
            }
        }
        walk.push("anchor/STEP".to_string());
        for w in &walk {
            *nodes.entry(w.clone()).or_insert(0) += 1;
        }
        for i in 1..walk.len() {
            *edges
                .entry((walk[i - 1].clone(), walk[i].clone()))
                .or_insert(0) += 1;
        }
    }
    (nodes, edges)
}
