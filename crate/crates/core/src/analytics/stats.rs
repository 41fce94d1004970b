//! Cohort encounter-frequency and marginal-delay statistics.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::delays::{marginal_delays, DelayAttribution, Epoch};
use super::AnalyticsError;
use crate::exec::{map_ordered, Execution};
use crate::model::{validate, NodeCategory, PathwayRecord};

/// One row of the per-node table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub category: NodeCategory,
    pub code: String,
    pub total_encounters: u64,
    pub pct_of_all_encounters: f64,
    pub unique_participants: u64,
    pub pct_of_participants: f64,
    pub demand_count: u64,
    pub demand_median_days: Option<f64>,
    pub demand_min_days: Option<i64>,
    pub demand_max_days: Option<i64>,
    pub supply_count: u64,
    pub supply_median_days: Option<f64>,
    pub supply_min_days: Option<i64>,
    pub supply_max_days: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortTotals {
    pub participants: u64,
    pub encounters: u64,
    pub community_encounters: u64,
    pub clinical_encounters: u64,
    pub demand_encounters: u64,
    pub supply_encounters: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    pub rows: Vec<NodeStats>,
    pub totals: CohortTotals,
}

impl CohortStats {
    pub fn row(&self, category: NodeCategory, code: &str) -> Option<&NodeStats> {
        self.rows
            .iter()
            .find(|r| r.category == category && r.code == code)
    }
}

/// `part / whole` as a percentage in tenths, rounded half up.
pub fn percent_tenths(part: u64, whole: u64) -> u64 {
    if whole == 0 {
        return 0;
    }
    (2000 * part + whole) / (2 * whole)
}

/// Percentage rounded to one decimal place.
pub fn percent(part: u64, whole: u64) -> f64 {
    percent_tenths(part, whole) as f64 / 10.0
}

/// Median of the values; mean of the middle two for even counts.
pub fn median(values: &[i64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
    })
}

#[derive(Default)]
struct Acc {
    participants: HashSet<usize>,
    demand: Vec<i64>,
    supply: Vec<i64>,
}

fn check_cohort(cohort: &[PathwayRecord]) -> Result<(), AnalyticsError> {
    let mut ids = HashSet::new();
    for p in cohort {
        if !ids.insert(p.subject_id.as_str()) {
            return Err(AnalyticsError::DuplicateSubjectId(p.subject_id.clone()));
        }
    }
    for p in cohort {
        let violations = validate(p);
        if !violations.is_empty() {
            return Err(AnalyticsError::InvalidPathway {
                subject_id: p.subject_id.clone(),
                violations,
            });
        }
    }
    Ok(())
}

pub fn cohort_stats(cohort: &[PathwayRecord]) -> Result<CohortStats, AnalyticsError> {
    cohort_stats_with(cohort, Execution::default())
}

pub fn cohort_stats_with(
    cohort: &[PathwayRecord],
    exec: Execution,
) -> Result<CohortStats, AnalyticsError> {
    check_cohort(cohort)?;
    let per_pathway: Vec<Vec<DelayAttribution>> = map_ordered(cohort, exec, marginal_delays);

    let mut groups: BTreeMap<(NodeCategory, String), Acc> = BTreeMap::new();
    let mut totals = CohortTotals {
        participants: cohort.len() as u64,
        ..Default::default()
    };
    for (idx, attributions) in per_pathway.into_iter().enumerate() {
        for a in attributions {
            totals.encounters += 1;
            match a.category {
                NodeCategory::Community => totals.community_encounters += 1,
                _ => totals.clinical_encounters += 1,
            }
            let acc = groups.entry((a.category, a.code)).or_default();
            acc.participants.insert(idx);
            match a.epoch {
                Epoch::Demand => {
                    totals.demand_encounters += 1;
                    acc.demand.push(a.days);
                }
                Epoch::Supply => {
                    totals.supply_encounters += 1;
                    acc.supply.push(a.days);
                }
            }
        }
    }

    let mut rows: Vec<NodeStats> = groups
        .into_iter()
        .map(|((category, code), acc)| {
            let total = (acc.demand.len() + acc.supply.len()) as u64;
            let unique = acc.participants.len() as u64;
            NodeStats {
                category,
                code,
                total_encounters: total,
                pct_of_all_encounters: percent(total, totals.encounters),
                unique_participants: unique,
                pct_of_participants: percent(unique, totals.participants),
                demand_count: acc.demand.len() as u64,
                demand_median_days: median(&acc.demand),
                demand_min_days: acc.demand.iter().copied().min(),
                demand_max_days: acc.demand.iter().copied().max(),
                supply_count: acc.supply.len() as u64,
                supply_median_days: median(&acc.supply),
                supply_min_days: acc.supply.iter().copied().min(),
                supply_max_days: acc.supply.iter().copied().max(),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.category
            .cmp(&b.category)
            .then(b.total_encounters.cmp(&a.total_encounters))
            .then_with(|| a.code.cmp(&b.code))
    });
    Ok(CohortStats { rows, totals })
}

pub const STATS_CSV_HEADER: &str = "category,node,total_encounters,pct_of_all_encounters,\
unique_participants,pct_of_participants,demand_count,demand_median_days,demand_min_days,\
demand_max_days,supply_count,supply_median_days,supply_min_days,supply_max_days";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Flat CSV table, one row per node, header first.
pub fn stats_table_csv(stats: &CohortStats) -> String {
    let mut out = String::from(STATS_CSV_HEADER);
    out.push('\n');
    for r in &stats.rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.1},{},{:.1},{},{},{},{},{},{},{},{}",
            r.category,
            r.code,
            r.total_encounters,
            r.pct_of_all_encounters,
            r.unique_participants,
            r.pct_of_participants,
            r.demand_count,
            opt(r.demand_median_days),
            opt(r.demand_min_days),
            opt(r.demand_max_days),
            r.supply_count,
            opt(r.supply_median_days),
            opt(r.supply_min_days),
            opt(r.supply_max_days),
        );
    }
    out
}

/// Pretty JSON document of the whole result.
pub fn stats_document(stats: &CohortStats) -> String {
    let mut text = serde_json::to_string_pretty(stats).expect("stats serialize");
    text.push('\n');
    text
}
