//! Delay measures, cohort statistics and the cohort network graph.

mod delays;
mod graph;
mod stats;

use crate::model::Violation;

pub use delays::{
    dup_days, encounters, epoch_at, help_seeking_delay_days, marginal_delays, total_pathway_days,
    DelayAttribution, Encounter, Epoch,
};
pub use graph::{
    build_cohort_graph, build_cohort_graph_with, pathway_walk, render_dot, render_graph_json,
    CohortGraph, NodeKey, STEP,
};
pub use stats::{
    cohort_stats, cohort_stats_with, median, percent, percent_tenths, stats_document,
    stats_table_csv, CohortStats, CohortTotals, NodeStats, STATS_CSV_HEADER,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("subject id `{0}` appears more than once in the cohort")]
    DuplicateSubjectId(String),
    #[error("pathway `{subject_id}` is not valid ({} violations)", .violations.len())]
    InvalidPathway {
        subject_id: String,
        violations: Vec<Violation>,
    },
}
