//! Directed cohort network: every pathway walks Onset, its encounters in
//! order, then the STEP enrollment terminal.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::delays::encounters;
use crate::exec::{map_ordered, Execution};
use crate::model::catalog::{self, NodeCategory};
use crate::model::PathwayRecord;

pub const STEP: &str = "STEP";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeKey {
    pub category: NodeCategory,
    pub code: String,
}

impl NodeKey {
    pub fn new(category: NodeCategory, code: impl Into<String>) -> Self {
        NodeKey {
            category,
            code: code.into(),
        }
    }

    pub fn onset() -> Self {
        NodeKey::new(NodeCategory::Anchor, catalog::ONSET)
    }

    pub fn step() -> Self {
        NodeKey::new(NodeCategory::Anchor, STEP)
    }

    /// Rendered identifier. The clinical `Other` node gets its own id so it
    /// does not merge with the community one.
    pub fn id(&self) -> String {
        if self.category == NodeCategory::Clinical && self.code == catalog::OTHER {
            "OtherClinical".to_string()
        } else {
            self.code.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CohortGraph {
    pub nodes: BTreeMap<NodeKey, u64>,
    pub edges: BTreeMap<(NodeKey, NodeKey), u64>,
}

impl CohortGraph {
    pub fn node_count(&self, key: &NodeKey) -> u64 {
        self.nodes.get(key).copied().unwrap_or(0)
    }

    pub fn edge_count(&self, from: &NodeKey, to: &NodeKey) -> u64 {
        self.edges
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_edge_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    /// Nodes sorted by rendered id.
    pub fn sorted_nodes(&self) -> Vec<(&NodeKey, u64)> {
        let mut nodes: Vec<_> = self.nodes.iter().map(|(k, &c)| (k, c)).collect();
        nodes.sort_by_cached_key(|(k, _)| k.id());
        nodes
    }

    /// Edges sorted by rendered (from, to) ids.
    pub fn sorted_edges(&self) -> Vec<(&NodeKey, &NodeKey, u64)> {
        let mut edges: Vec<_> = self.edges.iter().map(|((a, b), &c)| (a, b, c)).collect();
        edges.sort_by_cached_key(|(a, b, _)| (a.id(), b.id()));
        edges
    }

    fn add_walk(&mut self, walk: &[NodeKey]) {
        for key in walk {
            *self.nodes.entry(key.clone()).or_insert(0) += 1;
        }
        for pair in walk.windows(2) {
            *self
                .edges
                .entry((pair[0].clone(), pair[1].clone()))
                .or_insert(0) += 1;
        }
    }
}

/// Onset, encounters, STEP. AP and Consent are not on the walk.
pub fn pathway_walk(p: &PathwayRecord) -> Vec<NodeKey> {
    let mut walk = vec![NodeKey::onset()];
    walk.extend(
        encounters(p)
            .into_iter()
            .map(|e| NodeKey::new(e.event.category, e.event.code.clone())),
    );
    walk.push(NodeKey::step());
    walk
}

pub fn build_cohort_graph(cohort: &[PathwayRecord]) -> CohortGraph {
    build_cohort_graph_with(cohort, Execution::default())
}

pub fn build_cohort_graph_with(cohort: &[PathwayRecord], exec: Execution) -> CohortGraph {
    let walks = map_ordered(cohort, exec, pathway_walk);
    let mut graph = CohortGraph::default();
    for walk in &walks {
        graph.add_walk(walk);
    }
    graph
}

fn quote(id: &str) -> String {
    format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz DOT text. Node `width` and edge `penwidth` scale with counts
/// relative to the largest; raw counts ride along as `count` / `weight`.
pub fn render_dot(g: &CohortGraph) -> String {
    const MAX_WIDTH: f64 = 2.0;
    const MAX_PENWIDTH: f64 = 8.0;

    let max_node = g.nodes.values().copied().max().unwrap_or(1) as f64;
    let max_edge = g.edges.values().copied().max().unwrap_or(1) as f64;
    let node_line = |key: &NodeKey, count: u64| {
        let shape = if key.category == NodeCategory::Anchor {
            ", shape=box"
        } else {
            ""
        };
        format!(
            "{} [label={}{}, width={:.3}, count={}];",
            quote(&key.id()),
            quote(&key.code),
            shape,
            MAX_WIDTH * count as f64 / max_node,
            count
        )
    };

    let mut out = String::new();
    out.push_str("digraph ptc {\n");
    out.push_str("    rankdir=LR;\n");
    out.push_str("    node [shape=circle, fixedsize=true];\n");

    let nodes = g.sorted_nodes();
    for (category, cluster) in [
        (NodeCategory::Clinical, "clinical"),
        (NodeCategory::Community, "community"),
    ] {
        let members: Vec<_> = nodes
            .iter()
            .filter(|(k, _)| k.category == category)
            .collect();
        if members.is_empty() {
            continue;
        }
        let _ = writeln!(out, "    subgraph cluster_{cluster} {{");
        let _ = writeln!(out, "        label={};", quote(cluster));
        for (key, count) in members {
            let _ = writeln!(out, "        {}", node_line(key, *count));
        }
        out.push_str("    }\n");
    }
    for (key, count) in nodes
        .iter()
        .filter(|(k, _)| !matches!(k.category, NodeCategory::Clinical | NodeCategory::Community))
    {
        let _ = writeln!(out, "    {}", node_line(key, *count));
    }
    for (from, to, count) in g.sorted_edges() {
        let _ = writeln!(
            out,
            "    {} -> {} [penwidth={:.2}, weight={}];",
            quote(&from.id()),
            quote(&to.id()),
            MAX_PENWIDTH * count as f64 / max_edge,
            count
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct GraphDocNode {
    id: String,
    category: NodeCategory,
    code: String,
    count: u64,
}

#[derive(Serialize)]
struct GraphDocEdge {
    from: String,
    to: String,
    count: u64,
}

#[derive(Serialize)]
struct GraphDoc {
    nodes: Vec<GraphDocNode>,
    edges: Vec<GraphDocEdge>,
}

/// Structured JSON form of the graph, sorted like [`render_dot`].
pub fn render_graph_json(g: &CohortGraph) -> String {
    let doc = GraphDoc {
        nodes: g
            .sorted_nodes()
            .into_iter()
            .map(|(k, count)| GraphDocNode {
                id: k.id(),
                category: k.category,
                code: k.code.clone(),
                count,
            })
            .collect(),
        edges: g
            .sorted_edges()
            .into_iter()
            .map(|(a, b, count)| GraphDocEdge {
                from: a.id(),
                to: b.id(),
                count,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("graph serialize");
    text.push('\n');
    text
}
