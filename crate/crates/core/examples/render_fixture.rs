//! Prints the fixture graph as DOT, or as JSON with `--json`.
use ptc_core::analytics::{build_cohort_graph, render_dot, render_graph_json};

fn main() {
    let g = build_cohort_graph(&[ptc_core::fixture::example123()]);
    if std::env::args().any(|a| a == "--json") {
        print!("{}", render_graph_json(&g));
    } else {
        print!("{}", render_dot(&g));
    }
}
