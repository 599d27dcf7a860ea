//! Rendering of solver results.

use std::fmt::Write as _;
use std::time::Duration;

use bnsl_core::{Incumbent, Instance, Solution, Status};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Dot,
    Csv,
}

fn status_word(status: Status) -> &'static str {
    match status {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Interrupted => "interrupted",
    }
}

fn parent_names(instance: &Instance, network: &Incumbent, v: usize) -> Vec<String> {
    network
        .parent_set(instance, v)
        .iter()
        .map(|p| instance.name(p).to_string())
        .collect()
}

/// The learned network in the requested format. The reported cost is
/// recomputed from the emitted parent sets.
pub fn render(instance: &Instance, solution: &Solution, format: Format) -> String {
    let mut out = String::new();
    let Some(network) = &solution.incumbent else {
        if format == Format::Text {
            let _ = writeln!(out, "status {}", status_word(solution.status));
        }
        return out;
    };
    match format {
        Format::Text => {
            let _ = writeln!(out, "status {}", status_word(solution.status));
            let _ = writeln!(out, "cost {}", instance.network_cost(&network.parents));
            let _ = writeln!(
                out,
                "score {}",
                instance.network_raw_score(&network.parents)
            );
            for v in 0..instance.n() {
                let _ = writeln!(
                    out,
                    "{} <- {{{}}}",
                    instance.name(v),
                    parent_names(instance, network, v).join(", ")
                );
            }
        }
        Format::Dot => {
            out.push_str("digraph network {\n");
            for v in 0..instance.n() {
                let _ = writeln!(out, "  {:?};", instance.name(v));
            }
            for v in 0..instance.n() {
                for p in parent_names(instance, network, v) {
                    let _ = writeln!(out, "  {:?} -> {:?};", p, instance.name(v));
                }
            }
            out.push_str("}\n");
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let _ = w.write_record(["variable", "parents", "score"]);
            for v in 0..instance.n() {
                let value = instance.value(v, network.parents[v]);
                let _ = w.write_record([
                    instance.name(v).to_string(),
                    parent_names(instance, network, v).join(" "),
                    value.raw.to_string(),
                ]);
            }
            let bytes = w.into_inner().unwrap_or_default();
            out.push_str(&String::from_utf8_lossy(&bytes));
        }
    }
    out
}

/// Flat run statistics.
#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub status: &'static str,
    pub cost: Option<f64>,
    pub root_bound: Option<f64>,
    pub nodes: u64,
    pub bound_calls: u64,
    pub clusters_generated: u64,
    pub clusters_kept: u64,
    pub clusters_evicted: u64,
    pub support_hit_rate: f64,
    pub domain_visit_fraction: f64,
    pub gac_prunings: u64,
    pub cache_hits: u64,
    pub incumbent_updates: u64,
    pub wall_time_s: f64,
}

impl RunStats {
    pub fn new(instance: &Instance, solution: &Solution, wall: Duration) -> Self {
        let s = &solution.stats;
        Self {
            status: status_word(solution.status),
            cost: solution
                .incumbent
                .as_ref()
                .map(|inc| instance.network_cost(&inc.parents)),
            root_bound: s.root_bound.filter(|b| b.is_finite()),
            nodes: s.nodes,
            bound_calls: s.bound_calls,
            clusters_generated: s.clusters_generated,
            clusters_kept: s.clusters_kept,
            clusters_evicted: s.clusters_evicted,
            support_hit_rate: s.dual.support_hit_rate(),
            domain_visit_fraction: s.dual.visit_fraction(),
            gac_prunings: s.gac_prunings,
            cache_hits: s.cache_hits,
            incumbent_updates: s.incumbent_updates,
            wall_time_s: wall.as_secs_f64(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bnsl_core::fixtures::running_example;
    use bnsl_core::{solve, SolverConfig};

    #[test]
    fn running_example_reports() {
        let inst = running_example();
        let sol = solve(&inst, &SolverConfig::default());
        let text = render(&inst, &sol, Format::Text);
        assert_eq!(
            text,
            "status optimal\ncost 10\nscore 10\n0 <- {2}\n1 <- {2, 4}\n2 <- {}\n3 <- {0}\n4 <- {2, 3}\n"
        );
        let dot = render(&inst, &sol, Format::Dot);
        assert!(dot.starts_with("digraph network {\n"));
        assert_eq!(dot.matches("->").count(), 6);
        assert!(dot.contains("  \"2\" -> \"0\";\n"));
        let csv = render(&inst, &sol, Format::Csv);
        assert_eq!(
            csv,
            "variable,parents,score\n0,2,0\n1,2 4,0\n2,,10\n3,0,0\n4,2 3,0\n"
        );
    }

    #[test]
    fn stats_are_flat_json() {
        let inst = running_example();
        let sol = solve(&inst, &SolverConfig::default());
        let stats = RunStats::new(&inst, &sol, Duration::from_millis(3));
        let value: serde_json::Value = serde_json::from_str(&stats.to_json()).unwrap();
        let obj = value.as_object().unwrap();
        assert!(obj.values().all(|v| !v.is_object() && !v.is_array()));
        assert_eq!(obj["root_bound"], 10.0);
        assert_eq!(obj["cost"], 10.0);
        assert_eq!(obj["nodes"], 1);
        assert_eq!(obj["clusters_generated"], 2);
        assert_eq!(obj["status"], "optimal");
    }
}
