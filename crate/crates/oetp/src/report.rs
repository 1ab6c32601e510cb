//! Machine-readable run reports and search-event logs.
//!
//! The report deliberately carries no wall-clock timing: repeated runs with
//! the same inputs and seeds must produce byte-identical files. Timing goes
//! to standard output, and the optional event log (CSV) is the one artifact
//! allowed to differ between runs.

use oetp_core::solver::{BoundMethod, EventKind, SearchEvent};
use oetp_core::{Instance, SolveReport};
use serde::Serialize;

#[derive(Serialize)]
pub struct InstanceSummary {
    pub candidates: usize,
    pub schedules: usize,
    pub resources: usize,
}

#[derive(Serialize)]
pub struct PoolSummary {
    pub kept_schedules: usize,
    pub used_by_incumbent: usize,
    pub extra_requested: usize,
}

#[derive(Serialize)]
pub struct BoundSummary {
    pub method: &'static str,
    pub upper_bound: f64,
    pub integer_bound: u32,
    pub iterations: u32,
    pub multipliers: Vec<f64>,
}

#[derive(Serialize)]
pub struct SolverSummary {
    pub value: u32,
    /// Optimality is relative to the instance the solver saw; with a pool
    /// restriction that is the restricted instance.
    pub proven_optimal: bool,
    pub termination: String,
    pub nodes_explored: u64,
    pub bound: BoundSummary,
}

/// Everything a run wants to persist about itself.
#[derive(Serialize)]
pub struct RunReport {
    pub instance: InstanceSummary,
    pub greedy_value: u32,
    pub local_search_value: Option<u32>,
    pub pool: Option<PoolSummary>,
    pub solver: SolverSummary,
}

fn method_name(method: BoundMethod) -> &'static str {
    match method {
        BoundMethod::Lagrangian => "lagrangian",
        BoundMethod::CompatCount => "compat-count",
    }
}

impl RunReport {
    pub fn new(
        instance: &Instance,
        greedy_value: u32,
        local_search_value: Option<u32>,
        pool: Option<PoolSummary>,
        report: &SolveReport,
    ) -> Self {
        RunReport {
            instance: InstanceSummary {
                candidates: instance.num_candidates(),
                schedules: instance.num_schedules(),
                resources: instance.num_resources(),
            },
            greedy_value,
            local_search_value,
            pool,
            solver: SolverSummary {
                value: report.incumbent.value(),
                proven_optimal: report.proven_optimal,
                termination: report.termination.to_string(),
                nodes_explored: report.nodes_explored,
                bound: BoundSummary {
                    method: method_name(report.bound.method),
                    upper_bound: report.bound.upper_bound,
                    integer_bound: report.bound.integer_bound,
                    iterations: report.bound.iterations,
                    multipliers: report.bound.multipliers.clone(),
                },
            },
        }
    }

    /// Pretty JSON with a trailing newline; deterministic.
    pub fn render(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }
}

fn kind_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::RootBound => "root-bound",
        EventKind::Incumbent => "incumbent",
        EventKind::Progress => "progress",
        EventKind::Terminated => "terminated",
    }
}

/// Search trace as CSV, one row per event.
pub fn events_csv(events: &[SearchEvent]) -> String {
    let mut out = String::from("event,nodes_explored,best_bound,incumbent_value,elapsed_secs\n");
    for event in events {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            kind_name(event.kind),
            event.nodes_explored,
            event.best_bound,
            event.incumbent_value,
            event.elapsed_secs,
        ));
    }
    out
}
