//! Warm-startable best-first branch-and-bound.
//!
//! Nodes fix a growing prefix of candidate decisions; the open set is a
//! max-heap keyed by a Lagrangian upper bound on each node's best completion
//! (ties prefer deeper nodes, then earlier insertion). Branching picks the
//! unfixed candidate with the fewest feasible schedules and creates one
//! child per feasible schedule, ordered by descending reduced profit under
//! the node's multipliers, plus an "unassigned" child last. Children inherit
//! their parent's multipliers as the starting point for a short subgradient
//! refinement, whose repaired primal solutions also drive the incumbent.

use alloc::boxed::Box;
use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::model::{CandidateId, Instance, ModelError, ScheduleId, Solution, SolutionViolation};
use crate::solver::bound::{
    fits_residual, subgradient_descent, BoundCertificate, BoundMethod, StepRule, Subproblem,
};
use crate::solver::{integer_bound_of, Clock};

/// Search limits. `None` means unlimited.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Limits {
    pub time_limit_secs: Option<f64>,
    pub node_limit: Option<u64>,
}

/// Tunable parameters of [`branch_and_bound`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub limits: Limits,
    pub step: StepRule,
    /// Subgradient steps for the root bound.
    pub root_iterations: u32,
    /// Subgradient steps for each child node refinement.
    pub node_iterations: u32,
    /// Record [`SearchEvent`]s in the report.
    pub log_events: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            limits: Limits::default(),
            step: StepRule::default(),
            root_iterations: 200,
            node_iterations: 30,
            log_events: false,
        }
    }
}

/// Why the search stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Optimal,
    TimeLimit,
    NodeLimit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Optimal => write!(f, "optimal"),
            Termination::TimeLimit => write!(f, "time-limit"),
            Termination::NodeLimit => write!(f, "node-limit"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    RootBound,
    Incumbent,
    Progress,
    Terminated,
}

/// One entry of the search trace.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchEvent {
    pub kind: EventKind,
    pub nodes_explored: u64,
    /// Best proven upper bound on the optimum at this point.
    pub best_bound: f64,
    pub incumbent_value: u32,
    pub elapsed_secs: f64,
}

/// Outcome of a branch-and-bound run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub incumbent: Solution,
    /// Root bound certificate (the search may have proven more than it).
    pub bound: BoundCertificate,
    pub proven_optimal: bool,
    pub nodes_explored: u64,
    pub wall_time_secs: f64,
    pub termination: Termination,
    /// Populated only when [`SolveConfig::log_events`] is set.
    pub events: Vec<SearchEvent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveError {
    /// Warm-start assignment length differs from the candidate count.
    WarmStartLength { expected: usize, actual: usize },
    /// The warm start breaks compatibility or capacity constraints.
    InfeasibleWarmStart { violations: Vec<SolutionViolation> },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::WarmStartLength { expected, actual } => write!(
                f,
                "warm start has {actual} entries, instance has {expected} candidates"
            ),
            SolveError::InfeasibleWarmStart { violations } => {
                write!(
                    f,
                    "warm start is infeasible ({} violations)",
                    violations.len()
                )
            }
        }
    }
}

impl core::error::Error for SolveError {}

struct ArenaNode {
    parent: Option<u32>,
    /// Decision taken at this node; `None` only at the root.
    decision: Option<(CandidateId, Option<ScheduleId>)>,
}

struct OpenNode {
    bound: f64,
    depth: u32,
    seq: u64,
    arena: u32,
    fixed_value: u32,
    multipliers: Box<[f64]>,
    residual: Box<[i64]>,
}

impl Ord for OpenNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| self.depth.cmp(&other.depth))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

struct Search<'a> {
    instance: &'a Instance,
    config: &'a SolveConfig,
    clock: &'a dyn Clock,
    incumbent: Solution,
    heap: BinaryHeap<OpenNode>,
    arena: Vec<ArenaNode>,
    seq: u64,
    nodes_explored: u64,
    events: Vec<SearchEvent>,
    /// Per-candidate fixed decision of the node being expanded; `None` means
    /// the candidate is still free.
    fixed: Vec<Option<Option<ScheduleId>>>,
    free_scratch: Vec<u32>,
}

impl<'a> Search<'a> {
    fn emit(&mut self, kind: EventKind, best_bound: f64) {
        if !self.config.log_events {
            return;
        }
        self.events.push(SearchEvent {
            kind,
            nodes_explored: self.nodes_explored,
            best_bound,
            incumbent_value: self.incumbent.value(),
            elapsed_secs: self.clock.elapsed_secs(),
        });
    }

    fn global_bound(&self) -> f64 {
        let top = self
            .heap
            .peek()
            .map(|n| n.bound)
            .unwrap_or(f64::NEG_INFINITY);
        let inc = self.incumbent.value() as f64;
        if top > inc {
            top
        } else {
            inc
        }
    }

    /// Builds the full solution implied by the current fixed map, one extra
    /// decision and a repaired sub-assignment, and installs it if it beats
    /// the incumbent.
    fn offer_incumbent(
        &mut self,
        extra: Option<(CandidateId, Option<ScheduleId>)>,
        pairs: &[(CandidateId, ScheduleId)],
    ) {
        let mut assignment: Vec<Option<ScheduleId>> =
            self.fixed.iter().map(|d| d.unwrap_or(None)).collect();
        if let Some((c, d)) = extra {
            assignment[c.index()] = d;
        }
        for &(c, j) in pairs {
            assignment[c.index()] = Some(j);
        }
        let candidate = Solution::from_assignment(assignment);
        if candidate.value() > self.incumbent.value() {
            self.incumbent = candidate;
            let bound = self.global_bound();
            self.emit(EventKind::Incumbent, bound);
        }
    }

    fn next_seq(&mut self) -> u64 {
        let s = self.seq;
        self.seq += 1;
        s
    }

    /// Loads `self.fixed` with the decisions on the path to `arena_idx`.
    fn load_fixed(&mut self, arena_idx: u32) {
        for slot in &mut self.fixed {
            *slot = None;
        }
        let mut cursor = Some(arena_idx);
        while let Some(idx) = cursor {
            let node = &self.arena[idx as usize];
            if let Some((c, d)) = node.decision {
                self.fixed[c.index()] = Some(d);
            }
            cursor = node.parent;
        }
    }

    /// Evaluates, refines and possibly enqueues one child of `parent`.
    fn make_child(
        &mut self,
        parent: &OpenNode,
        decision: Option<ScheduleId>,
        branch_candidate: CandidateId,
        quick_bound: f64,
        free_child: &[u32],
    ) {
        if integer_bound_of(quick_bound) <= self.incumbent.value() {
            return;
        }
        let child_fixed_value = parent.fixed_value + decision.is_some() as u32;
        let mut child_residual: Vec<i64> = parent.residual.to_vec();
        if let Some(j) = decision {
            for k in &self.instance.usage[j.index()] {
                child_residual[k.index()] -= 1;
            }
        }

        if free_child.is_empty() {
            // Complete assignment: the child is a leaf.
            self.offer_incumbent(Some((branch_candidate, decision)), &[]);
            return;
        }

        let sub = Subproblem {
            instance: self.instance,
            free: free_child,
            residual: &child_residual,
        };
        let lb_hint = self.incumbent.value().saturating_sub(child_fixed_value);
        let outcome = subgradient_descent(
            &sub,
            &parent.multipliers,
            self.config.node_iterations,
            &self.config.step,
            lb_hint,
            self.clock,
            self.config.limits.time_limit_secs,
        );
        if let Some(repair) = &outcome.best_repair {
            if child_fixed_value + repair.count > self.incumbent.value() {
                let pairs = repair.pairs.clone();
                self.offer_incumbent(Some((branch_candidate, decision)), &pairs);
            }
        }

        let refined = child_fixed_value as f64 + outcome.best_ub;
        let bound = if refined < quick_bound {
            refined
        } else {
            quick_bound
        };
        if integer_bound_of(bound) <= self.incumbent.value() {
            return;
        }

        let arena_idx = self.arena.len() as u32;
        self.arena.push(ArenaNode {
            parent: Some(parent.arena),
            decision: Some((branch_candidate, decision)),
        });
        let seq = self.next_seq();
        self.heap.push(OpenNode {
            bound,
            depth: parent.depth + 1,
            seq,
            arena: arena_idx,
            fixed_value: child_fixed_value,
            multipliers: outcome.multipliers.into_boxed_slice(),
            residual: child_residual.into_boxed_slice(),
        });
    }

    fn expand(&mut self, node: OpenNode) {
        self.load_fixed(node.arena);
        let mut free = core::mem::take(&mut self.free_scratch);
        free.clear();
        free.extend(
            (0..self.instance.num_candidates() as u32)
                .filter(|&i| self.fixed[i as usize].is_none()),
        );

        // One pass at the node's multipliers: Lagrangian value, feasible
        // option counts and the branching candidate (fewest feasible
        // schedules, ties by id).
        let lambda = &node.multipliers;
        let mut l_sub = 0.0f64;
        for (k, &cap) in node.residual.iter().enumerate() {
            l_sub += lambda[k] * cap as f64;
        }
        let mut branch: Option<(usize, u32)> = None;
        for &ci in &free {
            let mut count = 0usize;
            let mut best_profit = 0.0f64;
            for &j in &self.instance.compat[ci as usize] {
                let usage = &self.instance.usage[j.index()];
                if !fits_residual(&node.residual, usage) {
                    continue;
                }
                count += 1;
                let mut profit = 1.0;
                for k in usage {
                    profit -= lambda[k.index()];
                }
                if profit > best_profit {
                    best_profit = profit;
                }
            }
            l_sub += best_profit;
            if count > 0 && branch.is_none_or(|(bc, _)| count < bc) {
                branch = Some((count, ci));
            }
        }

        let Some((_, branch_raw)) = branch else {
            // No free candidate can take any schedule: the node's value is
            // exactly its fixed value.
            self.offer_incumbent(None, &[]);
            self.free_scratch = free;
            return;
        };
        let branch_candidate = CandidateId::new(branch_raw);

        // Reduced profits for the branching candidate's feasible options.
        let mut options: Vec<(f64, ScheduleId)> = Vec::new();
        for &j in &self.instance.compat[branch_raw as usize] {
            let usage = &self.instance.usage[j.index()];
            if !fits_residual(&node.residual, usage) {
                continue;
            }
            let mut profit = 1.0;
            for k in usage {
                profit -= lambda[k.index()];
            }
            options.push((profit, j));
        }
        options.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let c_branch = options
            .first()
            .map(|&(p, _)| if p > 0.0 { p } else { 0.0 })
            .unwrap_or(0.0);

        let b_lambda = node.fixed_value as f64 + l_sub;
        let free_child: Vec<u32> = free.iter().copied().filter(|&i| i != branch_raw).collect();

        for &(profit, j) in &options {
            let quick = b_lambda - c_branch + profit;
            let quick = if quick < node.bound {
                quick
            } else {
                node.bound
            };
            self.make_child(&node, Some(j), branch_candidate, quick, &free_child);
        }
        let quick = b_lambda - c_branch;
        let quick = if quick < node.bound {
            quick
        } else {
            node.bound
        };
        self.make_child(&node, None, branch_candidate, quick, &free_child);

        self.free_scratch = free;
    }
}

/// Exact solve by best-first branch-and-bound with Lagrangian bounds.
///
/// The warm start, when given, must be feasible; it seeds the incumbent,
/// and the final incumbent never falls below it. Without limits the search
/// terminates with `proven_optimal` and the true optimum.
pub fn branch_and_bound(
    instance: &Instance,
    warm_start: Option<&Solution>,
    config: &SolveConfig,
    clock: &dyn Clock,
) -> Result<SolveReport, SolveError> {
    let n = instance.num_candidates();
    let incumbent = match warm_start {
        Some(ws) => {
            let eval = instance.evaluate(ws).map_err(|e| match e {
                ModelError::AssignmentLength { expected, actual } => {
                    SolveError::WarmStartLength { expected, actual }
                }
                ModelError::InfeasibleSolution => unreachable!("evaluate never returns this"),
            })?;
            if !eval.feasible {
                return Err(SolveError::InfeasibleWarmStart {
                    violations: eval.violations,
                });
            }
            ws.clone()
        }
        None => Solution::empty(n),
    };

    // A node limit of zero forbids even the root evaluation; report the
    // structural bound and the warm start unchanged.
    if config.limits.node_limit == Some(0) {
        let compat_count = instance.compat.iter().filter(|l| !l.is_empty()).count() as u32;
        return Ok(SolveReport {
            incumbent,
            bound: BoundCertificate {
                upper_bound: compat_count as f64,
                integer_bound: compat_count,
                method: BoundMethod::CompatCount,
                multipliers: Vec::new(),
                iterations: 0,
            },
            proven_optimal: false,
            nodes_explored: 0,
            wall_time_secs: clock.elapsed_secs(),
            termination: Termination::NodeLimit,
            events: Vec::new(),
        });
    }

    let mut search = Search {
        instance,
        config,
        clock,
        incumbent,
        heap: BinaryHeap::new(),
        arena: Vec::new(),
        seq: 0,
        nodes_explored: 0,
        events: Vec::new(),
        fixed: vec![None; n],
        free_scratch: Vec::new(),
    };

    // Root bound from λ = 0 over the whole instance.
    let free_all: Vec<u32> = (0..n as u32).collect();
    let lambda0 = vec![0.0f64; instance.num_resources()];
    let root = subgradient_descent(
        &Subproblem {
            instance,
            free: &free_all,
            residual: &instance.capacities,
        },
        &lambda0,
        config.root_iterations,
        &config.step,
        search.incumbent.value(),
        clock,
        config.limits.time_limit_secs,
    );
    if let Some(repair) = &root.best_repair {
        if repair.count > search.incumbent.value() {
            search.offer_incumbent(None, &repair.pairs.clone());
        }
    }
    let certificate = BoundCertificate {
        upper_bound: root.best_ub,
        integer_bound: integer_bound_of(root.best_ub),
        method: BoundMethod::Lagrangian,
        multipliers: root.multipliers.clone(),
        iterations: root.iterations,
    };
    search.emit(EventKind::RootBound, root.best_ub);

    search.arena.push(ArenaNode {
        parent: None,
        decision: None,
    });
    if certificate.integer_bound > search.incumbent.value() {
        let seq = search.next_seq();
        search.heap.push(OpenNode {
            bound: root.best_ub,
            depth: 0,
            seq,
            arena: 0,
            fixed_value: 0,
            multipliers: root.multipliers.into_boxed_slice(),
            residual: instance.capacities.clone().into_boxed_slice(),
        });
    }

    let (termination, proven_optimal) = loop {
        let Some(top) = search.heap.peek() else {
            break (Termination::Optimal, true);
        };
        if integer_bound_of(top.bound) <= search.incumbent.value() {
            break (Termination::Optimal, true);
        }
        if let Some(limit) = config.limits.time_limit_secs {
            if clock.elapsed_secs() >= limit {
                break (Termination::TimeLimit, false);
            }
        }
        if let Some(limit) = config.limits.node_limit {
            if search.nodes_explored >= limit {
                break (Termination::NodeLimit, false);
            }
        }
        let node = search.heap.pop().expect("peeked node exists");
        search.nodes_explored += 1;
        search.expand(node);
        if search.nodes_explored.is_multiple_of(256) {
            let bound = search.global_bound();
            search.emit(EventKind::Progress, bound);
        }
    };

    let final_bound = if proven_optimal {
        search.incumbent.value() as f64
    } else {
        search.global_bound()
    };
    search.emit(EventKind::Terminated, final_bound);

    debug_assert!(
        instance
            .evaluate(&search.incumbent)
            .map(|e| e.feasible)
            .unwrap_or(false),
        "incumbent must evaluate feasible"
    );

    Ok(SolveReport {
        incumbent: search.incumbent,
        bound: certificate,
        proven_optimal,
        nodes_explored: search.nodes_explored,
        wall_time_secs: clock.elapsed_secs(),
        termination,
        events: search.events,
    })
}
