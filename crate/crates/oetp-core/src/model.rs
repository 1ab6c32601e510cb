//! Instance and solution data model with feasibility and evaluation logic.
//!
//! Identifiers are dense 0-based indices; all algorithm code works on ids and
//! treats [`Instance`] as immutable shared data.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use alloc::string::String;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(u32);

        impl $name {
            #[inline]
            pub fn new(raw: u32) -> Self {
                Self(raw)
            }

            #[inline]
            pub fn get(self) -> u32 {
                self.0
            }

            /// Position of this id in the instance arrays.
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// A candidate to be assigned at most one schedule.
    CandidateId
);
id_type!(
    /// A pre-validated schedule offered as an indivisible unit.
    ScheduleId
);
id_type!(
    /// A capacitated dimension consumed by assignments (seats, examiner
    /// capacity, per-language slots, ...).
    ResourceId
);

/// Optional human-readable names for ids. An empty list means "no labels for
/// this category"; a non-empty list must match the corresponding count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    pub candidates: Vec<String>,
    pub schedules: Vec<String>,
    pub resources: Vec<String>,
}

/// A problem instance: candidates with compatibility lists, schedules with
/// resource usage lists, and per-resource capacities.
///
/// Counts are implied by the array lengths: `compat.len()` candidates,
/// `usage.len()` schedules, `capacities.len()` resources. Compatibility and
/// usage lists are expected sorted and duplicate-free; [`Instance::validate`]
/// reports every breach.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// Per-resource capacity, in candidate-assignments.
    pub capacities: Vec<i64>,
    /// Per-candidate sorted list of compatible schedules.
    pub compat: Vec<Vec<ScheduleId>>,
    /// Per-schedule sorted list of resources consumed by one assignment.
    pub usage: Vec<Vec<ResourceId>>,
    pub labels: Option<Labels>,
}

/// A single invariant breach found by [`Instance::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    CompatOutOfRange {
        candidate: CandidateId,
        schedule: ScheduleId,
    },
    CompatDuplicate {
        candidate: CandidateId,
        schedule: ScheduleId,
    },
    CompatUnsorted {
        candidate: CandidateId,
    },
    UsageOutOfRange {
        schedule: ScheduleId,
        resource: ResourceId,
    },
    UsageDuplicate {
        schedule: ScheduleId,
        resource: ResourceId,
    },
    UsageUnsorted {
        schedule: ScheduleId,
    },
    NegativeCapacity {
        resource: ResourceId,
        capacity: i64,
    },
    LabelCountMismatch {
        category: &'static str,
        expected: usize,
        actual: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CompatOutOfRange {
                candidate,
                schedule,
            } => write!(
                f,
                "candidate {candidate}: compatible schedule {schedule} is out of range"
            ),
            Violation::CompatDuplicate {
                candidate,
                schedule,
            } => write!(
                f,
                "candidate {candidate}: schedule {schedule} listed more than once"
            ),
            Violation::CompatUnsorted { candidate } => {
                write!(f, "candidate {candidate}: compatibility list is not sorted")
            }
            Violation::UsageOutOfRange { schedule, resource } => write!(
                f,
                "schedule {schedule}: consumed resource {resource} is out of range"
            ),
            Violation::UsageDuplicate { schedule, resource } => write!(
                f,
                "schedule {schedule}: resource {resource} listed more than once"
            ),
            Violation::UsageUnsorted { schedule } => {
                write!(f, "schedule {schedule}: usage list is not sorted")
            }
            Violation::NegativeCapacity { resource, capacity } => {
                write!(f, "resource {resource}: negative capacity {capacity}")
            }
            Violation::LabelCountMismatch {
                category,
                expected,
                actual,
            } => write!(
                f,
                "labels for {category}: expected {expected} entries, found {actual}"
            ),
        }
    }
}

/// Errors for operations whose inputs break a structural contract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelError {
    /// Solution assignment array length differs from the candidate count.
    AssignmentLength { expected: usize, actual: usize },
    /// The operation requires a feasible solution and got an infeasible one.
    InfeasibleSolution,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::AssignmentLength { expected, actual } => write!(
                f,
                "assignment length {actual} does not match candidate count {expected}"
            ),
            ModelError::InfeasibleSolution => {
                write!(f, "operation requires a feasible solution")
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl Instance {
    /// Instance with no candidates, schedules or resources.
    pub fn empty() -> Self {
        Instance {
            capacities: Vec::new(),
            compat: Vec::new(),
            usage: Vec::new(),
            labels: None,
        }
    }

    #[inline]
    pub fn num_candidates(&self) -> usize {
        self.compat.len()
    }

    #[inline]
    pub fn num_schedules(&self) -> usize {
        self.usage.len()
    }

    #[inline]
    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    /// Total number of candidate-schedule compatibility relations.
    pub fn relations(&self) -> u64 {
        self.compat.iter().map(|c| c.len() as u64).sum()
    }

    /// Checks every instance invariant and returns all breaches found.
    ///
    /// An empty result means the instance is well-formed. Violations are data,
    /// not failures: callers decide whether to proceed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let num_schedules = self.num_schedules() as u32;
        let num_resources = self.num_resources() as u32;

        for (i, list) in self.compat.iter().enumerate() {
            let candidate = CandidateId::new(i as u32);
            let mut unsorted = false;
            for (pos, &sid) in list.iter().enumerate() {
                if sid.get() >= num_schedules {
                    out.push(Violation::CompatOutOfRange {
                        candidate,
                        schedule: sid,
                    });
                }
                if pos > 0 {
                    let prev = list[pos - 1];
                    if sid == prev {
                        out.push(Violation::CompatDuplicate {
                            candidate,
                            schedule: sid,
                        });
                    } else if sid < prev {
                        unsorted = true;
                    }
                }
            }
            if unsorted {
                out.push(Violation::CompatUnsorted { candidate });
            }
        }

        for (j, list) in self.usage.iter().enumerate() {
            let schedule = ScheduleId::new(j as u32);
            let mut unsorted = false;
            for (pos, &rid) in list.iter().enumerate() {
                if rid.get() >= num_resources {
                    out.push(Violation::UsageOutOfRange {
                        schedule,
                        resource: rid,
                    });
                }
                if pos > 0 {
                    let prev = list[pos - 1];
                    if rid == prev {
                        out.push(Violation::UsageDuplicate {
                            schedule,
                            resource: rid,
                        });
                    } else if rid < prev {
                        unsorted = true;
                    }
                }
            }
            if unsorted {
                out.push(Violation::UsageUnsorted { schedule });
            }
        }

        for (k, &cap) in self.capacities.iter().enumerate() {
            if cap < 0 {
                out.push(Violation::NegativeCapacity {
                    resource: ResourceId::new(k as u32),
                    capacity: cap,
                });
            }
        }

        if let Some(labels) = &self.labels {
            for (category, actual, expected) in [
                ("candidates", labels.candidates.len(), self.num_candidates()),
                ("schedules", labels.schedules.len(), self.num_schedules()),
                ("resources", labels.resources.len(), self.num_resources()),
            ] {
                if actual != 0 && actual != expected {
                    out.push(Violation::LabelCountMismatch {
                        category,
                        expected,
                        actual,
                    });
                }
            }
        }

        out
    }

    /// Evaluates a solution: objective value, induced resource usage,
    /// feasibility and the list of breaches.
    pub fn evaluate(&self, solution: &Solution) -> Result<Evaluation, ModelError> {
        if solution.len() != self.num_candidates() {
            return Err(ModelError::AssignmentLength {
                expected: self.num_candidates(),
                actual: solution.len(),
            });
        }

        let mut usage = vec![0i64; self.num_resources()];
        let mut violations = Vec::new();

        for (i, assigned) in solution.assignment().iter().enumerate() {
            let Some(sid) = assigned else { continue };
            let candidate = CandidateId::new(i as u32);
            if !self.compat[i].contains(sid) {
                violations.push(SolutionViolation::NotCompatible {
                    candidate,
                    schedule: *sid,
                });
            }
            for &rid in &self.usage[sid.index()] {
                usage[rid.index()] += 1;
            }
        }

        for (k, (&used, &cap)) in usage.iter().zip(self.capacities.iter()).enumerate() {
            if used > cap {
                violations.push(SolutionViolation::CapacityExceeded {
                    resource: ResourceId::new(k as u32),
                    used,
                    capacity: cap,
                });
            }
        }

        Ok(Evaluation {
            value: solution.value(),
            feasible: violations.is_empty(),
            usage,
            violations,
        })
    }

    /// Remaining capacity per resource under a feasible solution.
    ///
    /// All entries are nonnegative. An infeasible solution is a contract
    /// breach and yields [`ModelError::InfeasibleSolution`].
    pub fn residual_capacities(&self, solution: &Solution) -> Result<Vec<i64>, ModelError> {
        let eval = self.evaluate(solution)?;
        if !eval.feasible {
            return Err(ModelError::InfeasibleSolution);
        }
        Ok(self
            .capacities
            .iter()
            .zip(eval.usage.iter())
            .map(|(cap, used)| cap - used)
            .collect())
    }
}

/// Result of [`Instance::evaluate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// Number of assigned candidates.
    pub value: u32,
    /// Induced per-resource usage.
    pub usage: Vec<i64>,
    /// True iff every assignment is compatible and no capacity is exceeded.
    pub feasible: bool,
    pub violations: Vec<SolutionViolation>,
}

/// A feasibility breach of a concrete solution against an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionViolation {
    NotCompatible {
        candidate: CandidateId,
        schedule: ScheduleId,
    },
    CapacityExceeded {
        resource: ResourceId,
        used: i64,
        capacity: i64,
    },
}

impl fmt::Display for SolutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionViolation::NotCompatible {
                candidate,
                schedule,
            } => write!(
                f,
                "candidate {candidate} assigned to incompatible schedule {schedule}"
            ),
            SolutionViolation::CapacityExceeded {
                resource,
                used,
                capacity,
            } => write!(
                f,
                "resource {resource}: usage {used} exceeds capacity {capacity}"
            ),
        }
    }
}

/// A partial assignment of candidates to schedules.
///
/// The objective value (number of assigned candidates) is kept in sync with
/// the assignment vector by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    assignment: Vec<Option<ScheduleId>>,
    value: u32,
}

impl Solution {
    /// All-unassigned solution for `num_candidates` candidates.
    pub fn empty(num_candidates: usize) -> Self {
        Solution {
            assignment: vec![None; num_candidates],
            value: 0,
        }
    }

    pub fn from_assignment(assignment: Vec<Option<ScheduleId>>) -> Self {
        let value = assignment.iter().filter(|a| a.is_some()).count() as u32;
        Solution { assignment, value }
    }

    /// Number of assigned candidates.
    #[inline]
    pub fn value(&self) -> u32 {
        self.value
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    #[inline]
    pub fn get(&self, candidate: CandidateId) -> Option<ScheduleId> {
        self.assignment[candidate.index()]
    }

    pub fn set(&mut self, candidate: CandidateId, schedule: Option<ScheduleId>) {
        let slot = &mut self.assignment[candidate.index()];
        match (slot.is_some(), schedule.is_some()) {
            (false, true) => self.value += 1,
            (true, false) => self.value -= 1,
            _ => {}
        }
        *slot = schedule;
    }

    #[inline]
    pub fn assignment(&self) -> &[Option<ScheduleId>] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<Option<ScheduleId>> {
        self.assignment
    }

    /// Iterator over `(candidate, schedule)` pairs of assigned candidates, in
    /// candidate order.
    pub fn assigned_pairs(&self) -> impl Iterator<Item = (CandidateId, ScheduleId)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map(|sid| (CandidateId::new(i as u32), sid)))
    }
}

/// Incrementally maintained residual capacities during a search or scan.
///
/// The tracker mirrors what [`Instance::residual_capacities`] would compute
/// from scratch for the current assignment.
#[derive(Clone, Debug)]
pub struct ResidualTracker {
    residual: Vec<i64>,
}

impl ResidualTracker {
    /// Tracker for the empty assignment: residuals equal capacities.
    pub fn new(instance: &Instance) -> Self {
        ResidualTracker {
            residual: instance.capacities.clone(),
        }
    }

    /// Tracker positioned at an existing feasible solution.
    pub fn from_solution(instance: &Instance, solution: &Solution) -> Result<Self, ModelError> {
        instance
            .residual_capacities(solution)
            .map(|residual| ResidualTracker { residual })
    }

    #[inline]
    pub fn residual(&self, resource: ResourceId) -> i64 {
        self.residual[resource.index()]
    }

    #[inline]
    pub fn as_slice(&self) -> &[i64] {
        &self.residual
    }

    /// True iff one more assignment to `schedule` fits every consumed
    /// resource.
    pub fn fits(&self, instance: &Instance, schedule: ScheduleId) -> bool {
        instance.usage[schedule.index()]
            .iter()
            .all(|rid| self.residual[rid.index()] >= 1)
    }

    /// Minimum residual over the schedule's consumed resources after one more
    /// assignment, or `None` if it does not fit. A schedule consuming nothing
    /// reports `i64::MAX`.
    pub fn headroom_after(&self, instance: &Instance, schedule: ScheduleId) -> Option<i64> {
        let mut min = i64::MAX;
        for rid in &instance.usage[schedule.index()] {
            let left = self.residual[rid.index()] - 1;
            if left < 0 {
                return None;
            }
            min = min.min(left);
        }
        Some(min)
    }

    /// Consumes one unit of each resource of `schedule`.
    pub fn assign(&mut self, instance: &Instance, schedule: ScheduleId) {
        for rid in &instance.usage[schedule.index()] {
            self.residual[rid.index()] -= 1;
        }
    }

    /// Releases one unit of each resource of `schedule`.
    pub fn unassign(&mut self, instance: &Instance, schedule: ScheduleId) {
        for rid in &instance.usage[schedule.index()] {
            self.residual[rid.index()] += 1;
        }
    }
}
