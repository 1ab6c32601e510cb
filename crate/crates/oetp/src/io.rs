//! JSON documents for instances and solutions.
//!
//! The instance document is versioned and fully explicit: counts, capacities
//! and both adjacency lists. Serialization is deterministic (fixed field
//! order, compact encoding), so identical data always produces identical
//! bytes. The solution document is a bare assignment array with `null` for
//! unassigned candidates.

use std::fmt::Write as _;

use oetp_core::model::{Labels, Violation};
use oetp_core::{Instance, ResourceId, ScheduleId, Solution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The only instance-document schema this build reads or writes.
pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported document version {found} (supported: {DOCUMENT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("field `{field}` declares {declared} but the document carries {actual}")]
    CountMismatch {
        field: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error("invalid instance: {}", render_violations(violations))]
    InvalidInstance { violations: Vec<Violation> },
    #[error("assignment has {actual} entries but the instance has {expected} candidates")]
    AssignmentLength { expected: usize, actual: usize },
    #[error(
        "candidate {candidate}: schedule id {schedule} out of range ({num_schedules} schedules)"
    )]
    ScheduleOutOfRange {
        candidate: usize,
        schedule: u32,
        num_schedules: usize,
    },
}

impl DocumentError {
    /// True for errors of document shape (as opposed to content that fails
    /// model validation).
    pub fn is_syntactic(&self) -> bool {
        matches!(
            self,
            DocumentError::Syntax(_) | DocumentError::UnsupportedVersion { .. }
        )
    }
}

fn render_violations(violations: &[Violation]) -> String {
    const SHOWN: usize = 8;
    let mut out = String::new();
    for (i, v) in violations.iter().take(SHOWN).enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{v}");
    }
    if violations.len() > SHOWN {
        let _ = write!(out, "; … and {} more", violations.len() - SHOWN);
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDocument {
    version: u32,
    num_candidates: usize,
    num_schedules: usize,
    num_resources: usize,
    capacities: Vec<i64>,
    compat: Vec<Vec<u32>>,
    usage: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<LabelsDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelsDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    schedules: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    resources: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDocument {
    assignment: Vec<Option<u32>>,
}

/// Parses an instance document; the result always passes
/// [`Instance::validate`].
pub fn parse_instance(text: &str) -> Result<Instance, DocumentError> {
    #[derive(Deserialize)]
    struct VersionProbe {
        version: u32,
    }
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.version != DOCUMENT_VERSION {
        return Err(DocumentError::UnsupportedVersion {
            found: probe.version,
        });
    }

    let doc: InstanceDocument = serde_json::from_str(text)?;
    check_count("num_candidates", doc.num_candidates, doc.compat.len())?;
    check_count("num_schedules", doc.num_schedules, doc.usage.len())?;
    check_count("num_resources", doc.num_resources, doc.capacities.len())?;

    let instance = Instance {
        capacities: doc.capacities,
        compat: doc
            .compat
            .into_iter()
            .map(|l| l.into_iter().map(ScheduleId::new).collect())
            .collect(),
        usage: doc
            .usage
            .into_iter()
            .map(|l| l.into_iter().map(ResourceId::new).collect())
            .collect(),
        labels: doc.labels.map(|l| Labels {
            candidates: l.candidates,
            schedules: l.schedules,
            resources: l.resources,
        }),
    };

    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(DocumentError::InvalidInstance { violations });
    }
    Ok(instance)
}

fn check_count(field: &'static str, declared: usize, actual: usize) -> Result<(), DocumentError> {
    if declared != actual {
        return Err(DocumentError::CountMismatch {
            field,
            declared,
            actual,
        });
    }
    Ok(())
}

/// Serializes a valid instance; identical instances produce identical bytes.
pub fn serialize_instance(instance: &Instance) -> String {
    let doc = InstanceDocument {
        version: DOCUMENT_VERSION,
        num_candidates: instance.num_candidates(),
        num_schedules: instance.num_schedules(),
        num_resources: instance.num_resources(),
        capacities: instance.capacities.clone(),
        compat: instance
            .compat
            .iter()
            .map(|l| l.iter().map(|j| j.get()).collect())
            .collect(),
        usage: instance
            .usage
            .iter()
            .map(|l| l.iter().map(|k| k.get()).collect())
            .collect(),
        labels: instance.labels.as_ref().map(|l| LabelsDocument {
            candidates: l.candidates.clone(),
            schedules: l.schedules.clone(),
            resources: l.resources.clone(),
        }),
    };
    serde_json::to_string(&doc).expect("instance document serialization cannot fail")
}

/// Parses a solution document against an instance, checking length and id
/// range but not feasibility (that is `evaluate`'s job).
pub fn parse_solution(text: &str, instance: &Instance) -> Result<Solution, DocumentError> {
    let doc: SolutionDocument = serde_json::from_str(text)?;
    if doc.assignment.len() != instance.num_candidates() {
        return Err(DocumentError::AssignmentLength {
            expected: instance.num_candidates(),
            actual: doc.assignment.len(),
        });
    }
    let num_schedules = instance.num_schedules();
    for (candidate, slot) in doc.assignment.iter().enumerate() {
        if let Some(schedule) = *slot {
            if schedule as usize >= num_schedules {
                return Err(DocumentError::ScheduleOutOfRange {
                    candidate,
                    schedule,
                    num_schedules,
                });
            }
        }
    }
    Ok(Solution::from_assignment(
        doc.assignment
            .into_iter()
            .map(|slot| slot.map(ScheduleId::new))
            .collect(),
    ))
}

/// Serializes a solution; deterministic like [`serialize_instance`].
pub fn serialize_solution(solution: &Solution) -> String {
    let doc = SolutionDocument {
        assignment: solution
            .assignment()
            .iter()
            .map(|slot| slot.map(|j| j.get()))
            .collect(),
    };
    serde_json::to_string(&doc).expect("solution document serialization cannot fail")
}
