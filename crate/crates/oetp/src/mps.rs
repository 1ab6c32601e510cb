//! Free-format MPS export of the assignment MILP, plus MST-style warm
//! starts.
//!
//! The model has one binary column `y_<i>_<j>` per compatibility relation,
//! one `≤ b_k` row `R<k>` per resource, one `≤ 1` row `C<i>` per candidate,
//! and maximizes the sum of all columns. Maximization is declared with an
//! `OBJSENSE MAX` section; for consumers that ignore it, `negate_objective`
//! instead writes minimization-convention costs of -1, so the reported
//! optimum is the negated objective value.

use std::fmt::Write as _;

use oetp_core::model::ModelError;
use oetp_core::{CandidateId, Instance, ScheduleId, Solution};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("warm start does not match the instance: {0}")]
    Model(#[from] ModelError),
    #[error("warm start is infeasible ({violations} constraint violations)")]
    Infeasible { violations: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MpsOptions {
    /// Emit -1 objective coefficients and no `OBJSENSE` section, for readers
    /// that always minimize.
    pub negate_objective: bool,
}

/// MPS column name of the binary variable assigning schedule `j` to
/// candidate `i`.
pub fn column_name(candidate: CandidateId, schedule: ScheduleId) -> String {
    format!("y_{}_{}", candidate.get(), schedule.get())
}

/// Inverse of [`column_name`] for names this module generates.
pub fn parse_column_name(name: &str) -> Option<(CandidateId, ScheduleId)> {
    let rest = name.strip_prefix("y_")?;
    let (i, j) = rest.split_once('_')?;
    Some((
        CandidateId::new(i.parse().ok()?),
        ScheduleId::new(j.parse().ok()?),
    ))
}

/// Serializes a valid instance as a free-format MPS model.
pub fn export_mps(instance: &Instance, options: &MpsOptions) -> String {
    let relations = instance.relations() as usize;
    let rows = instance.num_resources() + instance.num_candidates();
    let mut out = String::with_capacity(80 * relations + 24 * rows + 256);

    if options.negate_objective {
        out.push_str("* Minimization convention: optimum = -(objective value).\n");
    }
    out.push_str("NAME OETP\n");
    if !options.negate_objective {
        out.push_str("OBJSENSE\n    MAX\n");
    }

    out.push_str("ROWS\n N OBJ\n");
    for k in 0..instance.num_resources() {
        let _ = writeln!(out, " L R{k}");
    }
    for i in 0..instance.num_candidates() {
        let _ = writeln!(out, " L C{i}");
    }

    let obj = if options.negate_objective { "-1" } else { "1" };
    out.push_str("COLUMNS\n");
    for (i, list) in instance.compat.iter().enumerate() {
        for j in list {
            let name = column_name(CandidateId::new(i as u32), *j);
            let _ = writeln!(out, " {name} OBJ {obj} C{i} 1");
            for pair in instance.usage[j.index()].chunks(2) {
                let _ = write!(out, " {name}");
                for k in pair {
                    let _ = write!(out, " R{} 1", k.get());
                }
                out.push('\n');
            }
        }
    }

    out.push_str("RHS\n");
    for (k, b) in instance.capacities.iter().enumerate() {
        let _ = writeln!(out, " RHS R{k} {b}");
    }
    for i in 0..instance.num_candidates() {
        let _ = writeln!(out, " RHS C{i} 1");
    }

    out.push_str("BOUNDS\n");
    for (i, list) in instance.compat.iter().enumerate() {
        for j in list {
            let _ = writeln!(
                out,
                " BV BND {}",
                column_name(CandidateId::new(i as u32), *j)
            );
        }
    }

    out.push_str("ENDATA\n");
    out
}

/// MST-style warm start: one `<column> 1` line per assignment, in candidate
/// order, matching [`export_mps`] column names. The solution must be
/// feasible.
pub fn export_warm_start(instance: &Instance, solution: &Solution) -> Result<String, ExportError> {
    let evaluation = instance.evaluate(solution)?;
    if !evaluation.feasible {
        return Err(ExportError::Infeasible {
            violations: evaluation.violations.len(),
        });
    }
    let mut out = String::new();
    for (i, j) in solution.assigned_pairs() {
        let _ = writeln!(out, "{} 1", column_name(i, j));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use oetp_core::ResourceId;

    fn t1() -> Instance {
        Instance {
            capacities: vec![2, 1],
            compat: vec![
                vec![ScheduleId::new(0), ScheduleId::new(1)],
                vec![ScheduleId::new(0)],
                vec![ScheduleId::new(1)],
            ],
            usage: vec![
                vec![ResourceId::new(0)],
                vec![ResourceId::new(0), ResourceId::new(1)],
            ],
            labels: None,
        }
    }

    fn count_prefixed(text: &str, prefix: &str) -> usize {
        text.lines().filter(|l| l.starts_with(prefix)).count()
    }

    #[test]
    fn t1_has_four_columns_and_five_constraint_rows() {
        let text = export_mps(&t1(), &MpsOptions::default());
        assert_eq!(count_prefixed(&text, " L "), 5);
        assert_eq!(count_prefixed(&text, " BV BND "), 4);
        for name in ["y_0_0", "y_0_1", "y_1_0", "y_2_1"] {
            assert!(text.contains(name), "missing column {name}");
        }
        assert!(text.contains("OBJSENSE"));
        assert!(text.contains(" y_0_1 OBJ 1 C0 1"));
        // y_0_1 consumes both resources on one line.
        assert!(text.contains(" y_0_1 R0 1 R1 1"));
        assert!(text.contains(" RHS R0 2"));
        assert!(text.contains(" RHS R1 1"));
        assert!(text.contains(" RHS C2 1"));
        assert!(text.ends_with("ENDATA\n"));
    }

    #[test]
    fn negated_objective_drops_objsense() {
        let text = export_mps(
            &t1(),
            &MpsOptions {
                negate_objective: true,
            },
        );
        assert!(!text.contains("OBJSENSE"));
        assert!(text.contains(" y_0_0 OBJ -1 C0 1"));
        assert!(text.starts_with("* Minimization convention"));
    }

    #[test]
    fn empty_instance_is_a_valid_skeleton() {
        let text = export_mps(&Instance::empty(), &MpsOptions::default());
        assert_eq!(count_prefixed(&text, " L "), 0);
        assert_eq!(count_prefixed(&text, " BV "), 0);
        for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
            assert!(text.contains(section), "missing section {section}");
        }
    }

    #[test]
    fn column_names_round_trip() {
        for (i, j) in [(0u32, 0u32), (7, 12), (7803, 7758), (u32::MAX, 0)] {
            let name = column_name(CandidateId::new(i), ScheduleId::new(j));
            assert_eq!(
                parse_column_name(&name),
                Some((CandidateId::new(i), ScheduleId::new(j)))
            );
        }
        assert_eq!(parse_column_name("x_1_2"), None);
        assert_eq!(parse_column_name("y_12"), None);
        assert_eq!(parse_column_name("y_a_2"), None);
    }

    #[test]
    fn warm_start_lists_assigned_columns_only() {
        let inst = t1();
        let sol = Solution::from_assignment(vec![None, None, Some(ScheduleId::new(1))]);
        let text = export_warm_start(&inst, &sol).unwrap();
        assert_eq!(text, "y_2_1 1\n");
    }

    #[test]
    fn empty_warm_start_is_empty() {
        let inst = t1();
        let sol = Solution::empty(3);
        assert_eq!(export_warm_start(&inst, &sol).unwrap(), "");
    }

    #[test]
    fn infeasible_warm_start_is_rejected() {
        let inst = t1();
        // c0 and c2 both take s1, overfilling r1.
        let sol = Solution::from_assignment(vec![
            Some(ScheduleId::new(1)),
            None,
            Some(ScheduleId::new(1)),
        ]);
        assert!(matches!(
            export_warm_start(&inst, &sol),
            Err(ExportError::Infeasible { .. })
        ));
    }

    #[test]
    fn wrong_length_warm_start_is_a_model_error() {
        let inst = t1();
        let sol = Solution::empty(2);
        assert!(matches!(
            export_warm_start(&inst, &sol),
            Err(ExportError::Model(_))
        ));
    }
}
