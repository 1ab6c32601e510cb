//! Exact solving: a brute-force oracle, a Lagrangian dual bound and a
//! warm-startable best-first branch-and-bound.

mod bound;
mod brute;
mod search;

pub use bound::{lagrangian_bound, BoundCertificate, BoundMethod, StepRule};
pub use brute::{brute_force_solve, brute_force_solve_capped, BruteForceError, DEFAULT_LEAF_CAP};
pub use search::{
    branch_and_bound, EventKind, Limits, SearchEvent, SolveConfig, SolveError, SolveReport,
    Termination,
};

/// Time source injected into the solver so time limits work without an
/// operating system clock. Implementations report seconds elapsed since
/// their own fixed reference point.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// A clock that never advances; time limits never trigger under it.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// Slack added before flooring a float upper bound, so a value whose exact
/// mathematical form is integral cannot round down and cut off an optimum.
pub(crate) const BOUND_EPS: f64 = 1e-6;

/// Admissible integer bound from a real-valued upper bound.
pub(crate) fn integer_bound_of(upper: f64) -> u32 {
    let guarded = libm::floor(upper + BOUND_EPS);
    if guarded <= 0.0 {
        0
    } else if guarded >= u32::MAX as f64 {
        u32::MAX
    } else {
        guarded as u32
    }
}
