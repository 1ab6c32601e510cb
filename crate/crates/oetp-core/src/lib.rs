//! Core model and algorithms for assigning exam candidates to pre-validated
//! schedules under shared resource capacities.
//!
//! The problem is a unit-profit multidimensional knapsack with per-candidate
//! choice sets: every candidate may receive at most one schedule from their
//! compatibility list, every assignment consumes one unit of each resource its
//! schedule touches, and the objective is to maximize the number of assigned
//! candidates.
//!
//! This crate is `no_std` (with `alloc`) and performs no IO. File formats,
//! model export and the command-line pipeline live in the companion `oetp`
//! crate.

#![no_std]

extern crate alloc;

pub mod gen;
pub mod heuristics;
pub mod model;
mod rng;
pub mod solver;

pub use model::{CandidateId, Evaluation, Instance, ModelError, ResourceId, ScheduleId, Solution};
pub use solver::{BoundCertificate, SolveConfig, SolveReport};
