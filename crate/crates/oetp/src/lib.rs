//! File formats, MILP export, reporting and timing for the `oetp`
//! command-line tool. All algorithmic work lives in `oetp-core`; this crate
//! owns everything that touches strings, files and the system clock.

pub mod clock;
pub mod io;
pub mod mps;
pub mod report;
