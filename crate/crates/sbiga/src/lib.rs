//! Configuration-driven runs, convergence studies, checks and field export
//! for Kirchhoff plates on C1 scaled-boundary spaces.

pub mod config;
pub mod error;
pub mod run;
pub mod verify;
pub mod vtk;

pub use config::{Case, CaseConfig};
pub use error::HarnessError;
pub use run::{ResultRow, RunOptions};
pub use sbiga_core as core;

/// Single-threaded assembly and factorization for reproducible output.
pub fn force_serial() {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    sbiga_core::util::force_serial_linear_algebra();
}
