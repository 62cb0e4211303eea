//! Seeded Monte Carlo experiments on secondary-user arrival in IA networks.
//!
//! A [`SweepSpec`] fixes the network, the strategies, the SNR grid and the
//! trial count. [`run_sweep`] draws every trial from its own sub-seed, so
//! the report is identical whether trials run in parallel or not. Output is
//! one CSV row per (strategy, SNR, trial) plus a JSON summary with means
//! and DOF estimates.

pub mod check;
pub mod convergence;
pub mod dof;
pub mod error;
pub mod feasibility;
pub mod spec;
pub mod strategy;
pub mod sweep;
pub mod trial;

pub use convergence::{convergence_report, ConvergenceReport};
pub use dof::estimate_dof;
pub use error::{SimError, SimResult};
pub use feasibility::feasibility_report;
pub use spec::SweepSpec;
pub use strategy::{ConvergenceAlgorithm, Strategy};
pub use sweep::{run_sweep, run_sweep_serial, SweepReport, SweepRow, CSV_HEADER};
