//! Federated learning over a hybrid VLC/RF cell.
//!
//! Indoor users download the global model over visible light and upload over
//! RF; outdoor users use RF both ways. Each global round every selected user
//! must finish download, local training and upload within a deadline and an
//! energy budget. [`usba`] picks the users and the per-RB bandwidths that
//! maximize the number of training samples taking part, [`fl`] trains the
//! regression model over the chosen users, and [`runner`] compares the hybrid
//! network against an RF-only one.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod compute;
pub mod config;
pub mod dataset;
pub mod error;
pub mod fl;
pub mod report;
mod rng;
pub mod runner;
pub mod topology;
pub mod usba;
pub mod validate;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use runner::{run_experiment, run_rf_only, ExperimentRecord, ExperimentReport, RunOptions};
pub use topology::{generate_topology, Topology, UserNode};
pub use usba::{usba, BandwidthAllocation, LinkMode, Planner, Selection, UsbaResult};
