//! Power-system expansion planning.
//!
//! The crate bundles the building blocks needed to plan generation,
//! transmission and reactive-power additions on small test systems:
//!
//! * [`model`] holds the network, candidate and plan types,
//! * [`case_io`] reads and writes the sectioned case format, run
//!   configurations and plan files, and ships the bundled datasets,
//! * [`powerflow`] has DC, fast-decoupled AC and N-1 screening solvers,
//! * [`reliability`] computes loss-of-load probability,
//! * [`economics`] does discounted cost accounting and economic dispatch,
//! * [`metaheuristics`] provides the genetic algorithm and particle swarm,
//! * [`planners`] binds encodings and evaluators for each study,
//! * [`ip_tnep`] is a primal-dual interior-point TNEP solver,
//! * [`report`] formats and writes run results,
//! * [`reproduce`] re-runs the reference studies as pass/fail checks,
//! * [`cli`] implements the `gridplan` command line.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case_io;
pub mod cli;
pub mod economics;
pub mod error;
pub mod ip_tnep;
pub mod metaheuristics;
pub mod model;
pub mod planners;
pub mod powerflow;
pub mod reliability;
pub mod report;
pub mod reproduce;

pub use error::{Error, Result};
