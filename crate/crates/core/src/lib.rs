//! Sublinear-time estimation of single coordinates of diagonally dominant
//! linear systems `Sz = b` through random walks, with the query oracle,
//! reference solvers, hard-instance generators and benchmark harness
//! built around it.

pub mod bench;
pub mod cli;
pub mod error;
pub mod graphgen;
pub mod hardgen;
pub mod io;
pub mod oracle;
pub mod reference;
pub mod rng;
pub mod solver;
pub mod system;
pub mod verify;

pub use error::{Error, Result};
pub use oracle::{Oracle, QueryKind, QueryLedger, ShiftedOracle, SystemOracle, VertexInfo, WalkStep};
pub use solver::{
    estimate_entry, estimate_entry_boosted, estimate_entry_nonstrict, estimate_entry_relative,
    estimate_fj_opinion, recursive_sample, truncated_sample, EstimateParams, EstimateReport, Mode,
    WalkSample,
};
pub use system::SparseDDSystem;
