//! Multi-objective wireless routing as a QUBO / Ising problem, solved with a
//! simulated coherent Ising machine (CIM).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the experiment
//! harness and the command line live in the `cimroute` companion crate.
//!
//! Pipeline:
//!
//! 1. [`network`] builds or validates a directed geometric graph with a
//!    source/destination pair.
//! 2. [`objectives`] turns edge geometry into path loss, bit error and hop
//!    weights and scalarizes them into one cost per edge.
//! 3. [`qubo`] adds the flow-conservation penalties and produces a
//!    [`QuboModel`](qubo::QuboModel).
//! 4. [`ising`] maps the QUBO to spins.
//! 5. [`cim`] integrates the DOPO amplitude equations and reads spins out.
//! 6. [`route`] decodes spins into edges and classifies them, and
//!    [`oracle`] supplies exact classical answers to compare against.

#![no_std]
#![forbid(unsafe_code)]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cim;
mod error;
pub mod ising;
pub mod network;
pub mod objectives;
pub mod oracle;
pub mod qubo;
pub mod route;
pub mod seed;

pub use error::{Error, Result};
pub use ising::IsingModel;
pub use network::{GeneratorConfig, NetworkInstance};
pub use objectives::{EdgeObjectives, Normalization, RadioConfig, ScalarWeights};
pub use qubo::{PenaltyConfig, PenaltyScheme, QuboModel, VariableMap};
pub use route::{Classification, RouteSolution};
