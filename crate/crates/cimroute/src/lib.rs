//! File formats, parallel solving, the experiment harness and the
//! command-line front end for `cimroute-core`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod format;
pub mod harness;
pub mod output;
pub mod solver;
