// `!(a < b)` comparisons deliberately treat NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod extract;
pub mod io;
pub mod learners;
pub mod mfpredict;
pub mod predictability;
pub mod report;
pub mod rng;
pub mod sweep;
