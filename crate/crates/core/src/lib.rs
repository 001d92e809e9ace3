// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod quantum;
pub mod reservoir;
pub mod timescales;
