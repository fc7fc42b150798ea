// `!(x > 0.0)` rejects NaN along with non-positive values, which is the intent.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the recurrences they implement.
#![allow(clippy::needless_range_loop)]

pub mod asym;
pub mod catalog;
pub mod error;
pub mod khinchin;
pub mod lagrange;
pub mod large_powers;
pub mod numerics;
pub mod par;
pub mod series;
pub mod validation;

pub use error::{Error, Result};
