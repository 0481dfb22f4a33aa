// `!(x > 0.0)` style guards are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod function;
pub mod l0stream;
pub mod numeric;
pub mod reductions;
pub mod seed;
pub mod simulate;
pub mod sumequal;
pub mod verify;

pub use error::{Error, Result};
