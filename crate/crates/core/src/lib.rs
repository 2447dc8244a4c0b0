//! Locally D-optimal and robust sampling-time designs for composed
//! Emax-pharmacokinetic regression models.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod design;
pub mod error;
pub mod models;
pub mod numerics;
pub mod robust;
pub mod scenario;
pub mod search;
pub mod verify;

pub use error::{Error, Result};
