// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod data;
pub mod density;
pub mod dip;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod modeclust;
pub mod pipeline;
pub mod rng;
pub mod screening;
pub mod synth;

pub use error::{Error, Result};
