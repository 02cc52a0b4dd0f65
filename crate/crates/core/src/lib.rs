#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Monte Carlo estimation of discrete Pickands constants and extremal indices
//! for Brown–Resnick stationary processes.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod maxstable;
pub mod model;
pub mod parallel;
pub mod rng;
pub mod sampler;
pub mod smallball;
pub mod stats;

pub use error::{PickandsError, Result};
pub use model::{GridSpec, JumpLaw, LevyModel, PathSample, ProcessModel, VarianceFunction};
