//! Command-line front end for the `pickands` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;

pub use config::Settings;
pub use run::{run, Command, Outcome};
