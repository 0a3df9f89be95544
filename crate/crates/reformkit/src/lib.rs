//! Corpus IO, sharded dataset builds, scoring and analysis drivers, and the
//! `reformkit` command line on top of `reformkit-core`.

pub mod analyze;
pub mod build;
pub mod cli;
pub mod demo;
pub mod error;
pub mod io;
pub mod score;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
