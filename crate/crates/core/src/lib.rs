//! Deterministic input reformulation for translation finetuning data.
//!
//! This crate holds the pure parts of the toolkit: corpus types and
//! validation, text segmentation, the reformulation kernels (baseline,
//! POSE, prefix+suffix, ParSE, MiPS, token and span masking), step
//! schedules, per-example dataset assembly, corpus-level BLEU / chrF++ and
//! the in/out-pretrain breakdown analysis. Nothing here touches the file
//! system; the `reformkit` crate layers IO, sharding and the CLI on top.
#![no_std]
#![forbid(unsafe_code)]
extern crate alloc;

pub mod analysis;
pub mod builder;
pub mod corpus;
pub mod error;
pub mod mask;
pub mod metrics;
pub mod presets;
pub mod reformulate;
pub mod rng;
pub mod schedule;
pub mod stats;
pub mod textseg;

pub use error::{Error, Result};
