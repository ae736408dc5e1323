//! Search-ranking bias auditing: corpus files, synthetic data, batch
//! workflows and the `biasaudit` command line. The computations live in
//! `biasaudit-core`.

#![forbid(unsafe_code)]

pub mod bundle;
pub mod cli;
pub mod config;
pub mod formats;
pub mod pipeline;
pub mod report;
pub mod sampling;
pub mod synth;

pub use biasaudit_core as core;
