//! Quantifying political bias in ranked search results.
//!
//! The bias a user sees in a result page is split into the bias already
//! present in the retrieved items ([`metrics::input_bias`]), the rank-weighted
//! bias of the page itself ([`metrics::output_bias`]), and their difference,
//! the ranking bias contributed by the ranking system. Per-item bias is the
//! inferred leaning of the item's author ([`leaning`]); [`evaluation`] holds
//! the tooling to validate those inferences against crowd judgments, and
//! [`rankers`] builds alternative rankings to compare against the observed
//! one.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod evaluation;
pub mod leaning;
pub mod metrics;
pub mod model;
pub mod rankers;

pub use model::{
    BiasReport, BiasScore, InputCorpus, Item, ItemId, LeaningLabel, ModelError, QueryId,
    RankedSnapshot, Topic, UserId, Validate, DEFAULT_PAGE_SIZE,
};
