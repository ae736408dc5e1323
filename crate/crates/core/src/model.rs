//! Shared domain values: bias scores, identifiers, items, ranked snapshots
//! and per-query reports.
//!
//! Every type here is a plain immutable value. Constructors enforce the
//! invariants that are cheap to enforce; [`Validate`] reports the rest as a
//! list of human-readable violations instead of failing.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;

/// Default number of results captured per snapshot (one search result page).
pub const DEFAULT_PAGE_SIZE: usize = 20;

/// Errors raised when constructing a domain value from raw parts.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("bias score {0} out of [-1,1]")]
    ScoreOutOfRange(f64),
    #[error("empty {0} identifier")]
    EmptyId(&'static str),
}

/// Political bias of a single unit, in `[-1, 1]`.
///
/// `+1` is fully democratic-leaning and `-1` fully republican-leaning.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct BiasScore(f64);

impl BiasScore {
    pub const NEUTRAL: BiasScore = BiasScore(0.0);
    pub const MAX: BiasScore = BiasScore(1.0);
    pub const MIN: BiasScore = BiasScore(-1.0);

    pub fn new(value: f64) -> Result<Self, ModelError> {
        if (-1.0..=1.0).contains(&value) {
            Ok(BiasScore(value))
        } else {
            Err(ModelError::ScoreOutOfRange(value))
        }
    }

    /// Clamps into `[-1, 1]`. Used for means of valid scores, which can only
    /// leave the range through floating rounding. NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            BiasScore(0.0)
        } else {
            BiasScore(value.clamp(-1.0, 1.0))
        }
    }

    /// Wraps a raw value without checking it; [`Validate`] will flag it.
    pub const fn new_unchecked(value: f64) -> Self {
        BiasScore(value)
    }

    #[inline]
    pub const fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BiasScore {
    type Error = ModelError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        BiasScore::new(value)
    }
}

impl From<BiasScore> for f64 {
    fn from(s: BiasScore) -> f64 {
        s.0
    }
}

impl fmt::Display for BiasScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Discrete political leaning.
///
/// `Neutral` means an inference was made and fell inside the neutral zone;
/// `Uninferable` means no inference was possible at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LeaningLabel {
    Democratic,
    Republican,
    Neutral,
    Uninferable,
}

impl LeaningLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            LeaningLabel::Democratic => "democratic",
            LeaningLabel::Republican => "republican",
            LeaningLabel::Neutral => "neutral",
            LeaningLabel::Uninferable => "uninferable",
        }
    }

    pub fn is_inferred(self) -> bool {
        self != LeaningLabel::Uninferable
    }

    /// Democratic and Republican swap; Neutral and Uninferable are fixed.
    pub fn mirrored(self) -> Self {
        match self {
            LeaningLabel::Democratic => LeaningLabel::Republican,
            LeaningLabel::Republican => LeaningLabel::Democratic,
            other => other,
        }
    }
}

impl fmt::Display for LeaningLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for LeaningLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "democratic" | "dem" => Ok(LeaningLabel::Democratic),
            "republican" | "rep" => Ok(LeaningLabel::Republican),
            "neutral" | "neu" => Ok(LeaningLabel::Neutral),
            "uninferable" => Ok(LeaningLabel::Uninferable),
            other => Err(alloc::format!("unknown leaning label {other:?}")),
        }
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident, $kind:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        #[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
                let id = id.into();
                if id.is_empty() {
                    Err(ModelError::EmptyId($kind))
                } else {
                    Ok($name(id))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = ModelError;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                $name::new(s)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = ModelError;
            fn try_from(s: &str) -> Result<Self, Self::Error> {
                $name::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

string_id!(
    /// Identifier of an account.
    UserId,
    "user"
);
string_id!(
    /// Identifier of a post / search result.
    ItemId,
    "item"
);
string_id!(
    /// A search query string.
    QueryId,
    "query"
);

/// A topic label. Case-folded on construction so `Politics` and `politics`
/// are the same topic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct Topic(String);

impl Topic {
    pub fn new(topic: impl AsRef<str>) -> Result<Self, ModelError> {
        let folded = topic.as_ref().trim().to_lowercase();
        if folded.is_empty() {
            Err(ModelError::EmptyId("topic"))
        } else {
            Ok(Topic(folded))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Topic {
    type Error = ModelError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Topic::new(s)
    }
}

impl TryFrom<&str> for Topic {
    type Error = ModelError;
    fn try_from(s: &str) -> Result<Self, Self::Error> {
        Topic::new(s)
    }
}

impl From<Topic> for String {
    fn from(t: Topic) -> String {
        t.0
    }
}

impl Borrow<str> for Topic {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One search result unit with its engagement counts and, once inferred, the
/// political bias of its author.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Item {
    pub id: ItemId,
    pub author: UserId,
    /// Epoch seconds, UTC.
    pub created_at: i64,
    pub retweet_count: u64,
    pub favorite_count: u64,
    pub text: Option<String>,
    pub source_bias: Option<BiasScore>,
}

impl Item {
    pub fn new(id: ItemId, author: UserId, created_at: i64) -> Self {
        Item {
            id,
            author,
            created_at,
            retweet_count: 0,
            favorite_count: 0,
            text: None,
            source_bias: None,
        }
    }

    pub fn with_counts(mut self, retweets: u64, favorites: u64) -> Self {
        self.retweet_count = retweets;
        self.favorite_count = favorites;
        self
    }

    pub fn with_bias(mut self, bias: BiasScore) -> Self {
        self.source_bias = Some(bias);
        self
    }
}

/// A timestamped top-k result list for one query, rank 1 first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankedSnapshot {
    pub query: QueryId,
    pub captured_at: i64,
    pub ranked_items: Vec<ItemId>,
}

impl RankedSnapshot {
    pub fn new(query: QueryId, captured_at: i64, ranked_items: Vec<ItemId>) -> Self {
        RankedSnapshot {
            query,
            captured_at,
            ranked_items,
        }
    }

    /// Violations of the page-size bound, which depends on configuration.
    pub fn check_page_size(&self, page_size: usize) -> Vec<String> {
        if self.ranked_items.len() > page_size {
            alloc::vec![alloc::format!(
                "ranked list has {} items, page size is {}",
                self.ranked_items.len(),
                page_size
            )]
        } else {
            Vec::new()
        }
    }
}

/// The unordered set of items retrieved as relevant to a query.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InputCorpus {
    pub query: QueryId,
    pub items: Vec<ItemId>,
}

impl InputCorpus {
    pub fn new(query: QueryId, items: Vec<ItemId>) -> Self {
        InputCorpus { query, items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Time-averaged input, output and ranking bias for one query.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BiasReport {
    pub query: QueryId,
    pub tib: BiasScore,
    pub tob: BiasScore,
    /// `tob - tib`, in `[-2, 2]`.
    pub trb: f64,
    pub rank_depth: usize,
    pub snapshot_count: usize,
    pub skipped_snapshots: usize,
    pub scored_item_fraction: f64,
}

/// Invariant checks that return violations rather than failing.
pub trait Validate {
    fn validate(&self) -> Vec<String>;
}

fn check_score(out: &mut Vec<String>, what: &str, s: BiasScore) {
    if !(-1.0..=1.0).contains(&s.value()) {
        if what.is_empty() {
            out.push("value out of [-1,1]".to_string());
        } else {
            out.push(alloc::format!("{what}: value out of [-1,1]"));
        }
    }
}

impl Validate for BiasScore {
    fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        check_score(&mut out, "", *self);
        out
    }
}

impl Validate for Item {
    fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(s) = self.source_bias {
            check_score(&mut out, "source_bias", s);
        }
        out
    }
}

fn duplicates(ids: &[ItemId]) -> bool {
    let mut seen = BTreeSet::new();
    ids.iter().any(|id| !seen.insert(id))
}

impl Validate for RankedSnapshot {
    fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if duplicates(&self.ranked_items) {
            out.push("duplicate item in ranked list".to_string());
        }
        out
    }
}

impl Validate for InputCorpus {
    fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if duplicates(&self.items) {
            out.push("duplicate item in input corpus".to_string());
        }
        out
    }
}

impl Validate for BiasReport {
    fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        check_score(&mut out, "tib", self.tib);
        check_score(&mut out, "tob", self.tob);
        if !(-2.0..=2.0).contains(&self.trb) {
            out.push("trb out of [-2,2]".to_string());
        }
        if libm::fabs(self.trb - (self.tob.value() - self.tib.value())) > 1e-12 {
            out.push("trb differs from tob - tib".to_string());
        }
        if self.snapshot_count == 0 {
            out.push("report without snapshots".to_string());
        }
        if !(0.0..=1.0).contains(&self.scored_item_fraction) {
            out.push("scored_item_fraction out of [0,1]".to_string());
        }
        out
    }
}
