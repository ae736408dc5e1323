//! Alternative rankings of a query's input corpus, used to compare the
//! ranking bias of the observed (black-box) ranking against simple
//! engagement- or recency-driven orders.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::metrics::{output_bias, prepare_scored_list, ranking_bias, MetricsError};
use crate::model::{BiasScore, InputCorpus, Item, ItemId, RankedSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RankingStrategy {
    /// The engine's own captured ranking; only available from snapshots.
    Observed,
    #[cfg_attr(feature = "serde", serde(rename = "most-retweeted"))]
    MostRetweetedFirst,
    #[cfg_attr(feature = "serde", serde(rename = "most-favorited"))]
    MostFavoritedFirst,
    ReverseChronological,
}

impl RankingStrategy {
    pub const ALL: [RankingStrategy; 4] = [
        RankingStrategy::Observed,
        RankingStrategy::MostRetweetedFirst,
        RankingStrategy::MostFavoritedFirst,
        RankingStrategy::ReverseChronological,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RankingStrategy::Observed => "observed",
            RankingStrategy::MostRetweetedFirst => "most-retweeted",
            RankingStrategy::MostFavoritedFirst => "most-favorited",
            RankingStrategy::ReverseChronological => "reverse-chronological",
        }
    }

    /// Primary sort key; larger ranks first.
    fn key(self, item: &Item) -> i128 {
        match self {
            RankingStrategy::Observed => 0,
            RankingStrategy::MostRetweetedFirst => item.retweet_count as i128,
            RankingStrategy::MostFavoritedFirst => item.favorite_count as i128,
            RankingStrategy::ReverseChronological => item.created_at as i128,
        }
    }
}

impl fmt::Display for RankingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for RankingStrategy {
    type Err = alloc::string::String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RankingStrategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| alloc::format!("unknown ranking strategy {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RerankError {
    #[error("input corpus is empty")]
    EmptyCorpus,
    #[error("the observed ranking can only be read from captured snapshots")]
    ObservedNeedsSnapshot,
    #[error("page size must be at least 1")]
    ZeroPageSize,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Top-`k` of the corpus under `strategy`, descending by the strategy key,
/// ties broken by recency (newest first) then by id ascending.
///
/// The snapshot is stamped with the newest `created_at` in the corpus.
pub fn rerank(
    corpus: &InputCorpus,
    items: &BTreeMap<ItemId, Item>,
    strategy: RankingStrategy,
    k: usize,
) -> Result<RankedSnapshot, RerankError> {
    if strategy == RankingStrategy::Observed {
        return Err(RerankError::ObservedNeedsSnapshot);
    }
    if k == 0 {
        return Err(RerankError::ZeroPageSize);
    }
    if corpus.is_empty() {
        return Err(RerankError::EmptyCorpus);
    }
    let mut seen = BTreeSet::new();
    let mut pool = Vec::with_capacity(corpus.len());
    for id in &corpus.items {
        if !seen.insert(id) {
            continue;
        }
        let item = items
            .get(id)
            .ok_or_else(|| MetricsError::UnknownItem(id.clone()))?;
        pool.push(item);
    }
    let captured_at = pool.iter().map(|i| i.created_at).max().unwrap_or_default();
    let order = |a: &&Item, b: &&Item| -> Ordering {
        (Reverse(strategy.key(a)), Reverse(a.created_at), &a.id).cmp(&(
            Reverse(strategy.key(b)),
            Reverse(b.created_at),
            &b.id,
        ))
    };
    if pool.len() > k {
        pool.select_nth_unstable_by(k - 1, order);
        pool.truncate(k);
    }
    pool.sort_unstable_by(order);
    Ok(RankedSnapshot::new(
        corpus.query.clone(),
        captured_at,
        pool.into_iter().map(|i| i.id.clone()).collect(),
    ))
}

/// Output bias of the re-ranked top-`k` (after dropping unscored items)
/// minus the given input bias.
pub fn strategy_ranking_bias(
    corpus: &InputCorpus,
    items: &BTreeMap<ItemId, Item>,
    strategy: RankingStrategy,
    k: usize,
    input_bias: BiasScore,
) -> Result<f64, RerankError> {
    let snapshot = rerank(corpus, items, strategy, k)?;
    let list = prepare_scored_list(&snapshot, items)?;
    let ob = output_bias(&list, k)?;
    Ok(ranking_bias(ob.value, input_bias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{QueryId, UserId};
    use alloc::vec;

    fn item(id: &str, rt: u64, fav: u64, ts: i64, bias: f64) -> Item {
        Item::new(ItemId::new(id).unwrap(), UserId::new("u").unwrap(), ts)
            .with_counts(rt, fav)
            .with_bias(BiasScore::new(bias).unwrap())
    }

    fn fixture(items: Vec<Item>) -> (InputCorpus, BTreeMap<ItemId, Item>) {
        let corpus = InputCorpus::new(
            QueryId::new("q").unwrap(),
            items.iter().map(|i| i.id.clone()).collect(),
        );
        (
            corpus,
            items.into_iter().map(|i| (i.id.clone(), i)).collect(),
        )
    }

    fn names(s: &RankedSnapshot) -> Vec<&str> {
        s.ranked_items.iter().map(|i| i.as_str()).collect()
    }

    #[test]
    fn most_retweeted_order() {
        let (c, store) = fixture(vec![
            item("a", 5, 0, 0, 0.0),
            item("b", 9, 0, 0, 0.0),
            item("c", 1, 0, 0, 0.0),
        ]);
        let s = rerank(&c, &store, RankingStrategy::MostRetweetedFirst, 3).unwrap();
        assert_eq!(names(&s), vec!["b", "a", "c"]);
    }

    #[test]
    fn ties_break_by_recency_then_id() {
        let (c, store) = fixture(vec![
            item("d", 1, 1, 10, 0.0),
            item("b", 1, 1, 20, 0.0),
            item("a", 1, 1, 10, 0.0),
            item("c", 1, 1, 30, 0.0),
        ]);
        let s = rerank(&c, &store, RankingStrategy::MostFavoritedFirst, 10).unwrap();
        assert_eq!(names(&s), vec!["c", "b", "a", "d"]);
        assert_eq!(s.captured_at, 30);
        let s = rerank(&c, &store, RankingStrategy::ReverseChronological, 2).unwrap();
        assert_eq!(names(&s), vec!["c", "b"]);
    }

    #[test]
    fn errors() {
        let (c, store) = fixture(vec![item("a", 1, 1, 1, 0.0)]);
        assert_eq!(
            rerank(&c, &store, RankingStrategy::Observed, 3),
            Err(RerankError::ObservedNeedsSnapshot)
        );
        let empty = InputCorpus::new(QueryId::new("q").unwrap(), vec![]);
        assert_eq!(
            rerank(&empty, &store, RankingStrategy::MostRetweetedFirst, 3),
            Err(RerankError::EmptyCorpus)
        );
        assert_eq!(
            rerank(&c, &store, RankingStrategy::MostRetweetedFirst, 0),
            Err(RerankError::ZeroPageSize)
        );
    }

    #[test]
    fn uniform_scores_have_no_ranking_bias() {
        let (c, store) = fixture(
            (0..30)
                .map(|i| item(&alloc::format!("i{i}"), i, 30 - i, i as i64, 0.4))
                .collect(),
        );
        let ib = BiasScore::new(0.4).unwrap();
        for s in [
            RankingStrategy::MostRetweetedFirst,
            RankingStrategy::MostFavoritedFirst,
            RankingStrategy::ReverseChronological,
        ] {
            assert_eq!(strategy_ranking_bias(&c, &store, s, 20, ib).unwrap(), 0.0);
        }
    }

    #[test]
    fn popularity_plant_shows_in_sign() {
        // Republican-authored items carry all the retweets.
        let mut items = Vec::new();
        for i in 0..20 {
            items.push(item(&alloc::format!("r{i}"), 100 + i, 0, 0, -1.0));
            items.push(item(&alloc::format!("d{i}"), i, 0, 0, 1.0));
        }
        let (c, store) = fixture(items);
        let rb = strategy_ranking_bias(
            &c,
            &store,
            RankingStrategy::MostRetweetedFirst,
            20,
            BiasScore::NEUTRAL,
        )
        .unwrap();
        assert!(rb < 0.0);
        assert_eq!(rb, -1.0);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in RankingStrategy::ALL {
            assert_eq!(s.name().parse::<RankingStrategy>().unwrap(), s);
        }
    }
}
