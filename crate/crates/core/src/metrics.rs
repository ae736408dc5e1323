//! Input, output and ranking bias of a query, and their time averages.
//!
//! Input bias is the plain mean over the retrieved (unranked) items. Output
//! bias is a rank-weighted mean of the result list: the mean of the prefix
//! means `B(q, 1) .. B(q, r)`, so an item at rank `j` of a list evaluated at
//! depth `r` carries weight `(1/r) * sum_{m=j..r} 1/m`. Ranking bias is the
//! difference between the two.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::model::{BiasReport, BiasScore, InputCorpus, Item, ItemId, QueryId, RankedSnapshot};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("bias is undefined over an empty set of scores")]
    EmptyInput,
    #[error("rank {rank} exceeds list length {len}")]
    RankOutOfRange { rank: usize, len: usize },
    #[error("rank depth must be at least 1")]
    ZeroRank,
    #[error("unknown item {0}")]
    UnknownItem(ItemId),
    #[error("no snapshot yields any scored item")]
    NoUsableSnapshots,
    #[error("input corpus has no scored items")]
    EmptyCorpus,
    #[error("snapshot for query {found} does not belong to query {expected}")]
    QueryMismatch { expected: QueryId, found: QueryId },
    #[error("two snapshots captured at {0}")]
    DuplicateTimestamp(i64),
}

/// Scores of a ranked list after items without a source bias were removed
/// and the remaining ranks closed up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoredList {
    pub scores: Vec<BiasScore>,
    pub dropped_count: usize,
}

impl ScoredList {
    pub fn new(scores: Vec<BiasScore>) -> Self {
        ScoredList {
            scores,
            dropped_count: 0,
        }
    }

    pub fn from_values(values: &[f64]) -> Result<Self, crate::model::ModelError> {
        let scores = values
            .iter()
            .map(|&v| BiasScore::new(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScoredList::new(scores))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// An output bias value together with the depth it was actually computed at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthBias {
    pub value: BiasScore,
    /// `min(requested depth, list length)`.
    pub depth: usize,
}

/// Per-snapshot output bias of one query over time.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBiasSeries {
    pub query: QueryId,
    /// `(captured_at, OB)` with strictly increasing timestamps.
    pub per_snapshot_ob: Vec<(i64, BiasScore)>,
    pub per_snapshot_skipped: usize,
}

/// Mean computed as `x0 + mean(x - x0)`, so a constant sequence returns its
/// value exactly.
fn mean(mut values: impl Iterator<Item = f64>) -> Option<f64> {
    let first = values.next()?;
    let (sum, n) = values.fold((0.0, 1usize), |(s, n), v| (s + (v - first), n + 1));
    Some(first + sum / n as f64)
}

/// Mean bias of all retrieved items. Values are summed in sorted order, so
/// the result is bit-for-bit independent of the order of `scores`.
pub fn input_bias(scores: &[BiasScore]) -> Result<BiasScore, MetricsError> {
    let mut values: Vec<f64> = scores.iter().map(|s| s.value()).collect();
    values.sort_unstable_by(f64::total_cmp);
    mean(values.into_iter())
        .map(BiasScore::saturating)
        .ok_or(MetricsError::EmptyInput)
}

/// Mean of the top `rank` scores.
pub fn bias_till_rank(list: &ScoredList, rank: usize) -> Result<BiasScore, MetricsError> {
    if rank == 0 {
        return Err(MetricsError::ZeroRank);
    }
    if rank > list.len() {
        return Err(MetricsError::RankOutOfRange {
            rank,
            len: list.len(),
        });
    }
    input_bias(&list.scores[..rank])
}

fn effective_depth(list: &ScoredList, rank: usize) -> Result<usize, MetricsError> {
    if rank == 0 {
        return Err(MetricsError::ZeroRank);
    }
    if list.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(rank.min(list.len()))
}

/// Rank-weighted output bias: the mean of the prefix means up to depth
/// `min(rank, len)`. Sums run over deviations from the top score, which
/// keeps constant lists exact.
pub fn output_bias(list: &ScoredList, rank: usize) -> Result<DepthBias, MetricsError> {
    let depth = effective_depth(list, rank)?;
    let anchor = list.scores[0].value();
    let mut prefix_sum = 0.0;
    let mut sum_of_means = 0.0;
    for (i, s) in list.scores[..depth].iter().enumerate() {
        prefix_sum += s.value() - anchor;
        sum_of_means += prefix_sum / (i + 1) as f64;
    }
    Ok(DepthBias {
        value: BiasScore::saturating(anchor + sum_of_means / depth as f64),
        depth,
    })
}

/// Per-rank weights of the output bias at `depth`:
/// `w_j = (1/depth) * sum_{m=j..depth} 1/m`. They sum to 1.
pub fn output_bias_weights(depth: usize) -> Vec<f64> {
    let mut weights = alloc::vec![0.0; depth];
    let mut tail = 0.0;
    for j in (1..=depth).rev() {
        tail += 1.0 / j as f64;
        weights[j - 1] = tail / depth as f64;
    }
    weights
}

/// Output bias through the closed-form per-rank weights. Agrees with
/// [`output_bias`] up to floating rounding.
pub fn output_bias_weighted(list: &ScoredList, rank: usize) -> Result<DepthBias, MetricsError> {
    let depth = effective_depth(list, rank)?;
    let anchor = list.scores[0].value();
    let value = output_bias_weights(depth)
        .iter()
        .zip(&list.scores)
        .map(|(w, s)| w * (s.value() - anchor))
        .sum::<f64>();
    Ok(DepthBias {
        value: BiasScore::saturating(anchor + value),
        depth,
    })
}

/// Ranking bias: the shift the ranking adds on top of the input.
#[inline]
pub fn ranking_bias(output: BiasScore, input: BiasScore) -> f64 {
    output.value() - input.value()
}

/// Resolves a snapshot against the item store, dropping unscored items and
/// closing ranks in their original order.
pub fn prepare_scored_list(
    snapshot: &RankedSnapshot,
    items: &BTreeMap<ItemId, Item>,
) -> Result<ScoredList, MetricsError> {
    scored_in_order(&snapshot.ranked_items, items)
}

pub(crate) fn scored_in_order(
    ids: &[ItemId],
    items: &BTreeMap<ItemId, Item>,
) -> Result<ScoredList, MetricsError> {
    let mut list = ScoredList::default();
    for id in ids {
        let item = items
            .get(id)
            .ok_or_else(|| MetricsError::UnknownItem(id.clone()))?;
        match item.source_bias {
            Some(s) => list.scores.push(s),
            None => list.dropped_count += 1,
        }
    }
    Ok(list)
}

/// Time-averaged report plus the per-snapshot series it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAveraged {
    pub report: BiasReport,
    pub series: SnapshotBiasSeries,
}

/// Time-averaged input, output and ranking bias for one query.
///
/// `TOB` is the mean of per-snapshot output bias at depth `rank`; snapshots
/// left empty by the drop rule are skipped and counted. `TIB` is the input
/// bias of every scored corpus item over the whole collection window.
pub fn time_averaged_metrics(
    snapshots: &[RankedSnapshot],
    corpus: &InputCorpus,
    items: &BTreeMap<ItemId, Item>,
    rank: usize,
) -> Result<TimeAveraged, MetricsError> {
    if rank == 0 {
        return Err(MetricsError::ZeroRank);
    }
    let query = &corpus.query;

    let mut ordered: Vec<&RankedSnapshot> = snapshots.iter().collect();
    ordered.sort_by_key(|s| s.captured_at);
    let mut per_snapshot_ob = Vec::with_capacity(ordered.len());
    let mut skipped = 0;
    let mut last_ts = None;
    for snap in ordered {
        if &snap.query != query {
            return Err(MetricsError::QueryMismatch {
                expected: query.clone(),
                found: snap.query.clone(),
            });
        }
        if last_ts == Some(snap.captured_at) {
            return Err(MetricsError::DuplicateTimestamp(snap.captured_at));
        }
        last_ts = Some(snap.captured_at);
        let list = prepare_scored_list(snap, items)?;
        if list.is_empty() {
            skipped += 1;
            continue;
        }
        per_snapshot_ob.push((snap.captured_at, output_bias(&list, rank)?.value));
    }
    if per_snapshot_ob.is_empty() {
        return Err(MetricsError::NoUsableSnapshots);
    }

    let corpus_scores = scored_in_order(&corpus.items, items)?;
    if corpus_scores.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let tib = input_bias(&corpus_scores.scores)?;
    let tob = BiasScore::saturating(
        mean(per_snapshot_ob.iter().map(|(_, ob)| ob.value())).unwrap_or_default(),
    );
    let report = BiasReport {
        query: query.clone(),
        tib,
        tob,
        trb: ranking_bias(tob, tib),
        rank_depth: rank,
        snapshot_count: per_snapshot_ob.len(),
        skipped_snapshots: skipped,
        scored_item_fraction: corpus_scores.len() as f64 / corpus.len() as f64,
    };
    Ok(TimeAveraged {
        report,
        series: SnapshotBiasSeries {
            query: query.clone(),
            per_snapshot_ob,
            per_snapshot_skipped: skipped,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn list(v: &[f64]) -> ScoredList {
        ScoredList::from_values(v).unwrap()
    }

    fn scores(v: &[f64]) -> Vec<BiasScore> {
        list(v).scores
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn input_bias_examples() {
        assert_eq!(input_bias(&scores(&[1.0, -1.0])).unwrap().value(), 0.0);
        assert!(close(
            input_bias(&scores(&[0.5, 0.25, 0.75, -0.5]))
                .unwrap()
                .value(),
            0.25
        ));
        assert_eq!(input_bias(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn bias_till_rank_examples() {
        assert_eq!(bias_till_rank(&list(&[0.3]), 1).unwrap().value(), 0.3);
        assert_eq!(bias_till_rank(&list(&[0.4, -0.4]), 2).unwrap().value(), 0.0);
        assert!(close(
            bias_till_rank(&list(&[1.0, 0.0, 0.0, 0.0, 0.0]), 5)
                .unwrap()
                .value(),
            0.2
        ));
        assert_eq!(
            bias_till_rank(&list(&[0.1]), 2),
            Err(MetricsError::RankOutOfRange { rank: 2, len: 1 })
        );
        assert_eq!(
            bias_till_rank(&list(&[0.1]), 0),
            Err(MetricsError::ZeroRank)
        );
    }

    #[test]
    fn output_bias_single_leader() {
        let l = list(&[1.0, 0.0, 0.0, 0.0, 0.0]);
        let ob = output_bias(&l, 5).unwrap();
        assert_eq!(ob.depth, 5);
        assert!(close(ob.value.value(), 137.0 / 300.0));
        assert!(close(
            output_bias_weighted(&l, 5).unwrap().value.value(),
            137.0 / 300.0
        ));
    }

    #[test]
    fn output_bias_constant_list() {
        let l = list(&[0.35; 5]);
        assert!(close(output_bias(&l, 5).unwrap().value.value(), 0.35));
    }

    #[test]
    fn output_bias_clips_depth_to_length() {
        let l = list(&[0.5, -0.5, 0.25]);
        let ob = output_bias(&l, 20).unwrap();
        assert_eq!(ob.depth, 3);
        assert_eq!(ob, output_bias(&l, 3).unwrap());
        assert_eq!(
            output_bias(&ScoredList::default(), 5),
            Err(MetricsError::EmptyInput)
        );
    }

    #[test]
    fn weights_sum_to_one_and_decrease() {
        for depth in 1..=25 {
            let w = output_bias_weights(depth);
            assert!(close(w.iter().sum::<f64>(), 1.0));
            assert!(w.windows(2).all(|p| p[0] > p[1]));
        }
    }

    #[test]
    fn ranking_bias_examples() {
        let s = |v| BiasScore::new(v).unwrap();
        assert!((ranking_bias(s(0.21), s(0.03)) - 0.18).abs() < 1e-12);
        assert!((ranking_bias(s(-0.48), s(-0.11)) - -0.37).abs() < 1e-12);
        assert_eq!(ranking_bias(s(0.4), s(0.4)), 0.0);
    }

    fn store(entries: &[(&str, Option<f64>, i64)]) -> BTreeMap<ItemId, Item> {
        entries
            .iter()
            .map(|&(id, bias, ts)| {
                let mut item = Item::new(
                    ItemId::new(id).unwrap(),
                    crate::model::UserId::new("u").unwrap(),
                    ts,
                );
                item.source_bias = bias.map(|b| BiasScore::new(b).unwrap());
                (item.id.clone(), item)
            })
            .collect()
    }

    fn snap(q: &str, ts: i64, ids: &[&str]) -> RankedSnapshot {
        RankedSnapshot::new(
            QueryId::new(q).unwrap(),
            ts,
            ids.iter().map(|s| ItemId::new(*s).unwrap()).collect(),
        )
    }

    #[test]
    fn drop_rule_closes_ranks() {
        let items = store(&[("a", Some(0.5), 0), ("b", None, 0), ("c", Some(-0.5), 0)]);
        let l = prepare_scored_list(&snap("q", 0, &["a", "b", "c"]), &items).unwrap();
        assert_eq!(l.scores, scores(&[0.5, -0.5]));
        assert_eq!(l.dropped_count, 1);

        let l = prepare_scored_list(&snap("q", 0, &["c", "a"]), &items).unwrap();
        assert_eq!(l.scores, scores(&[-0.5, 0.5]));
        assert_eq!(l.dropped_count, 0);

        let l = prepare_scored_list(&snap("q", 0, &["b", "b"]), &items).unwrap();
        assert!(l.is_empty());
        assert_eq!(l.dropped_count, 2);

        assert_eq!(
            prepare_scored_list(&snap("q", 0, &["zz"]), &items),
            Err(MetricsError::UnknownItem(ItemId::new("zz").unwrap()))
        );
    }

    #[test]
    fn time_average_over_snapshots() {
        // OB of [0.2] is 0.2, of [0.4] is 0.4; the empty snapshot is skipped.
        let items = store(&[
            ("a", Some(0.2), 0),
            ("b", Some(0.4), 0),
            ("c", None, 0),
            ("d", Some(-0.3), 0),
        ]);
        let corpus = InputCorpus::new(
            QueryId::new("q").unwrap(),
            ["a", "b", "c", "d"]
                .iter()
                .map(|s| ItemId::new(*s).unwrap())
                .collect(),
        );
        let snaps = [
            snap("q", 600, &["b"]),
            snap("q", 0, &["a"]),
            snap("q", 1200, &["c"]),
        ];
        let out = time_averaged_metrics(&snaps, &corpus, &items, 20).unwrap();
        let r = &out.report;
        assert!(close(r.tob.value(), 0.3));
        assert!(close(r.tib.value(), 0.1));
        assert_eq!(r.trb, r.tob.value() - r.tib.value());
        assert_eq!(r.snapshot_count, 2);
        assert_eq!(r.skipped_snapshots, 1);
        assert!(close(r.scored_item_fraction, 0.75));
        assert_eq!(out.series.per_snapshot_ob[0].0, 0);
        assert_eq!(out.series.per_snapshot_ob[1].0, 600);
        assert!(crate::model::Validate::validate(r).is_empty());
    }

    #[test]
    fn time_average_single_snapshot_equals_ob() {
        let items = store(&[
            ("a", Some(1.0), 0),
            ("b", Some(0.0), 0),
            ("c", Some(-1.0), 0),
        ]);
        let corpus = InputCorpus::new(
            QueryId::new("q").unwrap(),
            ["a", "b", "c"]
                .iter()
                .map(|s| ItemId::new(*s).unwrap())
                .collect(),
        );
        let s = snap("q", 5, &["a", "b", "c"]);
        let ob = output_bias(&prepare_scored_list(&s, &items).unwrap(), 20).unwrap();
        let out = time_averaged_metrics(&[s], &corpus, &items, 20).unwrap();
        assert_eq!(out.report.tob, ob.value);
    }

    #[test]
    fn time_average_errors() {
        let items = store(&[("a", None, 0), ("b", Some(0.1), 0)]);
        let q = QueryId::new("q").unwrap();
        let unscored = InputCorpus::new(q.clone(), vec![ItemId::new("a").unwrap()]);
        let scored = InputCorpus::new(q.clone(), vec![ItemId::new("b").unwrap()]);
        assert_eq!(
            time_averaged_metrics(&[snap("q", 0, &["a"])], &scored, &items, 20),
            Err(MetricsError::NoUsableSnapshots)
        );
        assert_eq!(
            time_averaged_metrics(&[snap("q", 0, &["b"])], &unscored, &items, 20),
            Err(MetricsError::EmptyCorpus)
        );
        assert!(matches!(
            time_averaged_metrics(&[snap("other", 0, &["b"])], &scored, &items, 20),
            Err(MetricsError::QueryMismatch { .. })
        ));
        assert_eq!(
            time_averaged_metrics(
                &[snap("q", 0, &["b"]), snap("q", 0, &["b"])],
                &scored,
                &items,
                20
            ),
            Err(MetricsError::DuplicateTimestamp(0))
        );
    }
}
