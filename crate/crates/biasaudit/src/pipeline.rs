//! The batch workflows behind the CLI, as plain functions over a loaded
//! bundle. Formatting lives in `report`.

use std::collections::{BTreeMap, BTreeSet};

use biasaudit_core::evaluation::{
    bin_averages, confusion, coverage_accuracy, select_threshold, source_content_crosstab,
    BinAverage, BinningScheme, ConfusionMatrix, CoverageReport, CrossTab, EvalError,
    ThresholdSweep,
};
use biasaudit_core::leaning::{
    discretize, FitDiagnostics, LeaningConfig, LeaningError, LeaningModel,
};
use biasaudit_core::metrics::time_averaged_metrics;
use biasaudit_core::rankers::{strategy_ranking_bias, RankingStrategy};
use biasaudit_core::{BiasReport, BiasScore, ItemId, LeaningLabel, QueryId, UserId};

use crate::bundle::{CorpusBundle, UserScore};

/// Population id recorded with the normalization scale.
pub const REFERENCE_POPULATION: &str = "bundle-users";

#[derive(Debug, Clone, PartialEq)]
pub struct InferOutcome {
    pub scores: BTreeMap<UserId, UserScore>,
    pub diagnostics: FitDiagnostics,
    pub total: usize,
    pub inferred: usize,
}

impl InferOutcome {
    pub fn coverage(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.inferred as f64 / self.total as f64
        }
    }
}

/// Fits on the bundle's follow graph and scores every user in it.
pub fn infer_scores(
    bundle: &CorpusBundle,
    config: LeaningConfig,
) -> Result<InferOutcome, LeaningError> {
    let (model, diagnostics) = LeaningModel::fit(
        &bundle.followings,
        &bundle.topic_labels,
        &bundle.seed_dem,
        &bundle.seed_rep,
        REFERENCE_POPULATION,
        config,
    )?;
    let mut scores = BTreeMap::new();
    let mut inferred = 0;
    for user in bundle.followings.keys() {
        let inf = model.infer(&bundle.followings, &bundle.topic_labels, user);
        if inf.label().is_inferred() {
            inferred += 1;
        }
        scores.insert(
            user.clone(),
            UserScore {
                raw: inf.raw(),
                normalized: inf.score(),
                label: inf.label(),
            },
        );
    }
    Ok(InferOutcome {
        total: scores.len(),
        inferred,
        scores,
        diagnostics,
    })
}

/// A query that produced no result, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryFailure {
    pub query: QueryId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsOutcome {
    /// Sorted by query id.
    pub reports: Vec<BiasReport>,
    pub failures: Vec<QueryFailure>,
}

fn all_queries(bundle: &CorpusBundle) -> BTreeSet<QueryId> {
    bundle
        .input_corpora
        .keys()
        .cloned()
        .chain(bundle.snapshots.iter().map(|s| s.query.clone()))
        .collect()
}

/// Time-averaged biases per query. Items must already carry source bias.
pub fn query_metrics(bundle: &CorpusBundle, rank: usize) -> MetricsOutcome {
    let by_query = bundle.snapshots_by_query();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for query in all_queries(bundle) {
        let fail = |reason: String| QueryFailure {
            query: query.clone(),
            reason,
        };
        let Some(corpus) = bundle.input_corpora.get(&query) else {
            failures.push(fail("no input stream".into()));
            continue;
        };
        let Some(snaps) = by_query.get(&query) else {
            failures.push(fail("no snapshots".into()));
            continue;
        };
        match time_averaged_metrics(snaps, corpus, &bundle.items, rank) {
            Ok(t) => reports.push(t.report),
            Err(e) => failures.push(fail(e.to_string())),
        }
    }
    MetricsOutcome { reports, failures }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryAverage {
    pub category: String,
    pub queries: usize,
    pub tib: f64,
    pub tob: f64,
    pub trb: f64,
}

/// Plain means of the per-query columns for each category with at least
/// one report.
pub fn category_averages(
    reports: &[BiasReport],
    categories: &BTreeMap<QueryId, String>,
) -> Vec<CategoryAverage> {
    let mut acc: BTreeMap<&str, (usize, f64, f64, f64)> = BTreeMap::new();
    for r in reports {
        if let Some(cat) = categories.get(&r.query) {
            let e = acc.entry(cat.as_str()).or_default();
            e.0 += 1;
            e.1 += r.tib.value();
            e.2 += r.tob.value();
            e.3 += r.trb;
        }
    }
    acc.into_iter()
        .map(|(category, (n, tib, tob, trb))| {
            let n_f = n as f64;
            CategoryAverage {
                category: category.to_string(),
                queries: n,
                tib: tib / n_f,
                tob: tob / n_f,
                trb: trb / n_f,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankRow {
    pub query: QueryId,
    pub tib: BiasScore,
    /// Ranking bias of the captured snapshots, when there are any.
    pub observed: Option<f64>,
    /// Same order as the requested strategies; `None` where the strategy
    /// could not be evaluated.
    pub strategies: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankOutcome {
    pub strategies: Vec<RankingStrategy>,
    pub rows: Vec<RerankRow>,
    pub failures: Vec<QueryFailure>,
}

/// Ranking bias of each strategy against the query's input bias. Re-ranked
/// lists are built once over the whole input stream with the stored
/// engagement counts. `Observed` in `strategies` is ignored; the observed
/// column is always filled when snapshots exist.
pub fn rerank_comparison(
    bundle: &CorpusBundle,
    strategies: &[RankingStrategy],
    rank: usize,
) -> RerankOutcome {
    let strategies: Vec<RankingStrategy> = strategies
        .iter()
        .copied()
        .filter(|s| *s != RankingStrategy::Observed)
        .collect();
    let observed: BTreeMap<QueryId, BiasReport> = query_metrics(bundle, rank)
        .reports
        .into_iter()
        .map(|r| (r.query.clone(), r))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (query, corpus) in &bundle.input_corpora {
        let scored: Vec<BiasScore> = corpus
            .items
            .iter()
            .filter_map(|id| bundle.items.get(id).and_then(|i| i.source_bias))
            .collect();
        let tib = match biasaudit_core::metrics::input_bias(&scored) {
            Ok(t) => t,
            Err(_) => {
                failures.push(QueryFailure {
                    query: query.clone(),
                    reason: "no scored items in input stream".into(),
                });
                continue;
            }
        };
        // Keep the observed column consistent with the metrics report.
        let tib = observed.get(query).map(|r| r.tib).unwrap_or(tib);
        let values = strategies
            .iter()
            .map(|&s| strategy_ranking_bias(corpus, &bundle.items, s, rank, tib).ok())
            .collect();
        rows.push(RerankRow {
            query: query.clone(),
            tib,
            observed: observed.get(query).map(|r| r.trb),
            strategies: values,
        });
    }
    RerankOutcome {
        strategies,
        rows,
        failures,
    }
}

/// Inputs to the evaluation workflow, keyed by subject id (user or item).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalInputs {
    /// Crowd scores of users.
    pub amt: BTreeMap<String, BiasScore>,
    /// Inferred user scores.
    pub inferred: BTreeMap<String, UserScore>,
    pub truth: Option<BTreeMap<String, LeaningLabel>>,
    /// Crowd content scores of items, with each item's author.
    pub content: Option<(BTreeMap<String, BiasScore>, BTreeMap<ItemId, UserId>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmtEvaluation {
    /// Binned by inferred score, averaging crowd scores.
    pub by_inferred: Vec<BinAverage>,
    /// Binned by crowd score, averaging inferred scores.
    pub by_amt: Vec<BinAverage>,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub sweep: ThresholdSweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub amt: Option<AmtEvaluation>,
    pub coverage: Option<CoverageReport>,
    pub crosstab: Option<CrossTab>,
}

fn labels_at(inferred: &BTreeMap<String, UserScore>, x: f64) -> BTreeMap<String, LeaningLabel> {
    inferred
        .iter()
        .map(|(k, s)| {
            let label = match s.normalized {
                Some(n) if s.label.is_inferred() => discretize(n, x),
                _ => LeaningLabel::Uninferable,
            };
            (k.clone(), label)
        })
        .collect()
}

/// Runs every evaluation whose inputs are present. Labels are re-derived
/// from the normalized scores at threshold `x`.
pub fn evaluate(inputs: &EvalInputs, x: f64, candidates: &[f64]) -> Result<EvalReport, EvalError> {
    let labels = labels_at(&inputs.inferred, x);
    let amt = if inputs.amt.is_empty() {
        None
    } else {
        let scores: BTreeMap<String, BiasScore> = inputs
            .inferred
            .iter()
            .filter(|(_, s)| s.label.is_inferred())
            .filter_map(|(k, s)| s.normalized.map(|n| (k.clone(), n)))
            .collect();
        let pairs: Vec<(BiasScore, BiasScore)> = inputs
            .amt
            .iter()
            .filter_map(|(k, a)| scores.get(k).map(|i| (*i, *a)))
            .collect();
        if pairs.is_empty() {
            return Err(EvalError::NoOverlap);
        }
        Some(AmtEvaluation {
            by_inferred: bin_averages(pairs.iter().copied(), BinningScheme::ThreeBin),
            by_amt: bin_averages(pairs.iter().map(|(i, a)| (*a, *i)), BinningScheme::ThreeBin),
            threshold: x,
            confusion: confusion(&inputs.amt, &labels)?,
            sweep: select_threshold(candidates, &inputs.amt, &scores)?,
        })
    };
    let coverage = inputs.truth.as_ref().map(|t| coverage_accuracy(t, &labels));
    let crosstab = match &inputs.content {
        Some((content, authors)) => {
            let source: BTreeMap<String, LeaningLabel> = content
                .keys()
                .filter_map(|item| {
                    let author = authors.get(item.as_str())?;
                    Some((item.clone(), *labels.get(author.as_str())?))
                })
                .collect();
            Some(source_content_crosstab(content, &source)?)
        }
        None => None,
    };
    Ok(EvalReport {
        amt,
        coverage,
        crosstab,
    })
}
