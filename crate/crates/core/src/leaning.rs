//! Source-leaning inference from interest profiles.
//!
//! A user's interests are the topics of the accounts they follow. Topic
//! counts become a tf-idf interest vector (`tf = 1 + ln f`,
//! `idf = ln(N / n_t)` over a reference population). Two seed sets of known
//! democratic and republican users are aggregated into normalized vectors,
//! and a user's raw bias is `cos(I_u, I_D) - cos(I_u, I_R)`. Raw values are
//! scaled by the largest absolute raw value of the reference population and
//! discretized with a symmetric neutral zone `(-x, x)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{BiasScore, LeaningLabel, Topic, UserId};

/// Default minimum number of followings for an inference.
pub const DEFAULT_MIN_FOLLOWINGS: usize = 10;
/// Default half-width of the neutral zone.
pub const DEFAULT_NEUTRAL_THRESHOLD: f64 = 0.03;

/// Who follows whom.
pub type FollowGraph = BTreeMap<UserId, Vec<UserId>>;
/// Topics attached to (mostly expert) accounts.
pub type TopicLabels = BTreeMap<UserId, Vec<Topic>>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LeaningError {
    #[error("user {0} has no known followings")]
    NoFollowings(UserId),
    #[error("user {user} follows {count} accounts, fewer than {min}")]
    TooFewFollowings {
        user: UserId,
        count: usize,
        min: usize,
    },
    #[error("seed set is empty")]
    EmptySeedSet,
    #[error("every interest vector in the seed set is zero")]
    AllZeroVectors,
    #[error("interest vector is zero; cosine similarity undefined")]
    UninferableBias,
    #[error("normalization scale must be positive, got {0}")]
    InvalidParams(f64),
}

/// Which side of the spectrum a seed set represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Democratic,
    Republican,
}

/// Topic counts of one user: how many followed accounts carry each topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicFrequencyList {
    pub user: UserId,
    pub entries: BTreeMap<Topic, u32>,
}

/// Sparse tf-idf interest profile.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterestVector {
    pub user: Option<UserId>,
    pub weights: BTreeMap<Topic, f64>,
}

impl InterestVector {
    pub fn is_zero(&self) -> bool {
        self.weights.values().all(|&w| w == 0.0)
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.weights)
    }

    pub fn scaled(&self, factor: f64) -> InterestVector {
        InterestVector {
            user: self.user.clone(),
            weights: self
                .weights
                .iter()
                .map(|(t, w)| (t.clone(), w * factor))
                .collect(),
        }
    }
}

/// Normalized aggregate vector of a seed set; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedAggregate {
    pub side: Side,
    pub vector: BTreeMap<Topic, f64>,
    pub member_count: usize,
}

/// Scale used to map raw bias into `[-1, 1]`, tied to the population it was
/// measured on.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalizationParams {
    pub max_abs_raw: f64,
    pub population_id: String,
}

impl NormalizationParams {
    pub fn new(max_abs_raw: f64, population_id: impl Into<String>) -> Result<Self, LeaningError> {
        if max_abs_raw.is_nan() || max_abs_raw <= 0.0 || !max_abs_raw.is_finite() {
            return Err(LeaningError::InvalidParams(max_abs_raw));
        }
        Ok(NormalizationParams {
            max_abs_raw,
            population_id: population_id.into(),
        })
    }

    /// Largest absolute raw bias over a reference population.
    pub fn from_raw_scores(
        raw: impl IntoIterator<Item = f64>,
        population_id: impl Into<String>,
    ) -> Result<Self, LeaningError> {
        let max = raw.into_iter().map(libm::fabs).fold(0.0, f64::max);
        NormalizationParams::new(max, population_id)
    }
}

/// Logarithm used by the tf-idf weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
    Ten,
}

impl LogBase {
    #[inline]
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => libm::log(x),
            LogBase::Two => libm::log2(x),
            LogBase::Ten => libm::log10(x),
        }
    }
}

/// Number of users in the reference population, and how many of them follow
/// at least one account carrying each topic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DocumentFrequencies {
    pub population_size: usize,
    pub counts: BTreeMap<Topic, usize>,
}

impl DocumentFrequencies {
    pub fn new(population_size: usize, counts: BTreeMap<Topic, usize>) -> Self {
        DocumentFrequencies {
            population_size,
            counts,
        }
    }

    /// Every user present in `graph` counts toward the population size.
    pub fn from_graph(graph: &FollowGraph, labels: &TopicLabels) -> Self {
        let mut counts: BTreeMap<Topic, usize> = BTreeMap::new();
        for followees in graph.values() {
            for topic in count_topics(followees, labels).into_keys() {
                *counts.entry(topic).or_default() += 1;
            }
        }
        DocumentFrequencies {
            population_size: graph.len(),
            counts,
        }
    }
}

/// Topic counts over a list of followed accounts. Repeated followees and
/// repeated labels on one account count once.
pub fn count_topics(followees: &[UserId], labels: &TopicLabels) -> BTreeMap<Topic, u32> {
    let distinct: BTreeSet<&UserId> = followees.iter().collect();
    let mut out: BTreeMap<Topic, u32> = BTreeMap::new();
    for v in distinct {
        if let Some(topics) = labels.get(v) {
            let topics: BTreeSet<&Topic> = topics.iter().collect();
            for t in topics {
                *out.entry(t.clone()).or_default() += 1;
            }
        }
    }
    out
}

/// Topic frequency list for `user`, refusing users with fewer than
/// `min_followings` distinct followings.
pub fn build_topic_frequencies(
    graph: &FollowGraph,
    labels: &TopicLabels,
    user: &UserId,
    min_followings: usize,
) -> Result<TopicFrequencyList, LeaningError> {
    let followees = match graph.get(user) {
        Some(f) if !f.is_empty() => f,
        _ => return Err(LeaningError::NoFollowings(user.clone())),
    };
    let count = followees.iter().collect::<BTreeSet<_>>().len();
    if count < min_followings {
        return Err(LeaningError::TooFewFollowings {
            user: user.clone(),
            count,
            min: min_followings,
        });
    }
    Ok(TopicFrequencyList {
        user: user.clone(),
        entries: count_topics(followees, labels),
    })
}

/// An interest vector plus the topics that had to be dropped because the
/// reference population never saw them.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdf {
    pub vector: InterestVector,
    pub unseen_topics: Vec<Topic>,
}

pub fn tfidf_vector(freqs: &TopicFrequencyList, df: &DocumentFrequencies) -> TfIdf {
    tfidf_vector_with_base(freqs, df, LogBase::Natural)
}

/// `weight(t) = (1 + log f) * log(N / n_t)` in the given base.
pub fn tfidf_vector_with_base(
    freqs: &TopicFrequencyList,
    df: &DocumentFrequencies,
    base: LogBase,
) -> TfIdf {
    let n_total = df.population_size as f64;
    let mut weights = BTreeMap::new();
    let mut unseen_topics = Vec::new();
    for (topic, &f) in &freqs.entries {
        match df.counts.get(topic) {
            Some(&n) if n >= 1 && f >= 1 => {
                let tf = 1.0 + base.log(f as f64);
                // n <= N for a consistent population; clamp keeps weights >= 0
                // when the caller mixes populations.
                let idf = base.log(n_total / n as f64).max(0.0);
                weights.insert(topic.clone(), tf * idf);
            }
            _ => unseen_topics.push(topic.clone()),
        }
    }
    TfIdf {
        vector: InterestVector {
            user: Some(freqs.user.clone()),
            weights,
        },
        unseen_topics,
    }
}

/// Component-wise sum of the members' vectors, scaled to sum to 1.
pub fn aggregate_seed(
    vectors: &[InterestVector],
    side: Side,
) -> Result<SeedAggregate, LeaningError> {
    if vectors.is_empty() {
        return Err(LeaningError::EmptySeedSet);
    }
    let mut sum: BTreeMap<Topic, f64> = BTreeMap::new();
    for v in vectors {
        for (t, w) in &v.weights {
            *sum.entry(t.clone()).or_default() += w;
        }
    }
    let total: f64 = sum.values().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(LeaningError::AllZeroVectors);
    }
    sum.retain(|_, w| *w > 0.0);
    sum.values_mut().for_each(|w| *w /= total);
    Ok(SeedAggregate {
        side,
        vector: sum,
        member_count: vectors.len(),
    })
}

fn l2_norm(v: &BTreeMap<Topic, f64>) -> f64 {
    libm::sqrt(v.values().map(|w| w * w).sum())
}

/// Cosine similarity of two sparse vectors; `None` if either is zero.
pub fn cosine_similarity(a: &BTreeMap<Topic, f64>, b: &BTreeMap<Topic, f64>) -> Option<f64> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, w)| large.get(t).map(|x| w * x))
        .sum();
    let denom = l2_norm(a) * l2_norm(b);
    (denom > 0.0).then(|| dot / denom)
}

/// `cos(I_u, I_D) - cos(I_u, I_R)`, each cosine clamped to `[0, 1]`.
pub fn raw_bias(
    user: &InterestVector,
    dem: &SeedAggregate,
    rep: &SeedAggregate,
) -> Result<f64, LeaningError> {
    let cd = cosine_similarity(&user.weights, &dem.vector).ok_or(LeaningError::UninferableBias)?;
    let cr = cosine_similarity(&user.weights, &rep.vector).ok_or(LeaningError::UninferableBias)?;
    Ok(cd.clamp(0.0, 1.0) - cr.clamp(0.0, 1.0))
}

/// Scales raw bias by the population maximum and clamps into `[-1, 1]`.
/// Zero stays zero and sign is preserved.
pub fn normalize_bias(raw: f64, params: &NormalizationParams) -> BiasScore {
    BiasScore::saturating(raw / params.max_abs_raw)
}

/// `[x, 1]` is democratic, `[-1, -x]` republican, `(-x, x)` neutral.
pub fn discretize(score: BiasScore, x: f64) -> LeaningLabel {
    let s = score.value();
    if s >= x {
        LeaningLabel::Democratic
    } else if s <= -x {
        LeaningLabel::Republican
    } else {
        LeaningLabel::Neutral
    }
}

/// Why no leaning could be inferred for a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UninferableReason {
    NoFollowings,
    TooFewFollowings,
    NoTopicSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inference {
    Inferred {
        raw: f64,
        score: BiasScore,
        label: LeaningLabel,
    },
    Uninferable(UninferableReason),
}

impl Inference {
    pub fn label(&self) -> LeaningLabel {
        match self {
            Inference::Inferred { label, .. } => *label,
            Inference::Uninferable(_) => LeaningLabel::Uninferable,
        }
    }

    pub fn score(&self) -> Option<BiasScore> {
        match self {
            Inference::Inferred { score, .. } => Some(*score),
            Inference::Uninferable(_) => None,
        }
    }

    pub fn raw(&self) -> Option<f64> {
        match self {
            Inference::Inferred { raw, .. } => Some(*raw),
            Inference::Uninferable(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaningConfig {
    pub min_followings: usize,
    pub neutral_threshold: f64,
}

impl Default for LeaningConfig {
    fn default() -> Self {
        LeaningConfig {
            min_followings: DEFAULT_MIN_FOLLOWINGS,
            neutral_threshold: DEFAULT_NEUTRAL_THRESHOLD,
        }
    }
}

/// Counters collected while fitting a [`LeaningModel`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FitDiagnostics {
    pub population_size: usize,
    pub seed_members_used: [usize; 2],
    pub seed_members_skipped: [usize; 2],
    pub reference_inferable: usize,
    pub unseen_topic_drops: usize,
}

/// Everything needed to infer users: document frequencies, both seed
/// aggregates and the normalization scale. Immutable once fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaningModel {
    pub doc_freq: DocumentFrequencies,
    pub dem: SeedAggregate,
    pub rep: SeedAggregate,
    pub params: NormalizationParams,
    pub config: LeaningConfig,
}

impl LeaningModel {
    /// Fits the model with every user in `graph` as the reference population
    /// for both idf and the normalization scale.
    pub fn fit(
        graph: &FollowGraph,
        labels: &TopicLabels,
        seeds_dem: &[UserId],
        seeds_rep: &[UserId],
        population_id: &str,
        config: LeaningConfig,
    ) -> Result<(LeaningModel, FitDiagnostics), LeaningError> {
        let doc_freq = DocumentFrequencies::from_graph(graph, labels);
        let mut diag = FitDiagnostics {
            population_size: doc_freq.population_size,
            ..FitDiagnostics::default()
        };

        let mut seed_vectors = |seeds: &[UserId], slot: usize| {
            let mut out = Vec::new();
            for u in seeds {
                match build_topic_frequencies(graph, labels, u, config.min_followings) {
                    Ok(freqs) => {
                        let v = tfidf_vector(&freqs, &doc_freq).vector;
                        if v.is_zero() {
                            diag.seed_members_skipped[slot] += 1;
                        } else {
                            diag.seed_members_used[slot] += 1;
                            out.push(v);
                        }
                    }
                    Err(_) => diag.seed_members_skipped[slot] += 1,
                }
            }
            out
        };
        let dem_vectors = seed_vectors(seeds_dem, 0);
        let rep_vectors = seed_vectors(seeds_rep, 1);
        if seeds_dem.is_empty() || seeds_rep.is_empty() {
            return Err(LeaningError::EmptySeedSet);
        }
        let dem = aggregate_seed(&dem_vectors, Side::Democratic)
            .map_err(|_| LeaningError::AllZeroVectors)?;
        let rep = aggregate_seed(&rep_vectors, Side::Republican)
            .map_err(|_| LeaningError::AllZeroVectors)?;

        let mut raws = Vec::new();
        for u in graph.keys() {
            if let Ok(freqs) = build_topic_frequencies(graph, labels, u, config.min_followings) {
                let tfidf = tfidf_vector(&freqs, &doc_freq);
                diag.unseen_topic_drops += tfidf.unseen_topics.len();
                if let Ok(raw) = raw_bias(&tfidf.vector, &dem, &rep) {
                    raws.push(raw);
                }
            }
        }
        diag.reference_inferable = raws.len();
        let params = NormalizationParams::from_raw_scores(raws, population_id)?;
        Ok((
            LeaningModel {
                doc_freq,
                dem,
                rep,
                params,
                config,
            },
            diag,
        ))
    }

    pub fn interest_vector(
        &self,
        graph: &FollowGraph,
        labels: &TopicLabels,
        user: &UserId,
    ) -> Result<TfIdf, LeaningError> {
        let freqs = build_topic_frequencies(graph, labels, user, self.config.min_followings)?;
        Ok(tfidf_vector(&freqs, &self.doc_freq))
    }

    pub fn infer(&self, graph: &FollowGraph, labels: &TopicLabels, user: &UserId) -> Inference {
        infer_user(user, graph, labels, self)
    }
}

/// Full pipeline for one user: topic counts, tf-idf vector, raw bias against
/// both seed aggregates, normalization, discretization.
pub fn infer_user(
    user: &UserId,
    graph: &FollowGraph,
    labels: &TopicLabels,
    model: &LeaningModel,
) -> Inference {
    let tfidf = match model.interest_vector(graph, labels, user) {
        Ok(v) => v,
        Err(LeaningError::TooFewFollowings { .. }) => {
            return Inference::Uninferable(UninferableReason::TooFewFollowings)
        }
        Err(_) => return Inference::Uninferable(UninferableReason::NoFollowings),
    };
    match raw_bias(&tfidf.vector, &model.dem, &model.rep) {
        Ok(raw) => {
            let score = normalize_bias(raw, &model.params);
            Inference::Inferred {
                raw,
                score,
                label: discretize(score, model.config.neutral_threshold),
            }
        }
        Err(_) => Inference::Uninferable(UninferableReason::NoTopicSignal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn uid(s: &str) -> UserId {
        UserId::new(s).unwrap()
    }

    fn topic(s: &str) -> Topic {
        Topic::new(s).unwrap()
    }

    fn vector(entries: &[(&str, f64)]) -> InterestVector {
        InterestVector {
            user: None,
            weights: entries.iter().map(|(t, w)| (topic(t), *w)).collect(),
        }
    }

    fn aggregate(entries: &[(&str, f64)], side: Side) -> SeedAggregate {
        aggregate_seed(&[vector(entries)], side).unwrap()
    }

    #[test]
    fn topic_counts_from_followings() {
        let mut graph = FollowGraph::new();
        let mut labels = TopicLabels::new();
        let mut followees = Vec::new();
        for i in 0..3 {
            let v = uid(&format!("p{i}"));
            labels.insert(v.clone(), vec![topic("politics")]);
            followees.push(v);
        }
        for i in 0..4 {
            let v = uid(&format!("m{i}"));
            labels.insert(v.clone(), vec![topic("Music")]);
            followees.push(v);
        }
        for i in 0..5 {
            followees.push(uid(&format!("x{i}")));
        }
        graph.insert(uid("u"), followees);
        let freqs = build_topic_frequencies(&graph, &labels, &uid("u"), 10).unwrap();
        let expected: BTreeMap<Topic, u32> = [(topic("politics"), 3), (topic("music"), 4)]
            .into_iter()
            .collect();
        assert_eq!(freqs.entries, expected);
    }

    #[test]
    fn too_few_and_missing_followings() {
        let mut graph = FollowGraph::new();
        graph.insert(uid("u"), (0..9).map(|i| uid(&format!("v{i}"))).collect());
        graph.insert(uid("empty"), Vec::new());
        let labels = TopicLabels::new();
        assert_eq!(
            build_topic_frequencies(&graph, &labels, &uid("u"), 10),
            Err(LeaningError::TooFewFollowings {
                user: uid("u"),
                count: 9,
                min: 10
            })
        );
        assert_eq!(
            build_topic_frequencies(&graph, &labels, &uid("empty"), 10),
            Err(LeaningError::NoFollowings(uid("empty")))
        );
        assert_eq!(
            build_topic_frequencies(&graph, &labels, &uid("ghost"), 10),
            Err(LeaningError::NoFollowings(uid("ghost")))
        );
    }

    #[test]
    fn unlabelled_followings_give_empty_profile() {
        let mut graph = FollowGraph::new();
        graph.insert(uid("u"), (0..12).map(|i| uid(&format!("v{i}"))).collect());
        let freqs = build_topic_frequencies(&graph, &TopicLabels::new(), &uid("u"), 10).unwrap();
        assert!(freqs.entries.is_empty());
    }

    fn freqs(entries: &[(&str, u32)]) -> TopicFrequencyList {
        TopicFrequencyList {
            user: uid("u"),
            entries: entries.iter().map(|(t, f)| (topic(t), *f)).collect(),
        }
    }

    #[test]
    fn tfidf_weights() {
        let df = DocumentFrequencies::new(
            100,
            [(topic("a"), 10), (topic("b"), 100)].into_iter().collect(),
        );
        let out = tfidf_vector(&freqs(&[("a", 3), ("b", 1), ("c", 2)]), &df);
        let w = out.vector.weights[&topic("a")];
        // (1 + ln 3) * ln 10
        assert!((w - 4.832_233_371_861_3).abs() < 1e-12, "{w}");
        assert_eq!(out.vector.weights[&topic("b")], 0.0);
        assert!(!out.vector.weights.contains_key(&topic("c")));
        assert_eq!(out.unseen_topics, vec![topic("c")]);
    }

    #[test]
    fn seed_aggregation() {
        let agg = aggregate(&[("a", 2.0), ("b", 2.0)], Side::Democratic);
        assert_eq!(agg.vector[&topic("a")], 0.5);
        assert_eq!(agg.vector[&topic("b")], 0.5);
        let agg = aggregate_seed(
            &[vector(&[("a", 1.0)]), vector(&[("b", 1.0)])],
            Side::Republican,
        )
        .unwrap();
        assert_eq!(agg.vector[&topic("a")], 0.5);
        assert_eq!(agg.member_count, 2);
        assert_eq!(
            aggregate_seed(&[], Side::Democratic),
            Err(LeaningError::EmptySeedSet)
        );
        assert_eq!(
            aggregate_seed(&[vector(&[("a", 0.0)])], Side::Democratic),
            Err(LeaningError::AllZeroVectors)
        );
    }

    #[test]
    fn raw_bias_cases() {
        let d = aggregate(&[("a", 1.0), ("b", 3.0)], Side::Democratic);
        let r = aggregate(&[("c", 1.0)], Side::Republican);
        assert!(
            (raw_bias(&vector(&[("a", 2.0), ("b", 6.0)]), &d, &r).unwrap() - 1.0).abs() < 1e-12
        );
        assert_eq!(raw_bias(&vector(&[("z", 1.0)]), &d, &r).unwrap(), 0.0);
        let both = aggregate(&[("a", 1.0), ("c", 1.0)], Side::Democratic);
        let both_r = aggregate(&[("a", 1.0), ("c", 1.0)], Side::Republican);
        assert_eq!(
            raw_bias(&vector(&[("a", 1.0)]), &both, &both_r).unwrap(),
            0.0
        );
        assert_eq!(
            raw_bias(&InterestVector::default(), &d, &r),
            Err(LeaningError::UninferableBias)
        );
    }

    #[test]
    fn normalization() {
        let p = NormalizationParams::new(0.4, "pop").unwrap();
        assert_eq!(normalize_bias(0.0, &p).value(), 0.0);
        assert_eq!(normalize_bias(0.4, &p).value(), 1.0);
        assert_eq!(normalize_bias(-0.4, &p).value(), -1.0);
        assert!((normalize_bias(0.2, &p).value() - 0.5).abs() < 1e-15);
        assert_eq!(normalize_bias(0.9, &p).value(), 1.0);
        assert_eq!(
            NormalizationParams::new(0.0, "pop"),
            Err(LeaningError::InvalidParams(0.0))
        );
        let p = NormalizationParams::from_raw_scores([0.1, -0.3, 0.2], "pop").unwrap();
        assert_eq!(p.max_abs_raw, 0.3);
    }

    #[test]
    fn discretization_boundaries() {
        let s = |v| BiasScore::new(v).unwrap();
        assert_eq!(discretize(s(0.02), 0.03), LeaningLabel::Neutral);
        assert_eq!(discretize(s(0.03), 0.03), LeaningLabel::Democratic);
        assert_eq!(discretize(s(-0.03), 0.03), LeaningLabel::Republican);
        assert_eq!(discretize(s(-0.5), 0.03), LeaningLabel::Republican);
        assert_eq!(discretize(s(0.0), 0.0), LeaningLabel::Democratic);
    }

    #[test]
    fn idf_base_alone_is_unobservable() {
        // A base change on idf only scales every weight by the same factor.
        let d = aggregate(&[("a", 1.0), ("b", 2.0), ("c", 0.5)], Side::Democratic);
        let r = aggregate(&[("b", 1.0), ("c", 3.0)], Side::Republican);
        let v = vector(&[("a", 1.7), ("b", 0.2), ("c", 4.0)]);
        let k = 1.0 / core::f64::consts::LN_10;
        let a = raw_bias(&v, &d, &r).unwrap();
        let b = raw_bias(&v.scaled(k), &d, &r).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn tf_base_is_observable() {
        let df =
            DocumentFrequencies::new(10, [(topic("a"), 1), (topic("b"), 1)].into_iter().collect());
        let f = freqs(&[("a", 1), ("b", 10)]);
        let axis: BTreeMap<Topic, f64> = [(topic("a"), 1.0)].into_iter().collect();
        let ln = tfidf_vector_with_base(&f, &df, LogBase::Natural).vector;
        let lg = tfidf_vector_with_base(&f, &df, LogBase::Ten).vector;
        let c1 = cosine_similarity(&ln.weights, &axis).unwrap();
        let c2 = cosine_similarity(&lg.weights, &axis).unwrap();
        assert!((c1 - c2).abs() > 0.05);
    }
}
