//! Seeded synthetic bundles with planted leanings.
//!
//! Users follow topic experts; a planted democrat picks democrat-side topics
//! with probability `(1 + separation) / 2`, a republican mirrors that, and a
//! neutral user picks either side evenly. Items are authored by sampled users
//! and ranked into snapshots by engagement, recency and an optional planted
//! ranking lean.

use std::collections::{BTreeMap, BTreeSet};

use biasaudit_core::{
    InputCorpus, Item, ItemId, LeaningLabel, QueryId, RankedSnapshot, Topic, UserId,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::CorpusBundle;

/// Recorded in `meta.json` so fixtures can be regenerated elsewhere.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    /// Seed users per side; they are generated like planted users but kept
    /// out of the ground truth.
    pub n_seed_users: usize,
    pub n_queries: usize,
    pub n_items_per_query: usize,
    pub snapshots_per_query: usize,
    pub page_size: usize,
    /// Seconds between snapshots.
    pub snapshot_interval: i64,
    pub start_time: i64,
    /// Fractions of democratic, republican and neutral users.
    pub mixture: [f64; 3],
    pub separation: f64,
    pub topics_per_side: usize,
    pub experts_per_topic: usize,
    pub min_followings: usize,
    pub max_followings: usize,
    pub retweet_mean: f64,
    pub favorite_mean: f64,
    /// Log-scale engagement boost for democrat authors (negative favours
    /// republican authors).
    pub popularity_lean: f64,
    /// Additive ranking-score boost for democrat authors.
    pub ranking_lean: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_users: 200,
            n_seed_users: 20,
            n_queries: 5,
            n_items_per_query: 200,
            snapshots_per_query: 12,
            page_size: biasaudit_core::DEFAULT_PAGE_SIZE,
            snapshot_interval: 600,
            start_time: 1_446_336_000,
            mixture: [0.4, 0.4, 0.2],
            separation: 0.8,
            topics_per_side: 10,
            experts_per_topic: 5,
            min_followings: 10,
            max_followings: 30,
            retweet_mean: 5.0,
            favorite_mean: 8.0,
            popularity_lean: 0.0,
            ranking_lean: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.mixture.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad(format!(
                "mixture fractions {:?} must lie in [0, 1]",
                self.mixture
            ));
        }
        let total: f64 = self.mixture.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("mixture fractions sum to {total}, expected 1"));
        }
        if !(0.0..=1.0).contains(&self.separation) {
            return bad(format!("separation {} outside [0, 1]", self.separation));
        }
        if self.n_users == 0 {
            return bad("n_users must be at least 1".into());
        }
        if self.n_seed_users == 0 {
            return bad("n_seed_users must be at least 1".into());
        }
        if self.topics_per_side == 0 || self.experts_per_topic == 0 {
            return bad("topics_per_side and experts_per_topic must be at least 1".into());
        }
        if self.min_followings == 0 || self.min_followings > self.max_followings {
            return bad(format!(
                "followings range {}..={} is empty",
                self.min_followings, self.max_followings
            ));
        }
        // Each side must be able to supply every following on its own.
        let per_side = self.topics_per_side * self.experts_per_topic;
        if self.max_followings > per_side {
            return bad(format!(
                "max_followings {} exceeds the {per_side} experts available per side",
                self.max_followings
            ));
        }
        if self.page_size == 0 {
            return bad("page_size must be at least 1".into());
        }
        if self.snapshot_interval <= 0 {
            return bad("snapshot_interval must be positive".into());
        }
        for (name, v) in [
            ("retweet_mean", self.retweet_mean),
            ("favorite_mean", self.favorite_mean),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be a finite non-negative number"));
            }
        }
        if !self.popularity_lean.is_finite() || !self.ranking_lean.is_finite() {
            return bad("lean parameters must be finite".into());
        }
        Ok(())
    }
}

/// A synthetic bundle plus the planted labels of its ordinary users.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub bundle: CorpusBundle,
    pub ground_truth: BTreeMap<UserId, LeaningLabel>,
}

/// Splits `n` across `fractions` with the largest-remainder method, so the
/// counts sum to `n` and each is within 1 of `n * fraction`.
pub fn allocate(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = n.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

fn uid(s: String) -> UserId {
    UserId::new(s).expect("generated ids are non-empty")
}

fn side_sign(label: LeaningLabel) -> f64 {
    match label {
        LeaningLabel::Democratic => 1.0,
        LeaningLabel::Republican => -1.0,
        _ => 0.0,
    }
}

fn exponential(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    let u: f64 = rng.gen();
    -mean * (1.0 - u).ln()
}

struct Vocabulary {
    /// Experts of each side, grouped by topic.
    sides: [Vec<Vec<UserId>>; 2],
}

fn follow_list(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    vocab: &Vocabulary,
    label: LeaningLabel,
) -> Vec<UserId> {
    let own = (1.0 + cfg.separation) / 2.0;
    let p_dem = match label {
        LeaningLabel::Democratic => own,
        LeaningLabel::Republican => 1.0 - own,
        _ => 0.5,
    };
    let n = rng.gen_range(cfg.min_followings..=cfg.max_followings);
    let mut chosen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let side = if rng.gen::<f64>() < p_dem { 0 } else { 1 };
        let topics = &vocab.sides[side];
        let experts = &topics[rng.gen_range(0..topics.len())];
        let e = &experts[rng.gen_range(0..experts.len())];
        if chosen.insert(e.clone()) {
            out.push(e.clone());
        }
    }
    out
}

/// Deterministic in `cfg` (including the seed).
pub fn synth_bundle(cfg: &SynthConfig) -> Result<Synthetic, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = CorpusBundle::default();

    let mut sides: [Vec<Vec<UserId>>; 2] = [Vec::new(), Vec::new()];
    for (s, prefix) in [(0, "dem"), (1, "rep")] {
        for t in 0..cfg.topics_per_side {
            let topic = Topic::new(format!("{prefix}-topic-{t:02}")).expect("non-empty topic");
            let experts: Vec<UserId> = (0..cfg.experts_per_topic)
                .map(|k| uid(format!("expert-{prefix}-{t:02}-{k:02}")))
                .collect();
            for e in &experts {
                b.topic_labels.insert(e.clone(), vec![topic.clone()]);
            }
            sides[s].push(experts);
        }
    }
    let vocab = Vocabulary { sides };

    for (label, slot, prefix) in [
        (LeaningLabel::Democratic, 0, "seed-dem"),
        (LeaningLabel::Republican, 1, "seed-rep"),
    ] {
        for i in 0..cfg.n_seed_users {
            let u = uid(format!("{prefix}-{i:04}"));
            b.followings
                .insert(u.clone(), follow_list(&mut rng, cfg, &vocab, label));
            if slot == 0 {
                b.seed_dem.push(u);
            } else {
                b.seed_rep.push(u);
            }
        }
    }

    let counts = allocate(cfg.n_users, &cfg.mixture);
    let mut labels: Vec<LeaningLabel> = Vec::with_capacity(cfg.n_users);
    for (label, &c) in [
        LeaningLabel::Democratic,
        LeaningLabel::Republican,
        LeaningLabel::Neutral,
    ]
    .iter()
    .zip(&counts)
    {
        labels.extend(std::iter::repeat_n(*label, c));
    }
    labels.shuffle(&mut rng);
    let mut ground_truth = BTreeMap::new();
    let mut by_label: [Vec<UserId>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (i, &label) in labels.iter().enumerate() {
        let u = uid(format!("user-{i:06}"));
        b.followings
            .insert(u.clone(), follow_list(&mut rng, cfg, &vocab, label));
        let slot = match label {
            LeaningLabel::Democratic => 0,
            LeaningLabel::Republican => 1,
            _ => 2,
        };
        by_label[slot].push(u.clone());
        ground_truth.insert(u, label);
    }

    let span = cfg.snapshot_interval * cfg.snapshots_per_query.max(1) as i64;
    for q in 0..cfg.n_queries {
        let query = QueryId::new(format!("query-{q:03}")).expect("non-empty query");
        let lean: f64 = rng.gen_range(-0.6..=0.6);
        let mut items: Vec<(Item, LeaningLabel)> = Vec::with_capacity(cfg.n_items_per_query);
        for n in 0..cfg.n_items_per_query {
            let label = if rng.gen::<f64>() < cfg.mixture[2] {
                LeaningLabel::Neutral
            } else if rng.gen::<f64>() < (1.0 + lean) / 2.0 {
                LeaningLabel::Democratic
            } else {
                LeaningLabel::Republican
            };
            // Fall back to any non-empty pool when the mixture leaves a side empty.
            let pools = [&by_label[0], &by_label[1], &by_label[2]];
            let preferred = match label {
                LeaningLabel::Democratic => 0,
                LeaningLabel::Republican => 1,
                _ => 2,
            };
            let slot = (0..3)
                .map(|k| (preferred + k) % 3)
                .find(|&k| !pools[k].is_empty())
                .expect("n_users >= 1");
            let pool = pools[slot];
            let author = pool[rng.gen_range(0..pool.len())].clone();
            let author_label = ground_truth[&author];
            let boost = (cfg.popularity_lean * side_sign(author_label)).exp();
            let rt = (exponential(&mut rng, cfg.retweet_mean) * boost).floor() as u64;
            let fav = (exponential(&mut rng, cfg.favorite_mean) * boost).floor() as u64;
            let ts = cfg.start_time + rng.gen_range(0..span);
            let id = ItemId::new(format!("{query}-item-{n:06}")).expect("non-empty id");
            let mut item = Item::new(id, author, ts).with_counts(rt, fav);
            item.text = Some(format!("synthetic post {n} for {query}"));
            items.push((item, author_label));
        }

        let mut stream: Vec<&Item> = items.iter().map(|(i, _)| i).collect();
        stream.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        b.input_corpora.insert(
            query.clone(),
            InputCorpus::new(query.clone(), stream.iter().map(|i| i.id.clone()).collect()),
        );

        for j in 0..cfg.snapshots_per_query {
            let at = cfg.start_time + (j as i64 + 1) * cfg.snapshot_interval;
            let mut scored: Vec<(f64, &ItemId)> = Vec::new();
            for (item, label) in &items {
                // Noise is drawn for every item so the stream of draws does not
                // depend on which items are visible yet.
                let noise: f64 = rng.gen_range(-0.1..0.1);
                if item.created_at > at {
                    continue;
                }
                let engagement = ((1 + item.retweet_count + item.favorite_count) as f64).ln();
                let age = (at - item.created_at) as f64 / span as f64;
                scored.push((
                    engagement - age + cfg.ranking_lean * side_sign(*label) + noise,
                    &item.id,
                ));
            }
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
            let ranked = scored
                .iter()
                .take(cfg.page_size)
                .map(|(_, id)| (*id).clone())
                .collect();
            b.snapshots
                .push(RankedSnapshot::new(query.clone(), at, ranked));
        }
        for (item, _) in items {
            b.items.insert(item.id.clone(), item);
        }
    }

    Ok(Synthetic {
        bundle: b,
        ground_truth,
    })
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthMeta {
    pub generator: String,
    pub prng: String,
    pub config: SynthConfig,
}

impl SynthMeta {
    pub fn for_config(cfg: &SynthConfig) -> Self {
        SynthMeta {
            generator: concat!("biasaudit ", env!("CARGO_PKG_VERSION")).to_string(),
            prng: PRNG_NAME.to_string(),
            config: cfg.clone(),
        }
    }
}
