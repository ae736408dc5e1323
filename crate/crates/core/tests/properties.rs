use std::collections::BTreeMap;

use biasaudit_core::evaluation::{amt_score, confusion, coverage_accuracy, Judgment};
use biasaudit_core::leaning::{
    aggregate_seed, discretize, normalize_bias, raw_bias, tfidf_vector, DocumentFrequencies,
    InterestVector, NormalizationParams, Side, TopicFrequencyList,
};
use biasaudit_core::metrics::{
    bias_till_rank, input_bias, output_bias, output_bias_weighted, ranking_bias, ScoredList,
};
use biasaudit_core::rankers::{rerank, RankingStrategy};
use biasaudit_core::{BiasScore, InputCorpus, Item, ItemId, LeaningLabel, QueryId, Topic, UserId};
use proptest::prelude::*;

/// Exact rational, enough for nested means of small integer lists.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Ratio(i128, i128);

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    fn new(n: i128, d: i128) -> Ratio {
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Ratio(s * n / g, s * d / g)
    }
    fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn div(self, k: i128) -> Ratio {
        Ratio::new(self.0, self.1 * k)
    }
    fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// Output bias straight from its definition, in exact arithmetic over
/// scores given in hundredths.
fn exact_output_bias(hundredths: &[i128], depth: usize) -> Ratio {
    let mut total = Ratio::new(0, 1);
    for r in 1..=depth {
        let mut prefix = Ratio::new(0, 1);
        for &s in &hundredths[..r] {
            prefix = prefix.add(Ratio::new(s, 100));
        }
        total = total.add(prefix.div(r as i128));
    }
    total.div(depth as i128)
}

fn scores_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 1..=max_len)
}

fn list(v: &[f64]) -> ScoredList {
    ScoredList::from_values(v).unwrap()
}

#[test]
fn single_leader_is_137_over_300() {
    let exact = exact_output_bias(&[100, 0, 0, 0, 0], 5);
    assert_eq!(exact, Ratio::new(137, 300));
    let ob = output_bias(&list(&[1.0, 0.0, 0.0, 0.0, 0.0]), 5).unwrap();
    assert!((ob.value.value() - exact.to_f64()).abs() <= 1e-12);
}

#[test]
fn symbolic_expansion_matches_weights() {
    // OB at depth 5 of [s2, s4, s5, s1, s3] expands to per-rank harmonic tails.
    let s = [0.3, -0.7, 0.9, 0.1, -0.2];
    let h = |from: usize| (from..=5).map(|m| 1.0 / m as f64).sum::<f64>();
    let expected = (s[0] * h(1) + s[1] * h(2) + s[2] * h(3) + s[3] * h(4) + s[4] * h(5)) / 5.0;
    let ob = output_bias(&list(&s), 5).unwrap().value.value();
    assert!((ob - expected).abs() <= 1e-12);
}

proptest! {
    #[test]
    fn output_bias_matches_exact_oracle(h in prop::collection::vec(-100i128..=100, 1..=10)) {
        let values: Vec<f64> = h.iter().map(|&x| x as f64 / 100.0).collect();
        let l = list(&values);
        let exact = exact_output_bias(&h, h.len()).to_f64();
        prop_assert!((output_bias(&l, h.len()).unwrap().value.value() - exact).abs() <= 1e-12);
        prop_assert!((output_bias_weighted(&l, h.len()).unwrap().value.value() - exact).abs() <= 1e-12);
    }

    #[test]
    fn weight_form_equivalence(v in scores_strategy(10), r in 1usize..=12) {
        let l = list(&v);
        let a = output_bias(&l, r).unwrap();
        let b = output_bias_weighted(&l, r).unwrap();
        prop_assert_eq!(a.depth, b.depth);
        prop_assert!((a.value.value() - b.value.value()).abs() <= 1e-12);
    }

    #[test]
    fn ranking_bias_identity(v in scores_strategy(20), corpus in scores_strategy(60), r in 1usize..=20) {
        let ob = output_bias(&list(&v), r).unwrap().value;
        let ib = input_bias(&list(&corpus).scores).unwrap();
        prop_assert!((ranking_bias(ob, ib) + ib.value() - ob.value()).abs() <= 1e-12);
    }

    #[test]
    fn constancy_is_exact(c in -1.0f64..=1.0, n in 1usize..=30, r in 1usize..=30) {
        let l = list(&vec![c; n]);
        let ib = input_bias(&l.scores).unwrap();
        let ob = output_bias(&l, r).unwrap().value;
        prop_assert_eq!(ib.value(), c);
        prop_assert_eq!(ob.value(), c);
        prop_assert_eq!(output_bias_weighted(&l, r).unwrap().value.value(), c);
        prop_assert_eq!(bias_till_rank(&l, r.min(n)).unwrap().value(), c);
        prop_assert_eq!(ranking_bias(ob, ib), 0.0);
    }

    #[test]
    fn input_bias_permutation_invariant(v in scores_strategy(40), seed in any::<u64>()) {
        let mut shuffled = v.clone();
        // Deterministic Fisher-Yates driven by a tiny LCG.
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = input_bias(&list(&v).scores).unwrap().value();
        let b = input_bias(&list(&shuffled).scores).unwrap().value();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn promoting_higher_score_raises_output_bias(
        mut v in prop::collection::vec(-1.0f64..=1.0, 2..=20),
        a in 0usize..20,
        b in 0usize..20,
    ) {
        let n = v.len();
        let (i, j) = ((a % n).min(b % n), (a % n).max(b % n));
        prop_assume!(i < j);
        if v[i] > v[j] {
            v.swap(i, j);
        }
        // The gain is at least (v[j] - v[i]) / n^2; keep it above rounding noise.
        prop_assume!(v[j] - v[i] > 1e-9);
        let mut swapped = v.clone();
        swapped.swap(i, j);
        let before = output_bias(&list(&v), n).unwrap().value.value();
        let after = output_bias(&list(&swapped), n).unwrap().value.value();
        prop_assert!(after > before);
    }

    #[test]
    fn metrics_within_score_range(v in scores_strategy(25), r in 1usize..=25) {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let l = list(&v);
        let ib = input_bias(&l.scores).unwrap().value();
        let ob = output_bias(&l, r).unwrap().value.value();
        let b = bias_till_rank(&l, r.min(v.len())).unwrap().value();
        for x in [ib, ob, b] {
            prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
        }
    }
}

fn sparse(weights: &[f64]) -> InterestVector {
    InterestVector {
        user: None,
        weights: weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (Topic::new(format!("t{i}")).unwrap(), *w))
            .collect(),
    }
}

fn weights_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..5.0], 6)
}

proptest! {
    #[test]
    fn raw_bias_properties(u in weights_strategy(), d in weights_strategy(), r in weights_strategy(), k in 0.01f64..100.0) {
        let u = sparse(&u);
        prop_assume!(!u.is_zero());
        let (Ok(dem), Ok(rep)) = (aggregate_seed(&[sparse(&d)], Side::Democratic), aggregate_seed(&[sparse(&r)], Side::Republican)) else {
            return Ok(());
        };
        let raw = raw_bias(&u, &dem, &rep).unwrap();
        prop_assert!((-1.0..=1.0).contains(&raw));
        prop_assert!((raw_bias(&u.scaled(k), &dem, &rep).unwrap() - raw).abs() <= 1e-12);
        prop_assert_eq!(raw_bias(&u, &rep, &dem).unwrap(), -raw);
    }

    #[test]
    fn aggregates_sum_to_one(vs in prop::collection::vec(weights_strategy(), 1..6)) {
        let vectors: Vec<InterestVector> = vs.iter().map(|w| sparse(w)).collect();
        if let Ok(agg) = aggregate_seed(&vectors, Side::Democratic) {
            prop_assert!((agg.vector.values().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn discretize_antisymmetric(s in -1.0f64..=1.0, x in 0.0f64..=1.0) {
        let a = discretize(BiasScore::new(s).unwrap(), x);
        let b = discretize(BiasScore::new(-s).unwrap(), x);
        prop_assume!(x > 0.0 || s != 0.0);
        prop_assert_eq!(b, a.mirrored());
    }

    #[test]
    fn normalize_monotone(a in -2.0f64..2.0, b in -2.0f64..2.0, m in 0.001f64..2.0) {
        let p = NormalizationParams::new(m, "pop").unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(normalize_bias(lo, &p).value() <= normalize_bias(hi, &p).value());
        prop_assert_eq!(normalize_bias(0.0, &p).value(), 0.0);
    }

    #[test]
    fn tfidf_monotone(f in 1u32..50, n in 1usize..100, extra in 1usize..100) {
        let big_n = n + extra;
        let t = Topic::new("t").unwrap();
        let weight = |f: u32, n: usize| {
            let df = DocumentFrequencies::new(big_n, [(t.clone(), n)].into_iter().collect());
            let freqs = TopicFrequencyList { user: UserId::new("u").unwrap(), entries: [(t.clone(), f)].into_iter().collect() };
            tfidf_vector(&freqs, &df).vector.weights[&t]
        };
        prop_assert!(weight(f, n) > 0.0);
        prop_assert_eq!(weight(f, big_n), 0.0);
        prop_assert!(weight(f + 1, n) > weight(f, n));
        if n > 1 {
            prop_assert!(weight(f, n - 1) > weight(f, n));
        }
    }

    #[test]
    fn amt_antisymmetric(d in 0usize..30, r in 0usize..30, z in 0usize..30) {
        prop_assume!(d + r + z > 0);
        let build = |d, r| {
            let mut v = vec![Judgment::ProDemocratic; d];
            v.extend(vec![Judgment::ProRepublican; r]);
            v.extend(vec![Judgment::Neutral; z]);
            v
        };
        prop_assert_eq!(amt_score(&build(d, r)).unwrap().value(), -amt_score(&build(r, d)).unwrap().value());
    }

    #[test]
    fn confusion_rows_sum_to_100(rows in prop::collection::vec((-1.0f64..=1.0, 0usize..4), 1..80)) {
        let labels = [LeaningLabel::Republican, LeaningLabel::Neutral, LeaningLabel::Democratic, LeaningLabel::Uninferable];
        let amt: BTreeMap<usize, BiasScore> = rows.iter().enumerate().map(|(i, (s, _))| (i, BiasScore::new(*s).unwrap())).collect();
        let inf: BTreeMap<usize, LeaningLabel> = rows.iter().enumerate().map(|(i, (_, l))| (i, labels[*l])).collect();
        if let Ok(m) = confusion(&amt, &inf) {
            for row in m.percentages.iter().flatten() {
                prop_assert!((row.iter().sum::<f64>() - 100.0).abs() <= 0.1);
            }
        }
        let truth: BTreeMap<usize, LeaningLabel> = rows.iter().enumerate().map(|(i, (s, _))| (i, if *s >= 0.0 { LeaningLabel::Democratic } else { LeaningLabel::Republican })).collect();
        let report = coverage_accuracy(&truth, &inf);
        for c in &report.per_class {
            let recovered = (c.coverage() * c.total as f64).round() as usize;
            prop_assert_eq!(recovered, c.inferred);
        }
    }

    #[test]
    fn rerank_is_deterministic_prefix(
        counts in prop::collection::vec((0u64..20, 0u64..20, 0i64..50), 1..40),
        k in 1usize..30,
    ) {
        let items: BTreeMap<ItemId, Item> = counts
            .iter()
            .enumerate()
            .map(|(i, &(rt, fav, ts))| {
                let id = ItemId::new(format!("i{i:02}")).unwrap();
                (id.clone(), Item::new(id, UserId::new("u").unwrap(), ts).with_counts(rt, fav))
            })
            .collect();
        let corpus = InputCorpus::new(QueryId::new("q").unwrap(), items.keys().cloned().collect());
        for strategy in [RankingStrategy::MostRetweetedFirst, RankingStrategy::MostFavoritedFirst, RankingStrategy::ReverseChronological] {
            let a = rerank(&corpus, &items, strategy, k).unwrap();
            let b = rerank(&corpus, &items, strategy, k).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.ranked_items.len(), k.min(items.len()));
            let unique: std::collections::BTreeSet<_> = a.ranked_items.iter().collect();
            prop_assert_eq!(unique.len(), a.ranked_items.len());
            let keys: Vec<i64> = a.ranked_items.iter().map(|id| {
                let it = &items[id];
                match strategy {
                    RankingStrategy::MostRetweetedFirst => it.retweet_count as i64,
                    RankingStrategy::MostFavoritedFirst => it.favorite_count as i64,
                    _ => it.created_at,
                }
            }).collect();
            prop_assert!(keys.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
