//! Corpus-level bias estimated from a uniform random sample of users or
//! items.

use biasaudit_core::metrics::input_bias;
use biasaudit_core::BiasScore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::CorpusBundle;

pub const DEFAULT_SAMPLE_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Users,
    Items,
}

impl std::str::FromStr for Population {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "users" => Ok(Population::Users),
            "items" => Ok(Population::Items),
            other => Err(format!(
                "unknown population {other:?}, expected users or items"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplingError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("none of the {0} sampled members has a bias score")]
    NoScoredMembers(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledBias {
    pub bias: BiasScore,
    pub population: usize,
    pub sampled: usize,
    /// Sampled members without a score (uninferable users, or items whose
    /// author is uninferable).
    pub uninferable: usize,
}

/// Mean bias of a sample of `sample_size` members drawn without replacement.
///
/// Users are the follow-graph users, scored by their inferred normalized
/// bias; items carry their attached source bias. The whole population is
/// used when it is no larger than the sample.
pub fn sample_corpus_bias(
    bundle: &CorpusBundle,
    what: Population,
    sample_size: usize,
    seed: u64,
) -> Result<SampledBias, SamplingError> {
    let scores: Vec<Option<BiasScore>> = match what {
        Population::Users => bundle
            .followings
            .keys()
            .map(|u| {
                bundle
                    .user_scores
                    .get(u)
                    .filter(|s| s.label.is_inferred())
                    .and_then(|s| s.normalized)
            })
            .collect(),
        Population::Items => bundle.items.values().map(|i| i.source_bias).collect(),
    };
    let population = scores.len();
    if population == 0 {
        return Err(SamplingError::EmptyPopulation);
    }
    let picked: Vec<Option<BiasScore>> = if sample_size >= population {
        scores
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, population, sample_size).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| scores[i]).collect()
    };
    let sampled = picked.len();
    let available: Vec<BiasScore> = picked.into_iter().flatten().collect();
    let uninferable = sampled - available.len();
    let bias = input_bias(&available).map_err(|_| SamplingError::NoScoredMembers(sampled))?;
    Ok(SampledBias {
        bias,
        population,
        sampled,
        uninferable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::UserScore;
    use biasaudit_core::{LeaningLabel, UserId};

    fn population(values: &[Option<f64>]) -> CorpusBundle {
        let mut b = CorpusBundle::default();
        for (i, v) in values.iter().enumerate() {
            let u = UserId::new(format!("u{i:05}")).unwrap();
            b.followings.insert(u.clone(), Vec::new());
            let score = match v {
                Some(v) => UserScore {
                    raw: Some(*v),
                    normalized: Some(BiasScore::new(*v).unwrap()),
                    label: LeaningLabel::Neutral,
                },
                None => UserScore {
                    raw: None,
                    normalized: None,
                    label: LeaningLabel::Uninferable,
                },
            };
            b.user_scores.insert(u, score);
        }
        b
    }

    #[test]
    fn full_population_is_exact_mean() {
        let vals = [Some(0.25), Some(-0.5), None, Some(0.75)];
        let b = population(&vals);
        let s = sample_corpus_bias(&b, Population::Users, 1000, 9).unwrap();
        let expected = input_bias(
            &vals
                .iter()
                .flatten()
                .map(|v| BiasScore::new(*v).unwrap())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(s.bias, expected);
        assert_eq!((s.sampled, s.uninferable), (4, 1));
    }

    #[test]
    fn balanced_extremes_sample_near_zero() {
        let vals: Vec<Option<f64>> = (0..20_000)
            .map(|i| Some(if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let b = population(&vals);
        let s = sample_corpus_bias(&b, Population::Users, DEFAULT_SAMPLE_SIZE, 3).unwrap();
        assert_eq!(s.sampled, 1000);
        assert!(s.bias.value().abs() <= 0.05, "{}", s.bias);
    }

    #[test]
    fn empty_population_errors() {
        let b = CorpusBundle::default();
        assert_eq!(
            sample_corpus_bias(&b, Population::Items, 10, 0),
            Err(SamplingError::EmptyPopulation)
        );
    }
}
