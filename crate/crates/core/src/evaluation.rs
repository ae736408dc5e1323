//! Validation machinery for inferred leanings: crowd-judgment scores, score
//! binning, confusion matrices, threshold selection, coverage/accuracy and
//! the source-vs-content cross tabulation.
//!
//! Functions are generic over the subject key so they work for users and
//! items alike.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::leaning::discretize;
use crate::model::{BiasScore, LeaningLabel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("judgment set is empty")]
    EmptyJudgments,
    #[error("no subject appears in both inputs")]
    NoOverlap,
    #[error("candidate threshold list is empty")]
    NoCandidates,
}

/// One crowd worker's call on a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Judgment {
    ProDemocratic,
    ProRepublican,
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JudgmentSet<K> {
    pub subject: K,
    pub judgments: Vec<Judgment>,
}

/// `(pro-dem - pro-rep) / total`.
pub fn amt_score(judgments: &[Judgment]) -> Result<BiasScore, EvalError> {
    if judgments.is_empty() {
        return Err(EvalError::EmptyJudgments);
    }
    let (mut dem, mut rep) = (0i64, 0i64);
    for j in judgments {
        match j {
            Judgment::ProDemocratic => dem += 1,
            Judgment::ProRepublican => rep += 1,
            Judgment::Neutral => {}
        }
    }
    Ok(BiasScore::saturating(
        (dem - rep) as f64 / judgments.len() as f64,
    ))
}

/// One interval of a binning scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub name: &'static str,
    pub lower: f64,
    pub lower_closed: bool,
    pub upper: f64,
    pub upper_closed: bool,
}

impl Bin {
    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lower_closed {
            v >= self.lower
        } else {
            v > self.lower
        };
        let below = if self.upper_closed {
            v <= self.upper
        } else {
            v < self.upper
        };
        above && below
    }
}

const fn bin(
    name: &'static str,
    lower: f64,
    lower_closed: bool,
    upper: f64,
    upper_closed: bool,
) -> Bin {
    Bin {
        name,
        lower,
        lower_closed,
        upper,
        upper_closed,
    }
}

const THREE_BIN: [Bin; 3] = [
    bin("[-1.0, -0.5]", -1.0, true, -0.5, true),
    bin("(-0.5, 0.5)", -0.5, false, 0.5, false),
    bin("[0.5, 1.0]", 0.5, true, 1.0, true),
];

const SEVEN_BIN: [Bin; 7] = [
    bin("strongly rep [-1.0, -0.75)", -1.0, true, -0.75, false),
    bin("moderately rep [-0.75, -0.25)", -0.75, true, -0.25, false),
    bin("weakly rep [-0.25, 0.0)", -0.25, true, 0.0, false),
    bin("neutral [0.0, 0.0]", 0.0, true, 0.0, true),
    bin("weakly dem (0.0, 0.25]", 0.0, false, 0.25, true),
    bin("moderately dem (0.25, 0.75]", 0.25, false, 0.75, true),
    bin("strongly dem (0.75, 1.0]", 0.75, false, 1.0, true),
];

/// Named partitions of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinningScheme {
    /// Strongly republican / middle / strongly democratic.
    ThreeBin,
    /// Strong, moderate and weak on each side around an exact-zero bin.
    SevenBin,
}

impl BinningScheme {
    pub fn bins(self) -> &'static [Bin] {
        match self {
            BinningScheme::ThreeBin => &THREE_BIN,
            BinningScheme::SevenBin => &SEVEN_BIN,
        }
    }

    pub fn len(self) -> usize {
        self.bins().len()
    }

    pub fn is_empty(self) -> bool {
        self.bins().is_empty()
    }

    /// Index of the bin holding `score`. Every score in `[-1, 1]` has one.
    pub fn bin_of(self, score: BiasScore) -> usize {
        let v = score.value();
        self.bins()
            .iter()
            .position(|b| b.contains(v))
            // Only reachable for unchecked out-of-range scores.
            .unwrap_or(if v < 0.0 { 0 } else { self.len() - 1 })
    }
}

/// Groups scores by bin, preserving input order inside each bin.
pub fn bin_scores(scores: &[BiasScore], scheme: BinningScheme) -> Vec<Vec<BiasScore>> {
    let mut out = alloc::vec![Vec::new(); scheme.len()];
    for &s in scores {
        out[scheme.bin_of(s)].push(s);
    }
    out
}

/// Bins `(key, value)` pairs by key and averages the values per bin; empty
/// bins have no average.
pub fn bin_averages(
    pairs: impl IntoIterator<Item = (BiasScore, BiasScore)>,
    scheme: BinningScheme,
) -> Vec<BinAverage> {
    let mut acc = alloc::vec![(0.0, 0usize); scheme.len()];
    for (key, value) in pairs {
        let slot = &mut acc[scheme.bin_of(key)];
        slot.0 += value.value();
        slot.1 += 1;
    }
    acc.into_iter()
        .zip(scheme.bins())
        .map(|((sum, count), bin)| BinAverage {
            bin: bin.name,
            count,
            average: (count > 0).then(|| sum / count as f64),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinAverage {
    pub bin: &'static str,
    pub count: usize,
    pub average: Option<f64>,
}

/// Column order of a confusion matrix and of the three-bin rows.
pub const LABEL_ORDER: [LeaningLabel; 3] = [
    LeaningLabel::Republican,
    LeaningLabel::Neutral,
    LeaningLabel::Democratic,
];

fn label_index(label: LeaningLabel) -> Option<usize> {
    LABEL_ORDER.iter().position(|&l| l == label)
}

/// Rows are crowd-score bins (republican, middle, democratic), columns are
/// inferred labels in [`LABEL_ORDER`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
    /// Row-normalized percentages; `None` for a row with no subjects.
    pub percentages: [Option<[f64; 3]>; 3],
    /// Subjects present in only one input, or inferred as uninferable.
    pub excluded: usize,
}

impl ConfusionMatrix {
    fn from_counts(counts: [[usize; 3]; 3], excluded: usize) -> Self {
        let mut percentages = [None; 3];
        for (row, pct) in counts.iter().zip(percentages.iter_mut()) {
            let total: usize = row.iter().sum();
            if total > 0 {
                let mut p = [0.0; 3];
                for (c, v) in row.iter().zip(p.iter_mut()) {
                    *v = 100.0 * *c as f64 / total as f64;
                }
                *pct = Some(p);
            }
        }
        ConfusionMatrix {
            counts,
            percentages,
            excluded,
        }
    }

    /// Sum of diagonal percentages; empty rows contribute nothing.
    pub fn diagonal_sum(&self) -> f64 {
        self.percentages
            .iter()
            .enumerate()
            .filter_map(|(i, row)| row.map(|r| r[i]))
            .sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

/// Confusion matrix over subjects present in both maps.
pub fn confusion<K: Ord>(
    amt_scores: &BTreeMap<K, BiasScore>,
    inferred: &BTreeMap<K, LeaningLabel>,
) -> Result<ConfusionMatrix, EvalError> {
    let mut counts = [[0usize; 3]; 3];
    let mut matched = 0;
    let mut excluded = 0;
    for (subject, score) in amt_scores {
        match inferred.get(subject).copied().and_then(label_index) {
            Some(col) => {
                counts[BinningScheme::ThreeBin.bin_of(*score)][col] += 1;
                matched += 1;
            }
            None => excluded += 1,
        }
    }
    excluded += inferred
        .keys()
        .filter(|k| !amt_scores.contains_key(*k))
        .count();
    if matched == 0 {
        return Err(EvalError::NoOverlap);
    }
    Ok(ConfusionMatrix::from_counts(counts, excluded))
}

/// Diagonal sum for each candidate threshold and the winner.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSweep {
    pub selected: f64,
    pub diagonal_sums: Vec<(f64, f64)>,
}

/// Discretizes the inferred scores at every candidate and keeps the one with
/// the largest confusion-matrix diagonal; ties go to the smaller threshold.
pub fn select_threshold<K: Ord + Clone>(
    candidates: &[f64],
    amt_scores: &BTreeMap<K, BiasScore>,
    inferred_scores: &BTreeMap<K, BiasScore>,
) -> Result<ThresholdSweep, EvalError> {
    if candidates.is_empty() {
        return Err(EvalError::NoCandidates);
    }
    let mut sums = Vec::with_capacity(candidates.len());
    for &x in candidates {
        let labels: BTreeMap<K, LeaningLabel> = inferred_scores
            .iter()
            .map(|(k, s)| (k.clone(), discretize(*s, x)))
            .collect();
        sums.push((x, confusion(amt_scores, &labels)?.diagonal_sum()));
    }
    let mut best = sums[0];
    for &(x, d) in &sums[1..] {
        if d > best.1 || (d == best.1 && x < best.0) {
            best = (x, d);
        }
    }
    Ok(ThresholdSweep {
        selected: best.0,
        diagonal_sums: sums,
    })
}

/// Coverage and accuracy counts for one ground-truth class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCoverage {
    pub class: LeaningLabel,
    pub total: usize,
    pub inferred: usize,
    pub correct: usize,
}

impl ClassCoverage {
    pub fn coverage(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.inferred as f64 / self.total as f64
        }
    }

    /// Absent when nothing in the class was inferred.
    pub fn accuracy(&self) -> Option<f64> {
        (self.inferred > 0).then(|| self.correct as f64 / self.inferred as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub per_class: Vec<ClassCoverage>,
    /// Subjects present in only one of the two maps.
    pub excluded: usize,
}

impl CoverageReport {
    pub fn macro_coverage(&self) -> Option<f64> {
        let n = self.per_class.len();
        (n > 0).then(|| self.per_class.iter().map(|c| c.coverage()).sum::<f64>() / n as f64)
    }

    /// Mean of the per-class accuracies that exist.
    pub fn macro_accuracy(&self) -> Option<f64> {
        let accs: Vec<f64> = self.per_class.iter().filter_map(|c| c.accuracy()).collect();
        (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
    }

    pub fn class(&self, class: LeaningLabel) -> Option<&ClassCoverage> {
        self.per_class.iter().find(|c| c.class == class)
    }
}

/// Per-class coverage (`inferred / total`) and accuracy
/// (`correct / inferred`) of `inferred` against `truth`.
pub fn coverage_accuracy<K: Ord>(
    truth: &BTreeMap<K, LeaningLabel>,
    inferred: &BTreeMap<K, LeaningLabel>,
) -> CoverageReport {
    let order = [
        LeaningLabel::Democratic,
        LeaningLabel::Republican,
        LeaningLabel::Neutral,
    ];
    let mut per_class: Vec<ClassCoverage> = order
        .iter()
        .map(|&class| ClassCoverage {
            class,
            total: 0,
            inferred: 0,
            correct: 0,
        })
        .collect();
    let mut excluded = 0;
    for (subject, &truth_label) in truth {
        let Some(slot) = per_class.iter_mut().find(|c| c.class == truth_label) else {
            excluded += 1;
            continue;
        };
        let Some(&label) = inferred.get(subject) else {
            excluded += 1;
            continue;
        };
        slot.total += 1;
        if label.is_inferred() {
            slot.inferred += 1;
            if label == truth_label {
                slot.correct += 1;
            }
        }
    }
    excluded += inferred.keys().filter(|k| !truth.contains_key(*k)).count();
    per_class.retain(|c| c.total > 0);
    CoverageReport {
        per_class,
        excluded,
    }
}

/// One content-score bin of the cross tabulation.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTabRow {
    pub bin: &'static str,
    pub count: usize,
    /// Share of all matched items falling in this bin, in percent.
    pub fraction_pct: f64,
    /// Percent of the bin's items whose source is democratic, republican,
    /// neutral; `None` for an empty bin.
    pub source_pct: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossTab {
    pub rows: Vec<CrossTabRow>,
    pub total: usize,
    pub excluded: usize,
}

/// Seven-bin content-bias rows with the distribution of source labels in
/// each row.
pub fn source_content_crosstab<K: Ord>(
    content_scores: &BTreeMap<K, BiasScore>,
    source_labels: &BTreeMap<K, LeaningLabel>,
) -> Result<CrossTab, EvalError> {
    let scheme = BinningScheme::SevenBin;
    let mut counts = alloc::vec![[0usize; 3]; scheme.len()];
    let mut total = 0;
    let mut excluded = 0;
    for (k, score) in content_scores {
        let col = match source_labels.get(k) {
            Some(LeaningLabel::Democratic) => 0,
            Some(LeaningLabel::Republican) => 1,
            Some(LeaningLabel::Neutral) => 2,
            _ => {
                excluded += 1;
                continue;
            }
        };
        counts[scheme.bin_of(*score)][col] += 1;
        total += 1;
    }
    excluded += source_labels
        .keys()
        .filter(|k| !content_scores.contains_key(*k))
        .count();
    if total == 0 {
        return Err(EvalError::NoOverlap);
    }
    let rows = counts
        .iter()
        .zip(scheme.bins())
        .map(|(c, bin)| {
            let n: usize = c.iter().sum();
            CrossTabRow {
                bin: bin.name,
                count: n,
                fraction_pct: 100.0 * n as f64 / total as f64,
                source_pct: (n > 0).then(|| c.map(|x| 100.0 * x as f64 / n as f64)),
            }
        })
        .collect();
    Ok(CrossTab {
        rows,
        total,
        excluded,
    })
}
