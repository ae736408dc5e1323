//! Tabular output. CSV keeps full precision; the aligned text form rounds
//! to two decimals.

use std::fmt::Write as _;

use biasaudit_core::evaluation::{
    BinAverage, ConfusionMatrix, CoverageReport, CrossTab, LABEL_ORDER,
};
use biasaudit_core::BiasReport;
use serde::{Deserialize, Serialize};

use crate::pipeline::{CategoryAverage, EvalReport, RerankOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(usize),
    /// Empty when absent.
    Num(Option<f64>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Num(Some(v)) => v.to_string(),
            Cell::Num(None) => String::new(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            // Avoid printing "-0.00".
            Cell::Num(Some(v)) => {
                let s = format!("{v:.2}");
                if s == "-0.00" {
                    "0.00".into()
                } else {
                    s
                }
            }
            Cell::Num(None) => "-".into(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(Some(v))
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub title: Option<String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            title: None,
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn titled(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::text).collect())
            .collect();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        if let Some(t) = &self.title {
            let _ = writeln!(out, "{t}");
        }
        let line = |out: &mut String, items: &[String], numeric: &[bool]| {
            let parts: Vec<String> = items
                .iter()
                .zip(&widths)
                .zip(numeric)
                .map(|((s, w), num)| {
                    if *num {
                        format!("{s:>w$}")
                    } else {
                        format!("{s:<w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        let numeric: Vec<bool> = (0..self.headers.len())
            .map(|i| {
                self.rows
                    .first()
                    .is_some_and(|r| !matches!(r[i], Cell::Text(_)))
            })
            .collect();
        line(&mut out, &self.headers, &numeric);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        for row in &cells {
            line(&mut out, row, &numeric);
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Table => self.to_text(),
        }
    }
}

/// `0.97777` becomes `"97.78%"`.
pub fn percent(fraction: f64) -> String {
    format!("{:.2}%", 100.0 * fraction)
}

pub fn metrics_table(reports: &[BiasReport], categories: &[CategoryAverage]) -> Table {
    let mut t = Table::new(&[
        "query",
        "TOB",
        "TIB",
        "TRB",
        "snapshot_count",
        "skipped",
        "scored_fraction",
    ]);
    for r in reports {
        t.push(vec![
            r.query.as_str().into(),
            r.tob.value().into(),
            r.tib.value().into(),
            r.trb.into(),
            r.snapshot_count.into(),
            r.skipped_snapshots.into(),
            r.scored_item_fraction.into(),
        ]);
    }
    for c in categories {
        t.push(vec![
            format!("average:{}", c.category).into(),
            c.tob.into(),
            c.tib.into(),
            c.trb.into(),
            c.queries.into(),
            Cell::Num(None),
            Cell::Num(None),
        ]);
    }
    t
}

pub fn rerank_table(out: &RerankOutcome) -> Table {
    let mut headers = vec![
        "query".to_string(),
        "TIB".to_string(),
        "observed".to_string(),
    ];
    headers.extend(out.strategies.iter().map(|s| s.name().to_string()));
    let mut t = Table {
        title: None,
        headers,
        rows: Vec::new(),
    };
    for r in &out.rows {
        let mut row: Vec<Cell> = vec![
            r.query.as_str().into(),
            r.tib.value().into(),
            r.observed.into(),
        ];
        row.extend(r.strategies.iter().map(|v| Cell::from(*v)));
        t.push(row);
    }
    t
}

pub fn bin_average_table(title: &str, key: &str, value: &str, bins: &[BinAverage]) -> Table {
    let mut t = Table::new(&[key, "count", value]).titled(title);
    for b in bins {
        t.push(vec![b.bin.into(), b.count.into(), b.average.into()]);
    }
    t
}

pub fn confusion_table(cm: &ConfusionMatrix, x: f64) -> Table {
    let mut headers = vec!["amt_bin".to_string(), "count".to_string()];
    headers.extend(LABEL_ORDER.iter().map(|l| format!("{}_pct", l.as_str())));
    let mut t = Table {
        title: Some(format!("confusion matrix at threshold {x}")),
        headers,
        rows: Vec::new(),
    };
    let bins = biasaudit_core::evaluation::BinningScheme::ThreeBin.bins();
    for ((bin, counts), pct) in bins.iter().zip(&cm.counts).zip(&cm.percentages) {
        let mut row: Vec<Cell> = vec![bin.name.into(), counts.iter().sum::<usize>().into()];
        row.extend((0..3).map(|i| Cell::from(pct.map(|p| p[i]))));
        t.push(row);
    }
    t
}

pub fn sweep_table(sweep: &biasaudit_core::evaluation::ThresholdSweep) -> Table {
    let mut t = Table::new(&["threshold", "diagonal_sum", "selected"]).titled("threshold sweep");
    for (x, d) in &sweep.diagonal_sums {
        let mark = if *x == sweep.selected { "*" } else { "" };
        t.push(vec![(*x).into(), (*d).into(), mark.into()]);
    }
    t
}

pub fn coverage_table(report: &CoverageReport) -> Table {
    let mut t = Table::new(&[
        "class",
        "total",
        "inferred",
        "correct",
        "coverage_pct",
        "accuracy_pct",
    ])
    .titled("coverage and accuracy");
    for c in &report.per_class {
        t.push(vec![
            c.class.as_str().into(),
            c.total.into(),
            c.inferred.into(),
            c.correct.into(),
            (100.0 * c.coverage()).into(),
            c.accuracy().map(|a| 100.0 * a).into(),
        ]);
    }
    t.push(vec![
        "average".into(),
        report
            .per_class
            .iter()
            .map(|c| c.total)
            .sum::<usize>()
            .into(),
        report
            .per_class
            .iter()
            .map(|c| c.inferred)
            .sum::<usize>()
            .into(),
        report
            .per_class
            .iter()
            .map(|c| c.correct)
            .sum::<usize>()
            .into(),
        report.macro_coverage().map(|v| 100.0 * v).into(),
        report.macro_accuracy().map(|v| 100.0 * v).into(),
    ]);
    t
}

pub fn crosstab_table(ct: &CrossTab) -> Table {
    let mut t = Table::new(&[
        "content_bin",
        "count",
        "fraction_pct",
        "democratic_pct",
        "republican_pct",
        "neutral_pct",
    ])
    .titled("source bias by content bias");
    for r in &ct.rows {
        let mut row: Vec<Cell> = vec![r.bin.into(), r.count.into(), r.fraction_pct.into()];
        row.extend((0..3).map(|i| Cell::from(r.source_pct.map(|p| p[i]))));
        t.push(row);
    }
    t
}

/// Every table of an evaluation report, in a fixed order.
pub fn evaluation_tables(report: &EvalReport) -> Vec<Table> {
    let mut out = Vec::new();
    if let Some(a) = &report.amt {
        out.push(bin_average_table(
            "crowd score by inferred-score bin",
            "inferred_bin",
            "avg_amt_score",
            &a.by_inferred,
        ));
        out.push(bin_average_table(
            "inferred score by crowd-score bin",
            "amt_bin",
            "avg_inferred_score",
            &a.by_amt,
        ));
        out.push(confusion_table(&a.confusion, a.threshold));
        out.push(sweep_table(&a.sweep));
    }
    if let Some(c) = &report.coverage {
        out.push(coverage_table(c));
    }
    if let Some(x) = &report.crosstab {
        out.push(crosstab_table(x));
    }
    out
}

/// Joins tables; CSV sections are separated by a `# title` line.
pub fn render_all(tables: &[Table], format: Format) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if format == Format::Csv {
            if let Some(title) = &t.title {
                let _ = writeln!(out, "# {title}");
            }
        }
        out.push_str(&t.render(format));
    }
    out
}
