//! Command-line front end. Exit codes: 0 on success, 1 when the inputs are
//! well formed but empty or unusable, 2 on malformed input or bad flags.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biasaudit_core::evaluation::amt_score;
use biasaudit_core::leaning::LeaningConfig;
use biasaudit_core::rankers::RankingStrategy;
use biasaudit_core::{BiasScore, ItemId, QueryId, UserId};
use clap::{Args, Parser, Subcommand};

use crate::bundle::{
    load_bundle, read_jsonl, save_bundle, score_records, write_jsonl, BundlePaths, CorpusBundle,
    LoadError, UserScore,
};
use crate::config::{ConfigError, RunConfig};
use crate::formats::{
    CategoryRecord, GroundTruthRecord, JudgmentRecord, GROUND_TRUTH_FILE, META_FILE, SCORES_FILE,
};
use crate::pipeline::{
    category_averages, evaluate, infer_scores, query_metrics, rerank_comparison, EvalInputs,
};
use crate::report::{evaluation_tables, metrics_table, percent, render_all, rerank_table, Format};
use crate::sampling::{sample_corpus_bias, Population};
use crate::synth::{synth_bundle, SynthMeta};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Well-formed but empty or unusable data.
    #[error("{0}")]
    Unusable(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("writing {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Unusable(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "biasaudit",
    version,
    about = "Measure political bias in ranked search results"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML file with defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory holding the standard bundle file names.
    #[arg(long, global = true)]
    pub bundle: Option<PathBuf>,
    #[arg(long, global = true)]
    pub items: Option<PathBuf>,
    #[arg(long, global = true)]
    pub users: Option<PathBuf>,
    #[arg(long, global = true)]
    pub topics: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seeds_dem: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seeds_rep: Option<PathBuf>,
    #[arg(long, global = true)]
    pub snapshots: Option<PathBuf>,
    #[arg(long, global = true)]
    pub stream: Option<PathBuf>,
    #[arg(long, global = true)]
    pub scores: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rank_depth: Option<usize>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub min_followings: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer user leanings and write scores.jsonl.
    Infer,
    /// Time-averaged input, output and ranking bias per query.
    Metrics {
        /// JSON Lines of {"query", "category"} for grouped averages.
        #[arg(long)]
        categories: Option<PathBuf>,
    },
    /// Compare the observed ranking with alternative rankings.
    Rerank {
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<RankingStrategy>>,
    },
    /// Evaluate inferred scores against crowd judgments and ground truth.
    Evaluate {
        /// JSON Lines of {"subject", "judgments"} for users.
        #[arg(long)]
        judgments: Option<PathBuf>,
        /// JSON Lines of {"subject", "judgments"} for items.
        #[arg(long)]
        content_judgments: Option<PathBuf>,
        /// JSON Lines of {"user_id", "label"}.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<f64>>,
    },
    /// Bias of a random sample of users or items.
    CorpusBias {
        #[arg(long, default_value = "users")]
        what: Population,
        #[arg(long)]
        sample_size: Option<usize>,
    },
    /// Generate a synthetic bundle with planted leanings.
    Synth(SynthArgs),
    /// Run infer, metrics and rerank, writing every output to --out-dir.
    Report {
        #[arg(long)]
        categories: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<RankingStrategy>>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_users: Option<usize>,
    #[arg(long)]
    pub n_seed_users: Option<usize>,
    #[arg(long)]
    pub n_queries: Option<usize>,
    #[arg(long)]
    pub items_per_query: Option<usize>,
    #[arg(long)]
    pub snapshots_per_query: Option<usize>,
    #[arg(long)]
    pub page_size: Option<usize>,
    /// Democratic, republican and neutral fractions.
    #[arg(long, value_delimiter = ',')]
    pub mixture: Option<Vec<f64>>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub follow_min: Option<usize>,
    #[arg(long)]
    pub follow_max: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub popularity_lean: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ranking_lean: Option<f64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    paths: BundlePaths,
    format: Format,
}

fn resolve(common: &Common) -> Result<Ctx, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.rank_depth {
        cfg.rank_depth = v;
    }
    if let Some(v) = common.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = common.min_followings {
        cfg.min_followings = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
        cfg.synth.seed = v;
    }
    let p = &mut cfg.paths;
    macro_rules! over {
        ($($f:ident),*) => { $( if common.$f.is_some() { p.$f = common.$f.clone(); } )* };
    }
    over!(bundle, items, users, topics, seeds_dem, seeds_rep, snapshots, stream, scores, out_dir);
    cfg.validate()?;
    let explicit = BundlePaths {
        items: cfg.paths.items.clone(),
        users: cfg.paths.users.clone(),
        topics: cfg.paths.topics.clone(),
        seeds_dem: cfg.paths.seeds_dem.clone(),
        seeds_rep: cfg.paths.seeds_rep.clone(),
        snapshots: cfg.paths.snapshots.clone(),
        stream: cfg.paths.stream.clone(),
        scores: cfg.paths.scores.clone(),
    };
    let paths = match &cfg.paths.bundle {
        Some(dir) => explicit.or(BundlePaths::in_dir(dir)),
        None => explicit,
    };
    Ok(Ctx {
        cfg,
        paths,
        format: common.format.unwrap_or_default(),
    })
}

fn require(path: &Option<PathBuf>, flag: &str) -> Result<(), CliError> {
    match path {
        Some(_) => Ok(()),
        None => Err(CliError::Usage(format!(
            "missing input: pass {flag} or --bundle"
        ))),
    }
}

fn load(paths: &BundlePaths) -> Result<CorpusBundle, CliError> {
    let (bundle, warnings) = load_bundle(paths)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(bundle)
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(wrap)?;
    }
    std::fs::write(path, content).map_err(wrap)
}

/// Writes `content` to `out_dir/name`, or to stdout without an out dir.
fn emit(out_dir: Option<&Path>, name: &str, content: &str) -> Result<(), CliError> {
    match out_dir {
        Some(dir) => write_file(&dir.join(name), content),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Table => "txt",
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = resolve(&cli.common)?;
    match cli.command {
        Command::Infer => cmd_infer(&ctx),
        Command::Metrics { categories } => {
            cmd_metrics(&ctx, categories.or(ctx.cfg.paths.categories.clone()))
        }
        Command::Rerank { strategies } => cmd_rerank(&ctx, strategies),
        Command::Evaluate {
            judgments,
            content_judgments,
            truth,
            candidates,
        } => {
            let p = &ctx.cfg.paths;
            cmd_evaluate(
                &ctx,
                judgments.or(p.judgments.clone()),
                content_judgments.or(p.content_judgments.clone()),
                truth.or(p.truth.clone()),
                candidates,
            )
        }
        Command::CorpusBias { what, sample_size } => cmd_corpus_bias(&ctx, what, sample_size),
        Command::Synth(args) => cmd_synth(&ctx, &args),
        Command::Report {
            categories,
            strategies,
        } => cmd_report(
            &ctx,
            categories.or(ctx.cfg.paths.categories.clone()),
            strategies,
        ),
    }
}

fn infer_bundle(ctx: &Ctx) -> Result<(CorpusBundle, crate::pipeline::InferOutcome), CliError> {
    require(&ctx.paths.users, "--users")?;
    require(&ctx.paths.topics, "--topics")?;
    require(&ctx.paths.seeds_dem, "--seeds-dem")?;
    require(&ctx.paths.seeds_rep, "--seeds-rep")?;
    let bundle = load(&ctx.paths)?;
    for (seeds, path) in [
        (&bundle.seed_dem, &ctx.paths.seeds_dem),
        (&bundle.seed_rep, &ctx.paths.seeds_rep),
    ] {
        if seeds.is_empty() {
            let path = path.as_deref().unwrap_or(Path::new("?"));
            return Err(CliError::Unusable(format!(
                "seed file {} is empty",
                path.display()
            )));
        }
    }
    if bundle.followings.is_empty() {
        return Err(CliError::Unusable("no users to infer".into()));
    }
    let lc = LeaningConfig {
        min_followings: ctx.cfg.min_followings,
        neutral_threshold: ctx.cfg.threshold,
    };
    let outcome = infer_scores(&bundle, lc)
        .map_err(|e| CliError::Unusable(format!("cannot fit leaning model: {e}")))?;
    eprintln!(
        "inferred {} of {} users (coverage {})",
        outcome.inferred,
        outcome.total,
        percent(outcome.coverage())
    );
    Ok((bundle, outcome))
}

fn scores_jsonl(scores: &BTreeMap<UserId, UserScore>) -> String {
    let mut buf = Vec::new();
    crate::bundle::write_jsonl_to(&mut buf, score_records(scores)).expect("in-memory write");
    String::from_utf8(buf).expect("json is utf-8")
}

fn cmd_infer(ctx: &Ctx) -> Result<(), CliError> {
    let (_, outcome) = infer_bundle(ctx)?;
    emit(
        ctx.cfg.paths.out_dir.as_deref(),
        SCORES_FILE,
        &scores_jsonl(&outcome.scores),
    )
}

fn scored_bundle(ctx: &Ctx) -> Result<CorpusBundle, CliError> {
    require(&ctx.paths.items, "--items")?;
    require(&ctx.paths.snapshots, "--snapshots")?;
    require(&ctx.paths.stream, "--stream")?;
    require(&ctx.paths.scores, "--scores")?;
    let mut bundle = load(&ctx.paths)?;
    bundle.attach_source_bias();
    Ok(bundle)
}

fn read_categories(path: &Path) -> Result<BTreeMap<QueryId, String>, CliError> {
    let mut out = BTreeMap::new();
    for (line, r) in read_jsonl::<CategoryRecord>(path)? {
        let q = QueryId::new(r.query).map_err(|e| LoadError::Schema {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        out.insert(q, r.category);
    }
    Ok(out)
}

fn metrics_output(
    bundle: &CorpusBundle,
    ctx: &Ctx,
    categories: Option<&Path>,
) -> Result<crate::report::Table, CliError> {
    let out = query_metrics(bundle, ctx.cfg.rank_depth);
    for f in &out.failures {
        eprintln!("skipping query {}: {}", f.query, f.reason);
    }
    if out.reports.is_empty() {
        return Err(CliError::Unusable("no query yielded usable data".into()));
    }
    let cats = match categories {
        Some(p) => category_averages(&out.reports, &read_categories(p)?),
        None => Vec::new(),
    };
    Ok(metrics_table(&out.reports, &cats))
}

fn cmd_metrics(ctx: &Ctx, categories: Option<PathBuf>) -> Result<(), CliError> {
    let bundle = scored_bundle(ctx)?;
    let table = metrics_output(&bundle, ctx, categories.as_deref())?;
    let name = format!("metrics.{}", extension(ctx.format));
    emit(
        ctx.cfg.paths.out_dir.as_deref(),
        &name,
        &table.render(ctx.format),
    )
}

fn rerank_output(
    bundle: &CorpusBundle,
    ctx: &Ctx,
    strategies: Option<Vec<RankingStrategy>>,
) -> Result<crate::report::Table, CliError> {
    let strategies = strategies.unwrap_or_else(|| ctx.cfg.strategies.clone());
    let out = rerank_comparison(bundle, &strategies, ctx.cfg.rank_depth);
    for f in &out.failures {
        eprintln!("skipping query {}: {}", f.query, f.reason);
    }
    if out.rows.is_empty() {
        return Err(CliError::Unusable("no query yielded usable data".into()));
    }
    Ok(rerank_table(&out))
}

fn cmd_rerank(ctx: &Ctx, strategies: Option<Vec<RankingStrategy>>) -> Result<(), CliError> {
    require(&ctx.paths.items, "--items")?;
    require(&ctx.paths.stream, "--stream")?;
    require(&ctx.paths.scores, "--scores")?;
    let mut bundle = load(&ctx.paths)?;
    bundle.attach_source_bias();
    let table = rerank_output(&bundle, ctx, strategies)?;
    let name = format!("rerank.{}", extension(ctx.format));
    emit(
        ctx.cfg.paths.out_dir.as_deref(),
        &name,
        &table.render(ctx.format),
    )
}

fn read_judgments(path: &Path) -> Result<BTreeMap<String, BiasScore>, CliError> {
    let mut out = BTreeMap::new();
    for (line, r) in read_jsonl::<JudgmentRecord>(path)? {
        let score = amt_score(&r.judgments).map_err(|e| LoadError::Schema {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        out.insert(r.subject, score);
    }
    Ok(out)
}

fn cmd_evaluate(
    ctx: &Ctx,
    judgments: Option<PathBuf>,
    content_judgments: Option<PathBuf>,
    truth: Option<PathBuf>,
    candidates: Option<Vec<f64>>,
) -> Result<(), CliError> {
    require(&ctx.paths.scores, "--scores")?;
    if judgments.is_none() && truth.is_none() && content_judgments.is_none() {
        return Err(CliError::Usage(
            "nothing to evaluate: pass --judgments, --truth or --content-judgments".into(),
        ));
    }
    let candidates = candidates.unwrap_or_else(|| ctx.cfg.candidates.clone());
    let scores_only = BundlePaths {
        scores: ctx.paths.scores.clone(),
        items: content_judgments.as_ref().and(ctx.paths.items.clone()),
        ..BundlePaths::default()
    };
    if content_judgments.is_some() {
        require(&scores_only.items, "--items")?;
    }
    let bundle = load(&scores_only)?;
    let mut inputs = EvalInputs {
        inferred: bundle
            .user_scores
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        ..EvalInputs::default()
    };
    if let Some(p) = &judgments {
        inputs.amt = read_judgments(p)?;
        if inputs.amt.is_empty() {
            return Err(CliError::Unusable(format!(
                "{} has no judgments",
                p.display()
            )));
        }
    }
    if let Some(p) = &truth {
        inputs.truth = Some(
            read_jsonl::<GroundTruthRecord>(p)?
                .into_iter()
                .map(|(_, r)| (r.user_id, r.label))
                .collect(),
        );
    }
    if let Some(p) = &content_judgments {
        let authors: BTreeMap<ItemId, UserId> = bundle
            .items
            .values()
            .map(|i| (i.id.clone(), i.author.clone()))
            .collect();
        inputs.content = Some((read_judgments(p)?, authors));
    }
    let report = evaluate(&inputs, ctx.cfg.threshold, &candidates)
        .map_err(|e| CliError::Unusable(e.to_string()))?;
    if let Some(a) = &report.amt {
        eprintln!("selected threshold {}", a.sweep.selected);
    }
    if let Some(c) = &report.coverage {
        if c.per_class.is_empty() {
            return Err(CliError::Unusable(
                "no overlap between ground truth and scores".into(),
            ));
        }
    }
    let text = render_all(&evaluation_tables(&report), ctx.format);
    let name = format!("evaluation.{}", extension(ctx.format));
    emit(ctx.cfg.paths.out_dir.as_deref(), &name, &text)
}

fn cmd_corpus_bias(
    ctx: &Ctx,
    what: Population,
    sample_size: Option<usize>,
) -> Result<(), CliError> {
    require(&ctx.paths.scores, "--scores")?;
    match what {
        Population::Users => require(&ctx.paths.users, "--users")?,
        Population::Items => require(&ctx.paths.items, "--items")?,
    }
    let paths = BundlePaths {
        scores: ctx.paths.scores.clone(),
        users: ctx
            .paths
            .users
            .clone()
            .filter(|_| what == Population::Users),
        items: ctx
            .paths
            .items
            .clone()
            .filter(|_| what == Population::Items),
        ..BundlePaths::default()
    };
    let mut bundle = load(&paths)?;
    bundle.attach_source_bias();
    let n = sample_size.unwrap_or(ctx.cfg.sample_size);
    let s = sample_corpus_bias(&bundle, what, n, ctx.cfg.seed)
        .map_err(|e| CliError::Unusable(e.to_string()))?;
    let mut t =
        crate::report::Table::new(&["population", "size", "sampled", "uninferable", "bias"]);
    let label = match what {
        Population::Users => "users",
        Population::Items => "items",
    };
    t.push(vec![
        label.into(),
        s.population.into(),
        s.sampled.into(),
        s.uninferable.into(),
        s.bias.value().into(),
    ]);
    let name = format!("corpus_bias.{}", extension(ctx.format));
    emit(
        ctx.cfg.paths.out_dir.as_deref(),
        &name,
        &t.render(ctx.format),
    )
}

fn cmd_synth(ctx: &Ctx, args: &SynthArgs) -> Result<(), CliError> {
    let Some(dir) = ctx.cfg.paths.out_dir.clone() else {
        return Err(CliError::Usage("synth needs --out-dir".into()));
    };
    let mut cfg = ctx.cfg.synth.clone();
    macro_rules! over {
        ($($arg:ident => $field:ident),*) => { $( if let Some(v) = args.$arg { cfg.$field = v; } )* };
    }
    over!(
        n_users => n_users,
        n_seed_users => n_seed_users,
        n_queries => n_queries,
        items_per_query => n_items_per_query,
        snapshots_per_query => snapshots_per_query,
        page_size => page_size,
        separation => separation,
        follow_min => min_followings,
        follow_max => max_followings,
        popularity_lean => popularity_lean,
        ranking_lean => ranking_lean
    );
    if let Some(m) = &args.mixture {
        let [d, r, n] = m[..] else {
            return Err(CliError::Usage(format!(
                "--mixture needs 3 fractions, got {}",
                m.len()
            )));
        };
        cfg.mixture = [d, r, n];
    }
    let synthetic = synth_bundle(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let wrap = |source| CliError::Write {
        path: dir.clone(),
        source,
    };
    save_bundle(&synthetic.bundle, &dir).map_err(wrap)?;
    write_jsonl(
        &dir.join(GROUND_TRUTH_FILE),
        synthetic
            .ground_truth
            .iter()
            .map(|(u, l)| GroundTruthRecord {
                user_id: u.to_string(),
                label: *l,
            }),
    )
    .map_err(wrap)?;
    let meta = serde_json::to_string_pretty(&SynthMeta::for_config(&cfg)).expect("meta serializes");
    write_file(&dir.join(META_FILE), &(meta + "\n"))?;
    eprintln!(
        "wrote {} users, {} items, {} snapshots to {}",
        synthetic.bundle.followings.len(),
        synthetic.bundle.items.len(),
        synthetic.bundle.snapshots.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_report(
    ctx: &Ctx,
    categories: Option<PathBuf>,
    strategies: Option<Vec<RankingStrategy>>,
) -> Result<(), CliError> {
    let Some(dir) = ctx.cfg.paths.out_dir.clone() else {
        return Err(CliError::Usage("report needs --out-dir".into()));
    };
    require(&ctx.paths.items, "--items")?;
    require(&ctx.paths.snapshots, "--snapshots")?;
    require(&ctx.paths.stream, "--stream")?;
    let (mut bundle, outcome) = infer_bundle(ctx)?;
    write_file(&dir.join(SCORES_FILE), &scores_jsonl(&outcome.scores))?;
    bundle.user_scores = outcome.scores;
    bundle.attach_source_bias();
    let metrics = metrics_output(&bundle, ctx, categories.as_deref())?;
    let rerank = rerank_output(&bundle, ctx, strategies)?;
    for (name, table) in [("metrics", &metrics), ("rerank", &rerank)] {
        write_file(&dir.join(format!("{name}.csv")), &table.to_csv())?;
        write_file(&dir.join(format!("{name}.txt")), &table.to_text())?;
    }
    Ok(())
}
