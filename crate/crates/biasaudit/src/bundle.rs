//! Loading and saving a corpus bundle: items, follow graph, topic labels,
//! seed sets, ranked snapshots, the per-query input stream and (optionally)
//! inferred user scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use biasaudit_core::leaning::{FollowGraph, TopicLabels};
use biasaudit_core::{
    BiasScore, InputCorpus, Item, ItemId, LeaningLabel, QueryId, RankedSnapshot, Topic, UserId,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::formats::*;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: schema violation: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// A non-fatal problem found while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadWarning {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.file.display(), l, self.message),
            None => write!(f, "{}: {}", self.file.display(), self.message),
        }
    }
}

/// Inferred score of one user, as read from `scores.jsonl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserScore {
    pub raw: Option<f64>,
    pub normalized: Option<BiasScore>,
    pub label: LeaningLabel,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusBundle {
    pub items: BTreeMap<ItemId, Item>,
    pub followings: FollowGraph,
    pub topic_labels: TopicLabels,
    /// Sorted by query, then capture time.
    pub snapshots: Vec<RankedSnapshot>,
    pub input_corpora: BTreeMap<QueryId, InputCorpus>,
    pub seed_dem: Vec<UserId>,
    pub seed_rep: Vec<UserId>,
    pub user_scores: BTreeMap<UserId, UserScore>,
}

impl CorpusBundle {
    /// Sets every item's source bias from its author's inferred score.
    /// Uninferable or unscored authors leave the item unscored.
    pub fn attach_source_bias(&mut self) {
        for item in self.items.values_mut() {
            item.source_bias = self
                .user_scores
                .get(&item.author)
                .filter(|s| s.label.is_inferred())
                .and_then(|s| s.normalized);
        }
    }

    pub fn snapshots_by_query(&self) -> BTreeMap<&QueryId, Vec<RankedSnapshot>> {
        let mut out: BTreeMap<&QueryId, Vec<RankedSnapshot>> = BTreeMap::new();
        for s in &self.snapshots {
            out.entry(&s.query).or_default().push(s.clone());
        }
        out
    }
}

/// Which files make up a bundle. Absent entries are simply not loaded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BundlePaths {
    pub items: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub seeds_dem: Option<PathBuf>,
    pub seeds_rep: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    pub stream: Option<PathBuf>,
    pub scores: Option<PathBuf>,
}

impl BundlePaths {
    /// Standard file names inside `dir`, keeping only files that exist.
    pub fn in_dir(dir: &Path) -> Self {
        let pick = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        BundlePaths {
            items: pick(ITEMS_FILE),
            users: pick(USERS_FILE),
            topics: pick(TOPICS_FILE),
            seeds_dem: pick(SEEDS_DEM_FILE),
            seeds_rep: pick(SEEDS_REP_FILE),
            snapshots: pick(SNAPSHOTS_FILE),
            stream: pick(STREAM_FILE),
            scores: pick(SCORES_FILE),
        }
    }

    /// Fills unset entries from `other`.
    pub fn or(self, other: BundlePaths) -> Self {
        BundlePaths {
            items: self.items.or(other.items),
            users: self.users.or(other.users),
            topics: self.topics.or(other.topics),
            seeds_dem: self.seeds_dem.or(other.seeds_dem),
            seeds_rep: self.seeds_rep.or(other.seeds_rep),
            snapshots: self.snapshots.or(other.snapshots),
            stream: self.stream.or(other.stream),
            scores: self.scores.or(other.scores),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, LoadError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Parses every non-blank line of a JSON Lines file, with 1-based line
/// numbers. The first malformed line fails the whole file.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, LoadError> {
    let mut out = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| LoadError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push((idx + 1, record));
    }
    Ok(out)
}

/// One id per line; blank lines and `#` comments are ignored.
pub fn read_id_list(path: &Path) -> Result<Vec<(usize, String)>, LoadError> {
    let mut out = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let id = line.trim();
        if id.is_empty() || id.starts_with('#') {
            continue;
        }
        out.push((idx + 1, id.to_string()));
    }
    Ok(out)
}

struct Loader {
    warnings: Vec<LoadWarning>,
}

impl Loader {
    fn warn(&mut self, file: &Path, line: Option<usize>, message: impl Into<String>) {
        self.warnings.push(LoadWarning {
            file: file.to_path_buf(),
            line,
            message: message.into(),
        });
    }

    fn records<T: DeserializeOwned>(&mut self, path: &Path) -> Result<Vec<(usize, T)>, LoadError> {
        let records = read_jsonl(path)?;
        if records.is_empty() {
            self.warn(path, None, "file has no records");
        }
        Ok(records)
    }

    fn note_duplicates(&mut self, path: &Path, count: usize) {
        if count > 0 {
            self.warn(
                path,
                None,
                format!("{count} duplicate record(s); last record wins"),
            );
        }
    }
}

fn schema(path: &Path, line: usize, message: impl std::fmt::Display) -> LoadError {
    LoadError::Schema {
        path: path.to_path_buf(),
        line,
        message: message.to_string(),
    }
}

macro_rules! id {
    ($ty:ty, $value:expr, $path:expr, $line:expr) => {
        <$ty>::new($value).map_err(|e| schema($path, $line, e))?
    };
}

/// Loads and validates a bundle. Dangling references and duplicates are
/// reported as warnings; malformed lines and invariant breaches are errors.
pub fn load_bundle(paths: &BundlePaths) -> Result<(CorpusBundle, Vec<LoadWarning>), LoadError> {
    let mut ld = Loader {
        warnings: Vec::new(),
    };
    let mut b = CorpusBundle::default();

    if let Some(path) = &paths.items {
        let mut dups = 0;
        for (line, r) in ld.records::<ItemRecord>(path)? {
            let id = id!(ItemId, r.tweet_id, path, line);
            let author = id!(UserId, r.user_id, path, line);
            if r.retweet_count < 0 {
                return Err(schema(
                    path,
                    line,
                    format!("retweet_count {} is negative", r.retweet_count),
                ));
            }
            if r.favorite_count < 0 {
                return Err(schema(
                    path,
                    line,
                    format!("favorite_count {} is negative", r.favorite_count),
                ));
            }
            let mut item = Item::new(id.clone(), author, r.created_at)
                .with_counts(r.retweet_count as u64, r.favorite_count as u64);
            item.text = r.text;
            if b.items.insert(id, item).is_some() {
                dups += 1;
            }
        }
        ld.note_duplicates(path, dups);
    }

    if let Some(path) = &paths.users {
        let mut dups = 0;
        for (line, r) in ld.records::<UserRecord>(path)? {
            let user = id!(UserId, r.user_id, path, line);
            let followings = r
                .followings
                .into_iter()
                .map(|f| UserId::new(f).map_err(|e| schema(path, line, e)))
                .collect::<Result<Vec<_>, _>>()?;
            if b.followings.insert(user, followings).is_some() {
                dups += 1;
            }
        }
        ld.note_duplicates(path, dups);
    }

    if let Some(path) = &paths.topics {
        let mut dups = 0;
        for (line, r) in ld.records::<TopicRecord>(path)? {
            let user = id!(UserId, r.user_id, path, line);
            let topics = r
                .topics
                .iter()
                .map(|t| Topic::new(t).map_err(|e| schema(path, line, e)))
                .collect::<Result<Vec<_>, _>>()?;
            if b.topic_labels.insert(user, topics).is_some() {
                dups += 1;
            }
        }
        ld.note_duplicates(path, dups);
    }

    for (slot, path) in [
        (&mut b.seed_dem, &paths.seeds_dem),
        (&mut b.seed_rep, &paths.seeds_rep),
    ] {
        if let Some(path) = path {
            let ids = read_id_list(path)?;
            if ids.is_empty() {
                ld.warn(path, None, "seed file is empty");
            }
            let mut seen = BTreeSet::new();
            let mut dups = 0;
            for (line, id) in ids {
                let id = id!(UserId, id, path, line);
                if seen.insert(id.clone()) {
                    slot.push(id);
                } else {
                    dups += 1;
                }
            }
            ld.note_duplicates(path, dups);
        }
    }

    if let Some(path) = &paths.snapshots {
        let mut by_key: BTreeMap<(QueryId, i64), RankedSnapshot> = BTreeMap::new();
        let mut dups = 0;
        for (line, r) in ld.records::<SnapshotRecord>(path)? {
            let query = id!(QueryId, r.query, path, line);
            let ids = r
                .ranked_tweet_ids
                .into_iter()
                .map(|t| ItemId::new(t).map_err(|e| schema(path, line, e)))
                .collect::<Result<Vec<_>, _>>()?;
            let snap = RankedSnapshot::new(query.clone(), r.captured_at, ids);
            if let Some(v) = biasaudit_core::Validate::validate(&snap).into_iter().next() {
                return Err(schema(path, line, v));
            }
            if by_key.insert((query, r.captured_at), snap).is_some() {
                dups += 1;
            }
        }
        ld.note_duplicates(path, dups);
        b.snapshots = by_key.into_values().collect();
    }

    if let Some(path) = &paths.stream {
        let mut members: BTreeMap<QueryId, (Vec<ItemId>, BTreeSet<ItemId>)> = BTreeMap::new();
        let mut dups = 0;
        for (line, r) in ld.records::<StreamRecord>(path)? {
            let query = id!(QueryId, r.query, path, line);
            let item = id!(ItemId, r.tweet_id, path, line);
            let (order, seen) = members.entry(query).or_default();
            if seen.insert(item.clone()) {
                order.push(item);
            } else {
                dups += 1;
            }
        }
        ld.note_duplicates(path, dups);
        b.input_corpora = members
            .into_iter()
            .map(|(q, (items, _))| (q.clone(), InputCorpus::new(q, items)))
            .collect();
    }

    if let Some(path) = &paths.scores {
        let mut dups = 0;
        for (line, r) in ld.records::<ScoreRecord>(path)? {
            let user = id!(UserId, r.user_id, path, line);
            let normalized = match r.normalized {
                Some(v) => Some(BiasScore::new(v).map_err(|e| schema(path, line, e))?),
                None => None,
            };
            if r.label.is_inferred() && normalized.is_none() {
                return Err(schema(
                    path,
                    line,
                    "inferred label without a normalized score",
                ));
            }
            let score = UserScore {
                raw: r.raw,
                normalized,
                label: r.label,
            };
            if b.user_scores.insert(user, score).is_some() {
                dups += 1;
            }
        }
        ld.note_duplicates(path, dups);
    }

    check_references(&b, paths, &mut ld);
    Ok((b, ld.warnings))
}

fn check_references(b: &CorpusBundle, paths: &BundlePaths, ld: &mut Loader) {
    let known_user = |u: &UserId| b.followings.contains_key(u) || b.topic_labels.contains_key(u);
    let mut dangling: Vec<(PathBuf, String)> = Vec::new();

    if let (Some(path), true) = (
        &paths.items,
        paths.users.is_some() || paths.topics.is_some(),
    ) {
        for item in b.items.values() {
            if !known_user(&item.author) {
                dangling.push((
                    path.clone(),
                    format!("item {} has unknown author {}", item.id, item.author),
                ));
            }
        }
    }
    if let Some(path) = &paths.users {
        for (u, fs) in &b.followings {
            for f in fs {
                if !known_user(f) {
                    dangling.push((path.clone(), format!("user {u} follows unknown user {f}")));
                }
            }
        }
    }
    for (seeds, path) in [
        (&b.seed_dem, &paths.seeds_dem),
        (&b.seed_rep, &paths.seeds_rep),
    ] {
        if let Some(path) = path {
            for u in seeds.iter().filter(|u| !b.followings.contains_key(*u)) {
                dangling.push((
                    path.clone(),
                    format!("seed user {u} has no followings record"),
                ));
            }
        }
    }
    if let Some(path) = &paths.snapshots {
        for s in &b.snapshots {
            for id in s
                .ranked_items
                .iter()
                .filter(|id| !b.items.contains_key(*id))
            {
                dangling.push((
                    path.clone(),
                    format!(
                        "snapshot {}@{} references unknown item {id}",
                        s.query, s.captured_at
                    ),
                ));
            }
        }
    }
    if let Some(path) = &paths.stream {
        for c in b.input_corpora.values() {
            for id in c.items.iter().filter(|id| !b.items.contains_key(*id)) {
                dangling.push((
                    path.clone(),
                    format!("stream for {} references unknown item {id}", c.query),
                ));
            }
        }
    }
    for (file, message) in dangling {
        ld.warn(&file, None, message);
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

pub fn write_jsonl<T: Serialize>(
    path: &Path,
    records: impl IntoIterator<Item = T>,
) -> io::Result<()> {
    let mut w = create(path)?;
    write_jsonl_to(&mut w, records)?;
    w.flush()
}

pub fn write_jsonl_to<T: Serialize, W: Write>(
    w: &mut W,
    records: impl IntoIterator<Item = T>,
) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, &r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn write_ids(path: &Path, ids: &[UserId]) -> io::Result<()> {
    let mut w = create(path)?;
    for id in ids {
        writeln!(w, "{id}")?;
    }
    w.flush()
}

pub fn score_records(scores: &BTreeMap<UserId, UserScore>) -> Vec<ScoreRecord> {
    scores
        .iter()
        .map(|(u, s)| ScoreRecord {
            user_id: u.to_string(),
            raw: s.raw,
            normalized: s.normalized.map(|n| n.value()),
            label: s.label,
        })
        .collect()
}

/// Writes the bundle under `dir` with the standard file names. Output is a
/// deterministic function of the bundle.
pub fn save_bundle(bundle: &CorpusBundle, dir: &Path) -> io::Result<BundlePaths> {
    std::fs::create_dir_all(dir)?;
    let paths = BundlePaths {
        items: Some(dir.join(ITEMS_FILE)),
        users: Some(dir.join(USERS_FILE)),
        topics: Some(dir.join(TOPICS_FILE)),
        seeds_dem: Some(dir.join(SEEDS_DEM_FILE)),
        seeds_rep: Some(dir.join(SEEDS_REP_FILE)),
        snapshots: Some(dir.join(SNAPSHOTS_FILE)),
        stream: Some(dir.join(STREAM_FILE)),
        scores: (!bundle.user_scores.is_empty()).then(|| dir.join(SCORES_FILE)),
    };
    write_jsonl(
        paths.items.as_deref().unwrap(),
        bundle.items.values().map(|i| ItemRecord {
            tweet_id: i.id.to_string(),
            user_id: i.author.to_string(),
            created_at: i.created_at,
            retweet_count: i.retweet_count as i64,
            favorite_count: i.favorite_count as i64,
            text: i.text.clone(),
        }),
    )?;
    write_jsonl(
        paths.users.as_deref().unwrap(),
        bundle.followings.iter().map(|(u, fs)| UserRecord {
            user_id: u.to_string(),
            followings: fs.iter().map(|f| f.to_string()).collect(),
        }),
    )?;
    write_jsonl(
        paths.topics.as_deref().unwrap(),
        bundle.topic_labels.iter().map(|(u, ts)| TopicRecord {
            user_id: u.to_string(),
            topics: ts.iter().map(|t| t.to_string()).collect(),
        }),
    )?;
    write_ids(paths.seeds_dem.as_deref().unwrap(), &bundle.seed_dem)?;
    write_ids(paths.seeds_rep.as_deref().unwrap(), &bundle.seed_rep)?;
    write_jsonl(
        paths.snapshots.as_deref().unwrap(),
        bundle.snapshots.iter().map(|s| SnapshotRecord {
            query: s.query.to_string(),
            captured_at: s.captured_at,
            ranked_tweet_ids: s.ranked_items.iter().map(|i| i.to_string()).collect(),
        }),
    )?;
    write_jsonl(
        paths.stream.as_deref().unwrap(),
        bundle.input_corpora.values().flat_map(|c| {
            c.items.iter().map(move |i| StreamRecord {
                query: c.query.to_string(),
                tweet_id: i.to_string(),
            })
        }),
    )?;
    if let Some(p) = &paths.scores {
        write_jsonl(p, score_records(&bundle.user_scores))?;
    }
    Ok(paths)
}
