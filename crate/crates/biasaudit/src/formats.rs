//! On-disk record shapes. One JSON object per line, UTF-8.

use biasaudit_core::evaluation::Judgment;
use biasaudit_core::LeaningLabel;
use serde::{Deserialize, Serialize};

pub const ITEMS_FILE: &str = "items.jsonl";
pub const USERS_FILE: &str = "users.jsonl";
pub const TOPICS_FILE: &str = "topic_labels.jsonl";
pub const SEEDS_DEM_FILE: &str = "seeds_dem.txt";
pub const SEEDS_REP_FILE: &str = "seeds_rep.txt";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const STREAM_FILE: &str = "stream.jsonl";
pub const SCORES_FILE: &str = "scores.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";
pub const META_FILE: &str = "meta.json";

/// Counts are read signed so a negative value is reported as a schema
/// violation instead of a parse failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub tweet_id: String,
    pub user_id: String,
    pub created_at: i64,
    pub retweet_count: i64,
    pub favorite_count: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    #[serde(default)]
    pub followings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub user_id: String,
    pub topics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub query: String,
    pub captured_at: i64,
    pub ranked_tweet_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub query: String,
    pub tweet_id: String,
}

/// Inference output for one user; `raw` and `normalized` are null for
/// uninferable users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub user_id: String,
    pub raw: Option<f64>,
    pub normalized: Option<f64>,
    pub label: LeaningLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub user_id: String,
    pub label: LeaningLabel,
}

/// Crowd judgments for a user or an item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub subject: String,
    pub judgments: Vec<Judgment>,
}

/// Optional query to category mapping used for grouped averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRecord {
    pub query: String,
    pub category: String,
}
