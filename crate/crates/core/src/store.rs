//! Flat-directory persistence of analysis results and cross-protocol comparison.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analyzer::{AnalysisResult, OperationCounts, RoleAttribution};
use crate::cost_model::CostCategory;

pub const RESULT_SUFFIX: &str = ".result.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: not a valid result file: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },

    #[error("protocol names `{existing}` and `{incoming}` both map to `{slug}{RESULT_SUFFIX}`")]
    SlugCollision {
        slug: String,
        existing: String,
        incoming: String,
    },

    #[error("protocol name `{0}` has no letters or digits to build a file name from")]
    EmptySlug(String),

    #[error("no stored result for: {}", .0.join(", "))]
    NotFound(Vec<String>),

    #[error("nothing to compare")]
    EmptySet,
}

/// An analysis plus where and when it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredResult {
    pub result: AnalysisResult,
    pub created_at: DateTime<Utc>,
    pub source_path: String,
    pub source_digest: String,
}

impl StoredResult {
    pub fn new(
        result: AnalysisResult,
        created_at: DateTime<Utc>,
        source_path: impl Into<String>,
        source: &[u8],
    ) -> Self {
        StoredResult {
            result,
            created_at: truncate_to_seconds(created_at),
            source_path: source_path.into(),
            source_digest: source_digest(source),
        }
    }

    pub fn protocol_name(&self) -> &str {
        &self.result.protocol_name
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ResultRecord::from(self)).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<StoredResult, String> {
        let record: ResultRecord = serde_json::from_str(text).map_err(|e| e.to_string())?;
        record.try_into()
    }
}

fn truncate_to_seconds(t: DateTime<Utc>) -> DateTime<Utc> {
    DateTime::from_timestamp(t.timestamp(), 0).unwrap_or(t)
}

pub fn source_digest(source: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(source)))
}

/// Lowercase name with every run of non-alphanumerics collapsed to `-`.
pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

pub fn result_path(store_dir: &Path, protocol_name: &str) -> Result<PathBuf, StoreError> {
    let slug = slug(protocol_name);
    if slug.is_empty() {
        return Err(StoreError::EmptySlug(protocol_name.to_string()));
    }
    Ok(store_dir.join(format!("{slug}{RESULT_SUFFIX}")))
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_result(path: &Path) -> Result<StoredResult, StoreError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    StoredResult::from_json(&text).map_err(|message| StoreError::Corrupt {
        path: path.to_path_buf(),
        message,
    })
}

/// Writes `<slug>.result.json`, replacing any earlier result for the same protocol.
pub fn save_result(stored: &StoredResult, store_dir: &Path) -> Result<PathBuf, StoreError> {
    fs::create_dir_all(store_dir).map_err(io_error(store_dir))?;
    let path = result_path(store_dir, stored.protocol_name())?;
    if path.exists() {
        let existing = read_result(&path)?;
        if existing.protocol_name() != stored.protocol_name() {
            return Err(StoreError::SlugCollision {
                slug: slug(stored.protocol_name()),
                existing: existing.protocol_name().to_string(),
                incoming: stored.protocol_name().to_string(),
            });
        }
    }

    let file_name = path.file_name().expect("slug file name").to_string_lossy();
    let tmp = store_dir.join(format!(".{file_name}.tmp"));
    let mut text = stored.to_json();
    text.push('\n');
    fs::write(&tmp, text).map_err(io_error(&tmp))?;
    fs::rename(&tmp, &path).map_err(io_error(&path))?;
    Ok(path)
}

/// Stored results keyed by distinct protocol name, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonSet {
    pub name: String,
    entries: Vec<StoredResult>,
}

impl ComparisonSet {
    pub fn new(name: impl Into<String>) -> Self {
        ComparisonSet {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    /// Adds an entry; an entry with the same protocol name is replaced in place.
    pub fn insert(&mut self, stored: StoredResult) {
        match self
            .entries
            .iter_mut()
            .find(|e| e.protocol_name() == stored.protocol_name())
        {
            Some(slot) => *slot = stored,
            None => self.entries.push(stored),
        }
    }

    pub fn entries(&self) -> &[StoredResult] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<StoredResult> for ComparisonSet {
    fn from_iter<I: IntoIterator<Item = StoredResult>>(iter: I) -> Self {
        let mut set = ComparisonSet::new("comparison");
        for stored in iter {
            set.insert(stored);
        }
        set
    }
}

/// Loads the named protocols' results in the order given.
pub fn load_results(store_dir: &Path, names: &[String]) -> Result<ComparisonSet, StoreError> {
    let mut set = ComparisonSet::new("comparison");
    let mut missing = Vec::new();
    for name in names {
        let path = result_path(store_dir, name)?;
        if !path.is_file() {
            missing.push(name.clone());
            continue;
        }
        set.insert(read_result(&path)?);
    }
    if !missing.is_empty() {
        return Err(StoreError::NotFound(missing));
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub protocol_name: String,
    pub counts: OperationCounts,
    pub computation_ms: f64,
    pub communication: u64,
    pub model_name: String,
    pub model_digest: String,
}

/// Rows in set order plus two rankings of row indices, cheapest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub by_computation: Vec<usize>,
    pub by_communication: Vec<usize>,
    pub warnings: Vec<String>,
}

impl Comparison {
    pub fn computation_ranking(&self) -> Vec<&str> {
        self.names(&self.by_computation)
    }

    pub fn communication_ranking(&self) -> Vec<&str> {
        self.names(&self.by_communication)
    }

    fn names(&self, order: &[usize]) -> Vec<&str> {
        order
            .iter()
            .map(|&i| self.rows[i].protocol_name.as_str())
            .collect()
    }
}

pub fn compare(set: &ComparisonSet) -> Result<Comparison, StoreError> {
    if set.is_empty() {
        return Err(StoreError::EmptySet);
    }
    let rows: Vec<ComparisonRow> = set
        .entries()
        .iter()
        .map(|e| ComparisonRow {
            protocol_name: e.result.protocol_name.clone(),
            counts: e.result.counts.clone(),
            computation_ms: e.result.computation_ms,
            communication: e.result.communication,
            model_name: e.result.model_name.clone(),
            model_digest: e.result.model_digest.clone(),
        })
        .collect();

    let rank = |key: &dyn Fn(&ComparisonRow, &ComparisonRow) -> Ordering| {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| {
            key(&rows[a], &rows[b]).then_with(|| rows[a].protocol_name.cmp(&rows[b].protocol_name))
        });
        order
    };
    let by_computation = rank(&|a, b| a.computation_ms.total_cmp(&b.computation_ms));
    let by_communication = rank(&|a, b| a.communication.cmp(&b.communication));

    let mut warnings = Vec::new();
    let digests: BTreeSet<&str> = rows.iter().map(|r| r.model_digest.as_str()).collect();
    if digests.len() > 1 {
        let detail: Vec<String> = rows
            .iter()
            .map(|r| format!("{} ({})", r.protocol_name, r.model_name))
            .collect();
        warnings.push(format!(
            "results were priced with {} different cost models: {}",
            digests.len(),
            detail.join(", ")
        ));
    }

    Ok(Comparison {
        rows,
        by_computation,
        by_communication,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsRecord {
    #[serde(rename = "Th")]
    th: u64,
    #[serde(rename = "Pm")]
    pm: u64,
    #[serde(rename = "Pe")]
    pe: u64,
    #[serde(rename = "Pd")]
    pd: u64,
    #[serde(rename = "Se")]
    se: u64,
    #[serde(rename = "Sd")]
    sd: u64,
}

impl CountsRecord {
    fn from_counts(c: &OperationCounts) -> Self {
        CountsRecord {
            th: c.get(CostCategory::Hash),
            pm: c.get(CostCategory::PointMul),
            pe: c.get(CostCategory::PubEnc),
            pd: c.get(CostCategory::PubDec),
            se: c.get(CostCategory::SymEnc),
            sd: c.get(CostCategory::SymDec),
        }
    }

    fn to_counts(self, unclassified: &BTreeMap<String, u64>) -> OperationCounts {
        let mut counts = OperationCounts::zero()
            .with(CostCategory::Hash, self.th)
            .with(CostCategory::PointMul, self.pm)
            .with(CostCategory::PubEnc, self.pe)
            .with(CostCategory::PubDec, self.pd)
            .with(CostCategory::SymEnc, self.se)
            .with(CostCategory::SymDec, self.sd);
        for (name, n) in unclassified {
            counts.add_unclassified(name, *n);
        }
        counts
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoleRecord {
    role: String,
    counts: CountsRecord,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    unclassified_calls: BTreeMap<String, u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResultRecord {
    protocol_name: String,
    counts: CountsRecord,
    unclassified_calls: BTreeMap<String, u64>,
    per_role: Vec<RoleRecord>,
    computation_ms: f64,
    communication: u64,
    model_name: String,
    model_digest: String,
    created_at: String,
    source_path: String,
    source_digest: String,
    warnings: Vec<String>,
}

impl From<&StoredResult> for ResultRecord {
    fn from(s: &StoredResult) -> Self {
        let r = &s.result;
        ResultRecord {
            protocol_name: r.protocol_name.clone(),
            counts: CountsRecord::from_counts(&r.counts),
            unclassified_calls: r.counts.unclassified_calls().clone(),
            per_role: r
                .per_role
                .iter()
                .map(|role| RoleRecord {
                    role: role.role.clone(),
                    counts: CountsRecord::from_counts(&role.counts),
                    unclassified_calls: role.counts.unclassified_calls().clone(),
                })
                .collect(),
            computation_ms: r.computation_ms,
            communication: r.communication,
            model_name: r.model_name.clone(),
            model_digest: r.model_digest.clone(),
            created_at: s.created_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            source_path: s.source_path.clone(),
            source_digest: s.source_digest.clone(),
            warnings: r.warnings.clone(),
        }
    }
}

impl TryFrom<ResultRecord> for StoredResult {
    type Error = String;

    fn try_from(rec: ResultRecord) -> Result<Self, String> {
        let created_at = DateTime::parse_from_rfc3339(&rec.created_at)
            .map_err(|e| format!("created_at: {e}"))?
            .with_timezone(&Utc);
        if !(rec.computation_ms.is_finite() && rec.computation_ms >= 0.0) {
            return Err(format!(
                "computation_ms must be a nonnegative number, found {}",
                rec.computation_ms
            ));
        }
        let per_role = rec
            .per_role
            .into_iter()
            .map(|role| RoleAttribution {
                role: role.role,
                counts: role.counts.to_counts(&role.unclassified_calls),
            })
            .collect();
        Ok(StoredResult {
            result: AnalysisResult {
                protocol_name: rec.protocol_name,
                counts: rec.counts.to_counts(&rec.unclassified_calls),
                per_role,
                computation_ms: rec.computation_ms,
                communication: rec.communication,
                model_name: rec.model_name,
                model_digest: rec.model_digest,
                warnings: rec.warnings,
            },
            created_at,
            source_path: rec.source_path,
            source_digest: rec.source_digest,
        })
    }
}
