//! On-disk registries and assessment runs.
//!
//! Layout under the store root:
//!
//! ```text
//! usecases/<id>.json  kgs/<id>.json  profiles/<id>.json
//! goldstandards/<id>.json  schemas/<id>.json  runs/<id>.json
//! snapshots/<sha256>.nt  index.json  .lock
//! ```
//!
//! Every JSON file is an envelope `{"checksum":"sha256:<hex>","document":...}`
//! whose checksum covers the exact document bytes. Writers hold an exclusive
//! advisory lock on `.lock`; readers never lock because writes land through
//! a rename.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::aggregation::{validate_profile, DimensionScore, Violation, WeightProfile};
use crate::catalog::CATALOG_VERSION;
use crate::metrics::{GoldStandard, JudgmentLog, MetricConfig, MetricScore, SchemaSpec};
use crate::probe::{EndpointConfig, ProbeReport};
use crate::rational::Rational;
use crate::rdf::{parse_ntriples, GraphSnapshot, IngestOptions, SampleSpec, SnapshotSource};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("integrity check failed for {path}: {reason}")]
    Integrity { path: PathBuf, reason: String },
    #[error("{kind} {id:?} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("{kind} {id:?} already exists")]
    Collision { kind: &'static str, id: String },
    #[error("invalid {kind}: {reason}")]
    Invalid { kind: &'static str, reason: String },
    #[error("invalid weight profile: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidProfile(Vec<Violation>),
}

impl StoreError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn invalid(kind: &'static str, reason: impl Into<String>) -> Self {
        StoreError::Invalid {
            kind,
            reason: reason.into(),
        }
    }
}

pub type StoreResult<T> = Result<T, StoreError>;

/// Ids double as file names.
pub fn valid_id(id: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    R.get_or_init(|| Regex::new(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,127}$").expect("static pattern"))
        .is_match(id)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCase {
    pub use_case_id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub domain_tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_standard_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_profile_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgRecord {
    pub kg_id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// IRI prefixes owned by the KG.
    #[serde(default)]
    pub namespaces: Vec<String>,
    /// Probe targets. Its `kg_id` must match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<EndpointConfig>,
    /// N-Triples or Turtle dump; relative paths resolve against the store root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_file: Option<String>,
    /// Bounds endpoint sampling when there is no data file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSpec>,
    /// Overrides for the metric predicate lists; `kg_namespaces` is filled
    /// from `namespaces`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_config: Option<MetricConfig>,
}

impl KgRecord {
    pub fn new(kg_id: impl Into<String>, name: impl Into<String>) -> Self {
        KgRecord {
            kg_id: kg_id.into(),
            name: name.into(),
            description: String::new(),
            namespaces: Vec::new(),
            endpoint: None,
            data_file: None,
            sample: None,
            metric_config: None,
        }
    }

    pub fn effective_metric_config(&self) -> MetricConfig {
        let mut c = self.metric_config.clone().unwrap_or_default();
        if c.kg_namespaces.is_empty() {
            c.kg_namespaces = self.namespaces.clone();
        }
        c
    }
}

/// A registrable document kind.
pub trait Entity: Serialize + DeserializeOwned {
    const KIND: &'static str;
    const DIR: &'static str;
    fn id(&self) -> &str;
    fn check(&self) -> StoreResult<()>;
}

impl Entity for UseCase {
    const KIND: &'static str = "use case";
    const DIR: &'static str = "usecases";
    fn id(&self) -> &str {
        &self.use_case_id
    }
    fn check(&self) -> StoreResult<()> {
        if self.title.trim().is_empty() {
            return Err(StoreError::invalid(Self::KIND, "title is empty"));
        }
        Ok(())
    }
}

impl Entity for KgRecord {
    const KIND: &'static str = "kg";
    const DIR: &'static str = "kgs";
    fn id(&self) -> &str {
        &self.kg_id
    }
    fn check(&self) -> StoreResult<()> {
        if let Some(e) = &self.endpoint {
            if e.kg_id != self.kg_id {
                return Err(StoreError::invalid(
                    Self::KIND,
                    format!("endpoint config names kg {:?}, record is {:?}", e.kg_id, self.kg_id),
                ));
            }
            e.validate().map_err(|err| StoreError::invalid(Self::KIND, err.to_string()))?;
        }
        if self.endpoint.is_none() && self.data_file.is_none() {
            return Err(StoreError::invalid(Self::KIND, "neither an endpoint nor a data file is given"));
        }
        if let Some(bad) = self.namespaces.iter().find(|n| !crate::rdf::iri::is_absolute(n)) {
            return Err(StoreError::invalid(Self::KIND, format!("namespace {bad:?} is not an absolute IRI")));
        }
        Ok(())
    }
}

impl Entity for WeightProfile {
    const KIND: &'static str = "profile";
    const DIR: &'static str = "profiles";
    fn id(&self) -> &str {
        &self.profile_id
    }
    fn check(&self) -> StoreResult<()> {
        validate_profile(self).map_err(StoreError::InvalidProfile)
    }
}

impl Entity for GoldStandard {
    const KIND: &'static str = "gold standard";
    const DIR: &'static str = "goldstandards";
    fn id(&self) -> &str {
        &self.gold_standard_id
    }
    fn check(&self) -> StoreResult<()> {
        self.validate().map_err(|e| StoreError::invalid(Self::KIND, e.to_string()))
    }
}

impl Entity for SchemaSpec {
    const KIND: &'static str = "schema";
    const DIR: &'static str = "schemas";
    fn id(&self) -> &str {
        &self.schema_id
    }
    fn check(&self) -> StoreResult<()> {
        self.validate().map_err(|e| StoreError::invalid(Self::KIND, e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    PendingEvidence,
    PendingJudgments,
    Complete,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::PendingEvidence => "pending_evidence",
            RunStatus::PendingJudgments => "pending_judgments",
            RunStatus::Complete => "complete",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [RunStatus::PendingEvidence, RunStatus::PendingJudgments, RunStatus::Complete]
            .into_iter()
            .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentRun {
    pub run_id: String,
    pub kg_id: String,
    pub use_case_id: String,
    pub profile_id: String,
    pub catalog_version: String,
    /// Run this one was derived from by retuning or a later judgment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_run_id: Option<String>,
    /// Store-relative path of the canonical N-Triples snapshot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_report: Option<ProbeReport>,
    #[serde(default)]
    pub metric_scores: Vec<MetricScore>,
    #[serde(default)]
    pub dimension_scores: Vec<DimensionScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<Rational>,
    #[serde(default)]
    pub judgment_history: JudgmentLog,
    /// Evidence problems met while executing, e.g. skipped parse lines.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub created_at: DateTime<Utc>,
    pub status: RunStatus,
}

impl AssessmentRun {
    pub fn new(run_id: String, kg_id: &str, use_case_id: &str, profile_id: &str) -> Self {
        AssessmentRun {
            run_id,
            kg_id: kg_id.to_string(),
            use_case_id: use_case_id.to_string(),
            profile_id: profile_id.to_string(),
            catalog_version: CATALOG_VERSION.to_string(),
            parent_run_id: None,
            snapshot_ref: None,
            probe_report: None,
            metric_scores: Vec::new(),
            dimension_scores: Vec::new(),
            total: None,
            judgment_history: JudgmentLog::new(),
            notes: Vec::new(),
            created_at: Utc::now(),
            status: RunStatus::PendingEvidence,
        }
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            run_id: self.run_id.clone(),
            kg_id: self.kg_id.clone(),
            use_case_id: self.use_case_id.clone(),
            profile_id: self.profile_id.clone(),
            parent_run_id: self.parent_run_id.clone(),
            status: self.status,
            total: self.total.clone(),
            created_at: self.created_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub kg_id: String,
    pub use_case_id: String,
    pub profile_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_run_id: Option<String>,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<Rational>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFilter {
    pub kg_id: Option<String>,
    pub use_case_id: Option<String>,
    pub profile_id: Option<String>,
    pub status: Option<RunStatus>,
}

impl RunFilter {
    pub fn matches(&self, r: &RunSummary) -> bool {
        self.kg_id.as_ref().is_none_or(|k| *k == r.kg_id)
            && self.use_case_id.as_ref().is_none_or(|u| *u == r.use_case_id)
            && self.profile_id.as_ref().is_none_or(|p| *p == r.profile_id)
            && self.status.is_none_or(|s| s == r.status)
    }
}

/// Newest first, `run_id` breaking timestamp ties.
pub fn sort_runs(runs: &mut [RunSummary]) {
    runs.sort_by(|a, b| b.created_at.cmp(&a.created_at).then_with(|| a.run_id.cmp(&b.run_id)));
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreIndex {
    pub usecases: BTreeSet<String>,
    pub kgs: BTreeSet<String>,
    pub profiles: BTreeSet<String>,
    pub goldstandards: BTreeSet<String>,
    pub schemas: BTreeSet<String>,
    pub runs: Vec<RunSummary>,
}

impl StoreIndex {
    fn ids_mut(&mut self, dir: &str) -> &mut BTreeSet<String> {
        match dir {
            "usecases" => &mut self.usecases,
            "kgs" => &mut self.kgs,
            "profiles" => &mut self.profiles,
            "goldstandards" => &mut self.goldstandards,
            "schemas" => &mut self.schemas,
            other => unreachable!("no registry directory {other}"),
        }
    }
}

const DIRS: [&str; 7] = ["usecases", "kgs", "profiles", "goldstandards", "schemas", "runs", "snapshots"];
const INDEX: &str = "index.json";
const LOCK: &str = ".lock";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Wrap a document in a checksum envelope. No whitespace sits outside the
/// document, so every byte of the file is covered by either the checksum or
/// the JSON structure.
pub fn seal<T: Serialize>(doc: &T) -> String {
    let body = serde_json::to_string_pretty(doc).expect("store documents serialize");
    format!("{{\"checksum\":\"sha256:{}\",\"document\":{body}}}", sha256_hex(body.as_bytes()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<'a> {
    checksum: String,
    #[serde(borrow)]
    document: &'a RawValue,
}

/// Verify the envelope and decode the document.
pub fn unseal<T: DeserializeOwned>(text: &str, path: &Path) -> StoreResult<T> {
    let integrity = |reason: String| StoreError::Integrity {
        path: path.to_path_buf(),
        reason,
    };
    let env: Envelope<'_> = serde_json::from_str(text).map_err(|e| integrity(format!("malformed envelope: {e}")))?;
    let body = env.document.get();
    let expected = format!("sha256:{}", sha256_hex(body.as_bytes()));
    if env.checksum != expected {
        return Err(integrity(format!("checksum {} does not match content {expected}", env.checksum)));
    }
    serde_json::from_str(body).map_err(|e| integrity(format!("document does not decode: {e}")))
}

/// Holds the single-writer lock until dropped.
pub struct WriteGuard {
    _file: File,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Open a store, creating its directories if needed.
    pub fn open(root: impl Into<PathBuf>) -> StoreResult<Self> {
        let root = root.into();
        for d in DIRS {
            let p = root.join(d);
            fs::create_dir_all(&p).map_err(|e| StoreError::io(&p, e))?;
        }
        let store = Store { root };
        let index = store.root.join(INDEX);
        if !index.exists() {
            let _g = store.lock()?;
            if !index.exists() {
                store.write_file(&index, &seal(&StoreIndex::default()))?;
            }
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn lock(&self) -> StoreResult<WriteGuard> {
        let p = self.root.join(LOCK);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&p)
            .map_err(|e| StoreError::io(&p, e))?;
        file.lock().map_err(|e| StoreError::io(&p, e))?;
        Ok(WriteGuard { _file: file })
    }

    fn write_file(&self, path: &Path, text: &str) -> StoreResult<()> {
        let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
        let mut f = File::create(&tmp).map_err(|e| StoreError::io(&tmp, e))?;
        f.write_all(text.as_bytes()).map_err(|e| StoreError::io(&tmp, e))?;
        f.sync_all().map_err(|e| StoreError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| StoreError::io(path, e))
    }

    fn read_doc<T: DeserializeOwned>(&self, path: &Path) -> StoreResult<T> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => StoreError::Integrity {
                path: path.to_path_buf(),
                reason: "not UTF-8".into(),
            },
            _ => StoreError::io(path, e),
        })?;
        unseal(&text, path)
    }

    fn doc_path(&self, dir: &str, id: &str) -> PathBuf {
        self.root.join(dir).join(format!("{id}.json"))
    }

    pub fn index(&self) -> StoreResult<StoreIndex> {
        self.read_doc(&self.root.join(INDEX))
    }

    fn update_index(&self, f: impl FnOnce(&mut StoreIndex)) -> StoreResult<()> {
        let mut idx = self.index()?;
        f(&mut idx);
        sort_runs(&mut idx.runs);
        self.write_file(&self.root.join(INDEX), &seal(&idx))
    }

    /// Validate and store a new entity. Existing ids are never overwritten.
    pub fn register<E: Entity>(&self, entity: &E) -> StoreResult<String> {
        let id = entity.id().to_string();
        if !valid_id(&id) {
            return Err(StoreError::invalid(E::KIND, format!("id {id:?} must match [A-Za-z0-9][A-Za-z0-9._-]*")));
        }
        entity.check()?;
        let _g = self.lock()?;
        let path = self.doc_path(E::DIR, &id);
        if path.exists() {
            return Err(StoreError::Collision { kind: E::KIND, id });
        }
        self.write_file(&path, &seal(entity))?;
        self.update_index(|idx| {
            idx.ids_mut(E::DIR).insert(id.clone());
        })?;
        Ok(id)
    }

    pub fn get<E: Entity>(&self, id: &str) -> StoreResult<E> {
        let not_found = || StoreError::NotFound {
            kind: E::KIND,
            id: id.to_string(),
        };
        if !valid_id(id) {
            return Err(not_found());
        }
        let path = self.doc_path(E::DIR, id);
        if !path.exists() {
            return Err(not_found());
        }
        self.read_doc(&path)
    }

    pub fn contains<E: Entity>(&self, id: &str) -> bool {
        valid_id(id) && self.doc_path(E::DIR, id).exists()
    }

    pub fn list<E: Entity>(&self) -> StoreResult<Vec<E>> {
        let mut idx = self.index()?;
        let ids = std::mem::take(idx.ids_mut(E::DIR));
        ids.iter().map(|id| self.get(id)).collect()
    }

    /// New pending run over registered ids. Referenced gold standard and
    /// schema of the use case must exist too.
    pub fn create_run(&self, kg_id: &str, use_case_id: &str, profile_id: &str) -> StoreResult<AssessmentRun> {
        self.get::<KgRecord>(kg_id)?;
        let uc = self.get::<UseCase>(use_case_id)?;
        self.get::<WeightProfile>(profile_id)?;
        if let Some(g) = &uc.gold_standard_ref {
            self.get::<GoldStandard>(g)?;
        }
        if let Some(s) = &uc.schema_ref {
            self.get::<SchemaSpec>(s)?;
        }
        let run = AssessmentRun::new(new_run_id(), kg_id, use_case_id, profile_id);
        self.persist_run(&run)?;
        Ok(run)
    }

    /// Write a run document and refresh its index entry. Complete runs are
    /// immutable: overwriting one with different content is refused.
    pub fn persist_run(&self, run: &AssessmentRun) -> StoreResult<()> {
        let _g = self.lock()?;
        self.persist_run_locked(run)
    }

    /// Load, transform, and persist under one lock so concurrent updates of
    /// the same run serialize. The returned run may carry a new id.
    pub fn update_run<E: From<StoreError>>(
        &self,
        run_id: &str,
        f: impl FnOnce(AssessmentRun) -> Result<AssessmentRun, E>,
    ) -> Result<AssessmentRun, E> {
        let _g = self.lock()?;
        let run = f(self.load_run(run_id)?)?;
        self.persist_run_locked(&run)?;
        Ok(run)
    }

    fn persist_run_locked(&self, run: &AssessmentRun) -> StoreResult<()> {
        if !valid_id(&run.run_id) {
            return Err(StoreError::invalid("run", format!("id {:?} is not a valid run id", run.run_id)));
        }
        let path = self.doc_path("runs", &run.run_id);
        if path.exists() {
            let old: AssessmentRun = self.read_doc(&path)?;
            if old.status == RunStatus::Complete && old != *run {
                return Err(StoreError::invalid(
                    "run",
                    format!("run {:?} is complete and cannot change; derive a new run", run.run_id),
                ));
            }
        }
        self.write_file(&path, &seal(run))?;
        let summary = run.summary();
        self.update_index(|idx| {
            idx.runs.retain(|r| r.run_id != summary.run_id);
            idx.runs.push(summary);
        })
    }

    pub fn load_run(&self, run_id: &str) -> StoreResult<AssessmentRun> {
        let not_found = || StoreError::NotFound {
            kind: "run",
            id: run_id.to_string(),
        };
        if !valid_id(run_id) {
            return Err(not_found());
        }
        let path = self.doc_path("runs", run_id);
        if !path.exists() {
            return Err(not_found());
        }
        let run: AssessmentRun = self.read_doc(&path)?;
        if run.catalog_version != CATALOG_VERSION {
            log::warn!(
                "run {} was scored against catalog {:?}, current catalog is {:?}",
                run.run_id,
                run.catalog_version,
                CATALOG_VERSION
            );
        }
        Ok(run)
    }

    pub fn run_exists(&self, run_id: &str) -> bool {
        valid_id(run_id) && self.doc_path("runs", run_id).exists()
    }

    pub fn list_runs(&self, filter: &RunFilter) -> StoreResult<Vec<RunSummary>> {
        let mut runs: Vec<RunSummary> = self.index()?.runs.into_iter().filter(|r| filter.matches(r)).collect();
        sort_runs(&mut runs);
        Ok(runs)
    }

    /// Store the canonical N-Triples form; returns its store-relative path.
    pub fn put_snapshot(&self, snapshot: &GraphSnapshot) -> StoreResult<String> {
        let text = snapshot.to_canonical_ntriples();
        let rel = format!("snapshots/{}.nt", sha256_hex(text.as_bytes()));
        let path = self.root.join(&rel);
        if !path.exists() {
            let _g = self.lock()?;
            self.write_file(&path, &text)?;
        }
        Ok(rel)
    }

    pub fn load_snapshot(&self, kg_id: &str, snapshot_ref: &str) -> StoreResult<GraphSnapshot> {
        let path = self.root.join(snapshot_ref);
        let name = Path::new(snapshot_ref)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
        if sha256_hex(&bytes) != name {
            return Err(StoreError::Integrity {
                path,
                reason: "snapshot content does not match its name".into(),
            });
        }
        let opts = IngestOptions::new(kg_id).with_source(SnapshotSource::File {
            path: snapshot_ref.to_string(),
        });
        parse_ntriples(bytes.as_slice(), &opts)
            .map(|p| p.snapshot)
            .map_err(|e| StoreError::Integrity {
                path,
                reason: e.to_string(),
            })
    }

    /// Resolve a KG data file path against the store root.
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }
}

pub fn new_run_id() -> String {
    format!("run-{}", uuid::Uuid::new_v4().simple())
}
