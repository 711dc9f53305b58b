//! Run orchestration: ingest, probe, score, aggregate; judgments; retuning;
//! per-use-case ranking.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::aggregation::{
    assess, rank_kgs, recommendation, validate_profile, AggregationError, AggregationOptions, DimensionScore,
    KgAssessment, RawWeights, WeightProfile,
};
use crate::catalog::{self, MetricKind};
use crate::metrics::{GoldStandard, Judgment, JudgmentError, JudgmentLog, ScoringInputs, SchemaSpec};
use crate::probe::{probe_all, ProbeReport};
use crate::rational::Rational;
use crate::rdf::{parse_file, snapshot_from_endpoint, GraphSnapshot, IngestOptions, ParseError, StatsConfig};
use crate::registry::{
    new_run_id, sha256_hex, AssessmentRun, KgRecord, RunFilter, RunStatus, Store, StoreError, UseCase,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Judgment(#[from] JudgmentError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error("run {0:?} has no scores yet")]
    NotExecuted(String),
    #[error("ingest failed: {0}")]
    Ingest(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Issue network probes when the KG has an endpoint configuration.
    pub probe: bool,
    /// Scoring clock; defaults to the wall clock.
    pub now: Option<DateTime<Utc>>,
    pub strict: bool,
    /// Replaces the per-KG probe timeout.
    pub timeout_ms: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            probe: true,
            now: None,
            strict: false,
            timeout_ms: None,
        }
    }
}

impl RunOptions {
    fn aggregation(&self) -> AggregationOptions {
        AggregationOptions { strict: self.strict }
    }
}

/// Snapshot a KG: its data file when set, else its SPARQL endpoint.
pub fn ingest_kg(store: &Store, kg: &KgRecord) -> Result<(GraphSnapshot, Vec<ParseError>), PipelineError> {
    if let Some(file) = &kg.data_file {
        let opts = IngestOptions::new(&kg.kg_id).lenient();
        let parsed = parse_file(&store.resolve(file), &opts).map_err(|e| PipelineError::Ingest(e.to_string()))?;
        return Ok((parsed.snapshot, parsed.errors));
    }
    match &kg.endpoint {
        Some(e) if e.sparql_endpoint.is_some() => {
            snapshot_from_endpoint(e, kg.sample.unwrap_or_default(), &StatsConfig::default())
                .map(|s| (s, Vec::new()))
                .map_err(|e| PipelineError::Ingest(e.to_string()))
        }
        _ => Err(PipelineError::Ingest(format!("kg {:?} has no data file or SPARQL endpoint", kg.kg_id))),
    }
}

/// Positively weighted QL metrics without an effective judgment.
pub fn missing_judgments(profile: &WeightProfile, judgments: &JudgmentLog) -> Vec<String> {
    profile
        .weighted_metrics()
        .into_iter()
        .filter(|m| catalog::resolve_metric(m).is_ok_and(|s| s.kind == MetricKind::Qualitative))
        .filter(|m| judgments.effective(m).is_none())
        .collect()
}

const AGGREGATION_NOTE: &str = "aggregation: ";

/// Recompute dimension scores, total, and status from the cached metric
/// scores under `profile`.
pub fn refresh_aggregation(run: &mut AssessmentRun, profile: &WeightProfile, options: AggregationOptions) {
    let missing = missing_judgments(profile, &run.judgment_history);
    run.notes.retain(|n| !n.starts_with(AGGREGATION_NOTE));
    match assess(&run.kg_id, &run.metric_scores, profile, options) {
        Ok(a) => {
            run.dimension_scores = a.dimension_scores;
            run.total = Some(a.total);
            run.status = if missing.is_empty() {
                RunStatus::Complete
            } else {
                RunStatus::PendingJudgments
            };
        }
        Err(e) => {
            run.dimension_scores.clear();
            run.total = None;
            run.notes.push(format!("{AGGREGATION_NOTE}{e}"));
            run.status = if missing.is_empty() {
                RunStatus::PendingEvidence
            } else {
                RunStatus::PendingJudgments
            };
        }
    }
}

struct Context {
    kg: KgRecord,
    profile: WeightProfile,
    gold: Option<GoldStandard>,
    schema: Option<SchemaSpec>,
}

fn context(store: &Store, run: &AssessmentRun) -> Result<Context, StoreError> {
    let uc: UseCase = store.get(&run.use_case_id)?;
    Ok(Context {
        kg: store.get(&run.kg_id)?,
        profile: store.get(&run.profile_id)?,
        gold: uc.gold_standard_ref.as_deref().map(|g| store.get(g)).transpose()?,
        schema: uc.schema_ref.as_deref().map(|s| store.get(s)).transpose()?,
    })
}

/// Gather evidence and score a pending run. Evidence failures are noted on
/// the run and leave the dependent metrics not applicable.
pub fn execute_run(store: &Store, run_id: &str, opts: RunOptions) -> Result<AssessmentRun, PipelineError> {
    let run = store.load_run(run_id)?;
    if run.status != RunStatus::PendingEvidence {
        return Ok(run);
    }
    let mut ctx = context(store, &run)?;
    if let (Some(e), Some(t)) = (ctx.kg.endpoint.as_mut(), opts.timeout_ms) {
        e.timeout_ms = t.max(1);
    }
    let mut notes = Vec::new();
    let snapshot = match ingest_kg(store, &ctx.kg) {
        Ok((s, errors)) => {
            if !errors.is_empty() {
                notes.push(format!("ingest: skipped {} malformed statement(s)", errors.len()));
            }
            Some(s)
        }
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let snapshot_ref = snapshot.as_ref().map(|s| store.put_snapshot(s)).transpose()?;
    let probe: Option<ProbeReport> = match &ctx.kg.endpoint {
        Some(e) if opts.probe => Some(probe_all(e)),
        _ => None,
    };
    let config = ctx.kg.effective_metric_config();
    let now = opts.now.unwrap_or_else(Utc::now);

    store.update_run(run_id, |mut run| {
        let scores = ScoringInputs {
            snapshot: snapshot.as_ref(),
            probe: probe.as_ref(),
            endpoint: ctx.kg.endpoint.as_ref(),
            gold: ctx.gold.as_ref(),
            schema: ctx.schema.as_ref(),
            ..ScoringInputs::new(&run.judgment_history, &config, now)
        }
        .score_all();
        run.metric_scores = scores;
        run.snapshot_ref = snapshot_ref;
        run.probe_report = probe;
        run.notes = notes;
        refresh_aggregation(&mut run, &ctx.profile, opts.aggregation());
        Ok::<_, PipelineError>(run)
    })
}

/// Create and execute in one step.
pub fn assess_kg(
    store: &Store,
    kg_id: &str,
    use_case_id: &str,
    profile_id: &str,
    opts: RunOptions,
) -> Result<AssessmentRun, PipelineError> {
    let run = store.create_run(kg_id, use_case_id, profile_id)?;
    execute_run(store, &run.run_id, opts)
}

fn derive(parent: &AssessmentRun, run_id: String) -> AssessmentRun {
    AssessmentRun {
        run_id,
        parent_run_id: Some(parent.run_id.clone()),
        created_at: Utc::now(),
        ..parent.clone()
    }
}

/// Record a QL judgment. A complete run is never changed: the judgment
/// lands on a new run derived from it.
pub fn record_judgment(
    store: &Store,
    run_id: &str,
    judgment: Judgment,
    options: AggregationOptions,
) -> Result<AssessmentRun, PipelineError> {
    judgment.validate()?;
    store.update_run(run_id, |run| {
        if run.status == RunStatus::PendingEvidence && run.metric_scores.is_empty() {
            return Err(PipelineError::NotExecuted(run.run_id));
        }
        let profile: WeightProfile = store.get(&run.profile_id)?;
        let mut target = if run.status == RunStatus::Complete {
            derive(&run, new_run_id())
        } else {
            run
        };
        let score = target.judgment_history.record(judgment)?;
        match target.metric_scores.iter_mut().find(|s| s.metric_id == score.metric_id) {
            Some(slot) => *slot = score,
            None => target.metric_scores.push(score),
        }
        refresh_aggregation(&mut target, &profile, options);
        Ok(target)
    })
}

/// What to retune to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RetuneTarget {
    ProfileId { profile_id: String },
    Profile { profile: WeightProfile },
    Weights { weights: RawWeights },
}

/// Profiles supplied inline are registered under an id derived from their
/// weights so derived runs only reference registered profiles.
fn resolve_target(store: &Store, run: &AssessmentRun, target: RetuneTarget) -> Result<WeightProfile, PipelineError> {
    let mut profile = match target {
        RetuneTarget::ProfileId { profile_id } => return Ok(store.get(&profile_id)?),
        RetuneTarget::Profile { profile } => profile,
        RetuneTarget::Weights { weights } => weights.normalize("", &run.use_case_id)?,
    };
    validate_profile(&profile).map_err(StoreError::InvalidProfile)?;
    profile.profile_id = String::new();
    profile.use_case_id = run.use_case_id.clone();
    let canon = serde_json::to_string(&profile).expect("profile serializes");
    profile.profile_id = format!("inline-{}", &sha256_hex(canon.as_bytes())[..16]);
    match store.register(&profile) {
        Ok(_) | Err(StoreError::Collision { .. }) => Ok(profile),
        Err(e) => Err(e.into()),
    }
}

/// Derived run id: a function of the parent and the profile content.
pub fn retune_run_id(parent_run_id: &str, profile: &WeightProfile) -> String {
    let canon = serde_json::to_string(profile).expect("profile serializes");
    let digest = sha256_hex(format!("{parent_run_id}\n{canon}").as_bytes());
    format!("run-{}", &digest[..16])
}

/// Recompute a run under other weights from its cached scores, without
/// touching the KG. Repeating the same retune returns the same stored run.
pub fn retune_run(
    store: &Store,
    run_id: &str,
    target: RetuneTarget,
    options: AggregationOptions,
) -> Result<AssessmentRun, PipelineError> {
    let parent = store.load_run(run_id)?;
    if parent.metric_scores.is_empty() {
        return Err(PipelineError::NotExecuted(parent.run_id));
    }
    let profile = resolve_target(store, &parent, target)?;
    if profile.catalog_version != parent.catalog_version {
        return Err(AggregationError::CatalogMismatch {
            scores: parent.catalog_version,
            profile: profile.catalog_version,
        }
        .into());
    }
    let id = retune_run_id(&parent.run_id, &profile);
    if store.run_exists(&id) {
        return Ok(store.load_run(&id)?);
    }
    let mut derived = derive(&parent, id);
    derived.profile_id = profile.profile_id.clone();
    refresh_aggregation(&mut derived, &profile, options);
    store.persist_run(&derived)?;
    Ok(derived)
}

/// The engine view of a scored run.
pub fn assessment_of(run: &AssessmentRun) -> Option<KgAssessment> {
    Some(KgAssessment {
        kg_id: run.kg_id.clone(),
        use_case_id: run.use_case_id.clone(),
        profile_id: run.profile_id.clone(),
        catalog_version: run.catalog_version.clone(),
        dimension_scores: run.dimension_scores.clone(),
        total: run.total.clone()?,
        metric_scores: run.metric_scores.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionBreakdown {
    pub dimension_id: String,
    pub name: String,
    pub value: Rational,
    pub effective_beta: Rational,
    pub not_applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub rank: usize,
    pub kg_id: String,
    pub run_id: String,
    pub total: Rational,
    pub tied: bool,
    pub strongest: Option<String>,
    pub weakest: Option<String>,
    pub dimensions: Vec<DimensionBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    pub use_case_id: String,
    pub profile_id: String,
    pub entries: Vec<RankingEntry>,
    pub recommendation: Option<String>,
}

fn breakdown(d: &DimensionScore) -> DimensionBreakdown {
    DimensionBreakdown {
        dimension_id: d.dimension_id.clone(),
        name: catalog::dimension_name(&d.dimension_id).to_string(),
        value: d.value.clone(),
        effective_beta: d.effective_beta.clone(),
        not_applicable: d.not_applicable,
    }
}

/// Rank the newest complete run of each KG under one use case and profile.
/// Read-only.
pub fn rank_use_case(store: &Store, use_case_id: &str, profile_id: &str) -> Result<Ranking, PipelineError> {
    store.get::<UseCase>(use_case_id)?;
    store.get::<WeightProfile>(profile_id)?;
    let filter = RunFilter {
        use_case_id: Some(use_case_id.to_string()),
        profile_id: Some(profile_id.to_string()),
        status: Some(RunStatus::Complete),
        ..Default::default()
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut runs = Vec::new();
    for s in store.list_runs(&filter)? {
        if seen.insert(s.kg_id.clone()) {
            runs.push(store.load_run(&s.run_id)?);
        }
    }
    let assessments: Vec<(KgAssessment, String)> = runs
        .iter()
        .filter_map(|r| assessment_of(r).map(|a| (a, r.run_id.clone())))
        .collect();
    let plain: Vec<KgAssessment> = assessments.iter().map(|(a, _)| a.clone()).collect();
    let ranked = rank_kgs(&plain)?;
    let entries = ranked
        .iter()
        .map(|r| {
            let (a, run_id) = assessments.iter().find(|(a, _)| a.kg_id == r.kg_id).expect("ranked kg");
            let ext = a.extremes();
            RankingEntry {
                rank: r.rank,
                kg_id: r.kg_id.clone(),
                run_id: run_id.clone(),
                total: r.total.clone(),
                tied: r.tied,
                strongest: ext.map(|(b, _)| b.dimension_id.clone()),
                weakest: ext.map(|(_, w)| w.dimension_id.clone()),
                dimensions: a.dimension_scores.iter().map(breakdown).collect(),
            }
        })
        .collect::<Vec<_>>();
    let recommendation = ranked.first().and_then(|top| {
        assessments
            .iter()
            .find(|(a, _)| a.kg_id == top.kg_id)
            .map(|(a, _)| recommendation(a))
    });
    Ok(Ranking {
        use_case_id: use_case_id.to_string(),
        profile_id: profile_id.to_string(),
        entries,
        recommendation,
    })
}
