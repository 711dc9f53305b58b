//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! structured documents as plain dicts and lists.

use std::path::PathBuf;

use chrono::Utc;
use kgqa_core::aggregation::{self, AggregationError, AggregationOptions, KgAssessment, RawWeights, Weights};
use kgqa_core::catalog::{self, CATALOG_VERSION};
use kgqa_core::metrics::{self, GoldStandard, Judgment, JudgmentLog, MetricConfig, ScoringInputs, SchemaSpec};
use kgqa_core::pipeline::{self, PipelineError, RetuneTarget, RunOptions};
use kgqa_core::rdf::{self, GraphSnapshot, IngestOptions, RdfFormat};
use kgqa_core::registry::{KgRecord, RunFilter, RunStatus, Store as CoreStore, StoreError, UseCase};
use kgqa_core::Rational;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(kgqa, KgqaError, PyException);
create_exception!(kgqa, ValidationError, KgqaError);
create_exception!(kgqa, NotFoundError, KgqaError);
create_exception!(kgqa, StorageError, KgqaError);

fn pipeline_err(e: PipelineError) -> PyErr {
    let msg = e.to_string();
    match e {
        PipelineError::Store(StoreError::NotFound { .. }) => NotFoundError::new_err(msg),
        PipelineError::Store(StoreError::Io { .. } | StoreError::Integrity { .. }) | PipelineError::Ingest(_) => {
            StorageError::new_err(msg)
        }
        _ => ValidationError::new_err(msg),
    }
}

fn store_err(e: StoreError) -> PyErr {
    pipeline_err(e.into())
}

fn agg_err(e: AggregationError) -> PyErr {
    ValidationError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    r.as_big().into_pyobject(py)
}

/// Accepts int, Fraction, float, Decimal, or a string such as "3/4" or "0.75".
/// Floats go through their shortest repr, so 0.1 means 1/10.
fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if obj.hasattr("numerator")? && obj.hasattr("denominator")? {
        if let Ok(r) = obj.extract::<BigRational>() {
            return Ok(r.into());
        }
    }
    let s = obj.str()?;
    s.to_str()?
        .parse::<Rational>()
        .map_err(|e| ValidationError::new_err(format!("not a rational: {e}")))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| KgqaError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Dicts and lists go through `json.dumps`; strings are taken as JSON text.
fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(|e| ValidationError::new_err(e.to_string()))
}

fn weights(d: &Bound<'_, PyDict>) -> PyResult<Weights> {
    let mut out = Weights::new();
    for (k, v) in d.iter() {
        out.insert(k.extract::<String>()?, rational(&v)?);
    }
    Ok(out)
}

fn weights_dict<'py>(py: Python<'py>, w: &Weights) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in w {
        d.set_item(k, fraction(py, v)?)?;
    }
    Ok(d)
}

/// Parsed RDF graph with precomputed statistics.
#[pyclass(frozen, module = "kgqa")]
pub struct Snapshot {
    inner: GraphSnapshot,
    errors: Vec<rdf::ParseError>,
}

#[pymethods]
impl Snapshot {
    #[getter]
    fn kg_id(&self) -> &str {
        self.inner.kg_id()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.inner.stats())
    }

    /// Skipped statements in lenient mode as (line, column, reason).
    #[getter]
    fn errors(&self) -> Vec<(usize, usize, String)> {
        self.errors.iter().map(|e| (e.line, e.column, e.reason.clone())).collect()
    }

    fn canonical_ntriples(&self) -> String {
        self.inner.to_canonical_ntriples()
    }

    fn __repr__(&self) -> String {
        format!("Snapshot(kg_id={:?}, triples={})", self.inner.kg_id(), self.inner.len())
    }
}

fn parse(text: &str, kg_id: &str, format: RdfFormat, lenient: bool, base: Option<&str>) -> PyResult<Snapshot> {
    let mut opts = IngestOptions::new(kg_id);
    if lenient {
        opts = opts.lenient();
    }
    if let Some(b) = base {
        opts = opts.with_base(b);
    }
    let parsed = rdf::parse_document(text.as_bytes(), format, &opts).map_err(|e| ValidationError::new_err(e.to_string()))?;
    Ok(Snapshot {
        inner: parsed.snapshot,
        errors: parsed.errors,
    })
}

#[pyfunction]
#[pyo3(signature = (text, kg_id, lenient = false))]
fn parse_ntriples(text: &str, kg_id: &str, lenient: bool) -> PyResult<Snapshot> {
    parse(text, kg_id, RdfFormat::NTriples, lenient, None)
}

#[pyfunction]
#[pyo3(signature = (text, kg_id, base = None, lenient = false))]
fn parse_turtle(text: &str, kg_id: &str, base: Option<&str>, lenient: bool) -> PyResult<Snapshot> {
    parse(text, kg_id, RdfFormat::Turtle, lenient, base)
}

#[pyclass(frozen, from_py_object, module = "kgqa")]
#[derive(Clone)]
pub struct MetricScore {
    inner: metrics::MetricScore,
}

#[pymethods]
impl MetricScore {
    #[getter]
    fn metric_id(&self) -> &str {
        &self.inner.metric_id
    }

    #[getter]
    fn value<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.value)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.code()
    }

    #[getter]
    fn not_applicable(&self) -> bool {
        self.inner.not_applicable
    }

    #[getter]
    fn evidence_summary(&self) -> &str {
        &self.inner.evidence_summary
    }

    #[getter]
    fn numerator(&self) -> Option<u64> {
        self.inner.numerator
    }

    #[getter]
    fn denominator(&self) -> Option<u64> {
        self.inner.denominator
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let v = if self.inner.not_applicable {
            "n/a".to_string()
        } else {
            self.inner.value.to_string()
        };
        format!("MetricScore({}={v})", self.inner.metric_id)
    }
}

/// Score all 40 catalog metrics over a snapshot. `judgments` maps QL metric
/// ids to values; `now` is an ISO 8601 timestamp.
#[pyfunction]
#[pyo3(signature = (snapshot = None, gold = None, schema = None, judgments = None, kg_namespaces = None, now = None))]
fn score(
    snapshot: Option<&Snapshot>,
    gold: Option<&Bound<'_, PyAny>>,
    schema: Option<&Bound<'_, PyAny>>,
    judgments: Option<&Bound<'_, PyDict>>,
    kg_namespaces: Option<Vec<String>>,
    now: Option<&str>,
) -> PyResult<Vec<MetricScore>> {
    let gold: Option<GoldStandard> = gold.map(from_py).transpose()?;
    let schema: Option<SchemaSpec> = schema.map(from_py).transpose()?;
    let mut log = JudgmentLog::new();
    if let Some(j) = judgments {
        for (k, v) in j.iter() {
            log.record(Judgment::new(k.extract::<String>()?, rational(&v)?, "python", ""))
                .map_err(|e| ValidationError::new_err(e.to_string()))?;
        }
    }
    let config = MetricConfig {
        kg_namespaces: kg_namespaces.unwrap_or_default(),
        ..Default::default()
    };
    let now = match now {
        Some(s) => metrics::parse_timestamp(s).ok_or_else(|| ValidationError::new_err(format!("bad timestamp {s:?}")))?,
        None => Utc::now(),
    };
    let inputs = ScoringInputs {
        snapshot: snapshot.map(|s| &s.inner),
        gold: gold.as_ref(),
        schema: schema.as_ref(),
        ..ScoringInputs::new(&log, &config, now)
    };
    Ok(inputs.score_all().into_iter().map(|inner| MetricScore { inner }).collect())
}

/// Normalized α and β weights for one use case.
#[pyclass(from_py_object, module = "kgqa")]
#[derive(Clone)]
pub struct WeightProfile {
    inner: aggregation::WeightProfile,
}

#[pymethods]
impl WeightProfile {
    #[staticmethod]
    fn uniform(profile_id: &str, use_case_id: &str) -> Self {
        WeightProfile {
            inner: aggregation::WeightProfile::uniform(profile_id, use_case_id),
        }
    }

    /// Build from raw non-negative importances, normalized to sum 1.
    #[staticmethod]
    #[pyo3(signature = (beta, alpha = None, profile_id = "draft", use_case_id = ""))]
    fn from_importances(
        beta: &Bound<'_, PyDict>,
        alpha: Option<&Bound<'_, PyDict>>,
        profile_id: &str,
        use_case_id: &str,
    ) -> PyResult<Self> {
        let mut raw = RawWeights {
            beta: weights(beta)?,
            alpha: Default::default(),
        };
        if let Some(a) = alpha {
            for (dim, w) in a.iter() {
                raw.alpha.insert(dim.extract()?, weights(w.cast::<PyDict>()?)?);
            }
        }
        let inner = raw.normalize(profile_id, use_case_id).map_err(agg_err)?;
        Ok(WeightProfile { inner })
    }

    #[staticmethod]
    fn from_json(document: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(WeightProfile { inner: from_py(document)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("profile serializes")
    }

    #[getter]
    fn profile_id(&self) -> &str {
        &self.inner.profile_id
    }

    #[getter]
    fn use_case_id(&self) -> &str {
        &self.inner.use_case_id
    }

    #[getter]
    fn beta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        weights_dict(py, &self.inner.beta)
    }

    #[getter]
    fn alpha<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (dim, w) in &self.inner.alpha {
            d.set_item(dim, weights_dict(py, w)?)?;
        }
        Ok(d)
    }

    fn set_beta(&mut self, dimension_id: String, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.beta.insert(dimension_id, rational(value)?);
        Ok(())
    }

    fn set_alpha(&mut self, dimension_id: String, metric_id: String, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner
            .alpha
            .entry(dimension_id)
            .or_default()
            .insert(metric_id, rational(value)?);
        Ok(())
    }

    /// Human-readable constraint violations; empty when valid.
    fn violations(&self) -> Vec<String> {
        aggregation::profile_violations(&self.inner)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn is_valid(&self) -> bool {
        aggregation::profile_violations(&self.inner).is_empty()
    }
}

#[pyclass(frozen, from_py_object, module = "kgqa")]
#[derive(Clone)]
pub struct Assessment {
    inner: KgAssessment,
}

#[pymethods]
impl Assessment {
    #[getter]
    fn kg_id(&self) -> &str {
        &self.inner.kg_id
    }

    #[getter]
    fn profile_id(&self) -> &str {
        &self.inner.profile_id
    }

    #[getter]
    fn total<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.total)
    }

    /// Dimension id to score; not-applicable dimensions map to None.
    #[getter]
    fn dimensions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for s in &self.inner.dimension_scores {
            if s.not_applicable {
                d.set_item(&s.dimension_id, py.None())?;
            } else {
                d.set_item(&s.dimension_id, fraction(py, &s.value)?)?;
            }
        }
        Ok(d)
    }

    fn recommendation(&self) -> String {
        aggregation::recommendation(&self.inner)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }
}

#[pyfunction]
#[pyo3(signature = (kg_id, scores, profile, strict = false))]
fn assess(kg_id: &str, scores: Vec<MetricScore>, profile: &WeightProfile, strict: bool) -> PyResult<Assessment> {
    let scores: Vec<_> = scores.into_iter().map(|s| s.inner).collect();
    aggregation::assess(kg_id, &scores, &profile.inner, AggregationOptions { strict })
        .map(|inner| Assessment { inner })
        .map_err(agg_err)
}

#[pyfunction]
#[pyo3(signature = (assessment, profile, strict = false))]
fn retune(assessment: &Assessment, profile: &WeightProfile, strict: bool) -> PyResult<Assessment> {
    aggregation::retune(&assessment.inner, &profile.inner, AggregationOptions { strict })
        .map(|inner| Assessment { inner })
        .map_err(agg_err)
}

/// (rank, kg_id, total, tied), best first.
#[pyfunction]
fn rank<'py>(py: Python<'py>, assessments: Vec<Assessment>) -> PyResult<Bound<'py, PyList>> {
    let all: Vec<_> = assessments.into_iter().map(|a| a.inner).collect();
    let ranked = aggregation::rank_kgs(&all).map_err(agg_err)?;
    let rows = ranked
        .iter()
        .map(|r| Ok((r.rank, r.kg_id.clone(), fraction(py, &r.total)?, r.tied)))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, rows)
}

#[pyfunction(name = "catalog")]
fn catalog_py<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &catalog::catalog_document())
}

/// Registry and run store on disk.
#[pyclass(frozen, module = "kgqa")]
pub struct Store {
    inner: CoreStore,
}

fn register_doc(store: &CoreStore, kind: &str, doc: &Bound<'_, PyAny>) -> PyResult<String> {
    let r = match kind {
        "kg" => store.register(&from_py::<KgRecord>(doc)?),
        "usecase" => store.register(&from_py::<UseCase>(doc)?),
        "profile" => store.register(&from_py::<aggregation::WeightProfile>(doc)?),
        "goldstandard" => store.register(&from_py::<GoldStandard>(doc)?),
        "schema" => store.register(&from_py::<SchemaSpec>(doc)?),
        other => return Err(ValidationError::new_err(format!("unknown kind {other:?}"))),
    };
    r.map_err(store_err)
}

#[pymethods]
impl Store {
    #[new]
    fn new(path: PathBuf) -> PyResult<Self> {
        Ok(Store {
            inner: CoreStore::open(path).map_err(store_err)?,
        })
    }

    /// `kind` is one of kg, usecase, profile, goldstandard, schema.
    fn register(&self, kind: &str, document: &Bound<'_, PyAny>) -> PyResult<String> {
        register_doc(&self.inner, kind, document)
    }

    fn get<'py>(&self, py: Python<'py>, kind: &str, id: &str) -> PyResult<Bound<'py, PyAny>> {
        match kind {
            "kg" => to_py(py, &self.inner.get::<KgRecord>(id).map_err(store_err)?),
            "usecase" => to_py(py, &self.inner.get::<UseCase>(id).map_err(store_err)?),
            "profile" => to_py(py, &self.inner.get::<aggregation::WeightProfile>(id).map_err(store_err)?),
            "goldstandard" => to_py(py, &self.inner.get::<GoldStandard>(id).map_err(store_err)?),
            "schema" => to_py(py, &self.inner.get::<SchemaSpec>(id).map_err(store_err)?),
            other => Err(ValidationError::new_err(format!("unknown kind {other:?}"))),
        }
    }

    /// Create and execute a run.
    #[pyo3(signature = (kg_id, use_case_id, profile_id, probe = true))]
    fn assess<'py>(
        &self,
        py: Python<'py>,
        kg_id: &str,
        use_case_id: &str,
        profile_id: &str,
        probe: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = RunOptions {
            probe,
            ..Default::default()
        };
        let run = py
            .detach(|| pipeline::assess_kg(&self.inner, kg_id, use_case_id, profile_id, opts))
            .map_err(pipeline_err)?;
        to_py(py, &run)
    }

    fn load_run<'py>(&self, py: Python<'py>, run_id: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.load_run(run_id).map_err(store_err)?)
    }

    #[pyo3(signature = (kg_id = None, use_case_id = None, status = None))]
    fn list_runs<'py>(
        &self,
        py: Python<'py>,
        kg_id: Option<String>,
        use_case_id: Option<String>,
        status: Option<&str>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let status = status
            .map(|s| RunStatus::parse(s).ok_or_else(|| ValidationError::new_err(format!("unknown status {s:?}"))))
            .transpose()?;
        let filter = RunFilter {
            kg_id,
            use_case_id,
            profile_id: None,
            status,
        };
        to_py(py, &self.inner.list_runs(&filter).map_err(store_err)?)
    }

    #[pyo3(signature = (run_id, metric_id, value, rater = "", rationale = ""))]
    fn record_judgment<'py>(
        &self,
        py: Python<'py>,
        run_id: &str,
        metric_id: &str,
        value: &Bound<'py, PyAny>,
        rater: &str,
        rationale: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let j = Judgment::new(metric_id, rational(value)?, rater, rationale);
        let run = pipeline::record_judgment(&self.inner, run_id, j, AggregationOptions::default()).map_err(pipeline_err)?;
        to_py(py, &run)
    }

    /// Derive a run under a registered profile id or a `WeightProfile`.
    fn retune<'py>(&self, py: Python<'py>, run_id: &str, profile: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let target = match profile.extract::<String>() {
            Ok(profile_id) => RetuneTarget::ProfileId { profile_id },
            Err(_) => RetuneTarget::Profile {
                profile: profile.extract::<WeightProfile>()?.inner,
            },
        };
        let run = pipeline::retune_run(&self.inner, run_id, target, AggregationOptions::default()).map_err(pipeline_err)?;
        to_py(py, &run)
    }

    fn ranking<'py>(&self, py: Python<'py>, use_case_id: &str, profile_id: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(
            py,
            &pipeline::rank_use_case(&self.inner, use_case_id, profile_id).map_err(pipeline_err)?,
        )
    }
}

/// Exact value of a decimal or fraction string, as the engine reads it.
#[pyfunction]
fn parse_rational<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let r: Rational = text.parse().map_err(|e| ValidationError::new_err(format!("{e}")))?;
    fraction(py, &r)
}

#[pymodule]
#[pyo3(name = "kgqa")]
pub fn kgqa_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("CATALOG_VERSION", CATALOG_VERSION)?;
    m.add("KgqaError", py.get_type::<KgqaError>())?;
    m.add("ValidationError", py.get_type::<ValidationError>())?;
    m.add("NotFoundError", py.get_type::<NotFoundError>())?;
    m.add("StorageError", py.get_type::<StorageError>())?;
    m.add_class::<Snapshot>()?;
    m.add_class::<MetricScore>()?;
    m.add_class::<WeightProfile>()?;
    m.add_class::<Assessment>()?;
    m.add_class::<Store>()?;
    m.add_function(wrap_pyfunction!(catalog_py, m)?)?;
    m.add_function(wrap_pyfunction!(parse_ntriples, m)?)?;
    m.add_function(wrap_pyfunction!(parse_turtle, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(assess, m)?)?;
    m.add_function(wrap_pyfunction!(retune, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(parse_rational, m)?)?;
    Ok(())
}
