//! Acceptance gate for the assessment engine.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero when any
//! criterion fails. Limits and case counts are pinned below. Runs without the
//! service crate; every check drives the core API directly.

mod oracles;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{DateTime, TimeZone, Utc};
use kgqa_core::aggregation::{
    self, profile_violations, AggregationError, AggregationOptions, Violation, WeightProfile, Weights,
};
use kgqa_core::catalog::{self, MetricKind, CATALOG_VERSION};
use kgqa_core::metrics::{GoldStandard, Judgment, JudgmentLog, MetricConfig, MetricScore, ScoringInputs, SchemaSpec};
use kgqa_core::pipeline::{self, RetuneTarget, RunOptions};
use kgqa_core::probe::mock::{refused_url, MockScript, MockServer};
use kgqa_core::probe::{assemble_report, EndpointConfig, Prober};
use kgqa_core::rdf::{parse_document, IngestError, IngestOptions, RdfFormat};
use kgqa_core::registry::{new_run_id, KgRecord, RunStatus, Store, StoreError, UseCase};
use kgqa_core::Rational;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Deserialize;

const SEED: u64 = 0x6b67_7161;

const CATALOG_LIMIT: Duration = Duration::from_secs(1);
const PROFILE_CASES: usize = 1_000;
const PROFILE_LIMIT: Duration = Duration::from_secs(5);
const ORACLE_CASES: usize = 1_000;
const ORACLE_LIMIT: Duration = Duration::from_secs(10);
const RETUNE_PROFILES: usize = 100;
const RETUNE_CALL_LIMIT: Duration = Duration::from_millis(100);
const PROPERTY_CASES: usize = 10_000;
const METRIC_GRAPHS: usize = 300;
const METRIC_MAX_TRIPLES: usize = 200;
const INJECTION_TRIALS: usize = 40;
const METRIC_LIMIT: Duration = Duration::from_secs(30);
const CORPUS_MIN_DOCS: usize = 40;
const CORPUS_LIMIT: Duration = Duration::from_secs(10);
/// Added to `timeout * (retries + 1)` for every probe.
const PROBE_SLACK: Duration = Duration::from_millis(250);
const E2E_LIMIT: Duration = Duration::from_secs(5);
const PERSIST_RUNS: usize = 50;
const PERSIST_LIMIT: Duration = Duration::from_secs(5);

type Check = fn() -> Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn big(x: &Rational) -> BigRational {
    x.as_big().clone()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn now_fixed() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 6, 30, 0, 0, 0).unwrap()
}

// ---------------------------------------------------------------------------
// Random profiles and scores

/// Random integer importances over a random subset of dimensions, normalized
/// with plain big-rational division.
fn random_profile(rng: &mut StdRng, force: Option<&str>) -> WeightProfile {
    let dims = catalog::catalog();
    let mut chosen: Vec<usize> = (0..dims.len()).filter(|_| rng.random_bool(0.5)).collect();
    if let Some(f) = force {
        let i = dims.iter().position(|d| d.dimension_id == f).unwrap();
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    if chosen.is_empty() {
        chosen.push(rng.random_range(0..dims.len()));
    }
    let raw_beta: Vec<(usize, i64)> = chosen.iter().map(|&i| (i, rng.random_range(1..=9))).collect();
    let beta_total: i64 = raw_beta.iter().map(|(_, w)| w).sum();
    let mut beta = Weights::new();
    for (i, w) in &raw_beta {
        beta.insert(dims[*i].dimension_id.clone(), r(*w, beta_total));
    }
    let mut alpha = BTreeMap::new();
    for (i, d) in dims.iter().enumerate() {
        if !chosen.contains(&i) && rng.random_bool(0.7) {
            continue;
        }
        let mut raw: Vec<i64> = d.metrics.iter().map(|_| rng.random_range(0..=6)).collect();
        if raw.iter().all(|w| *w == 0) {
            let k = rng.random_range(0..raw.len());
            raw[k] = 1;
        }
        let total: i64 = raw.iter().sum();
        let w: Weights = d
            .metrics
            .iter()
            .zip(&raw)
            .filter(|(_, w)| **w > 0 || rng.random_bool(0.5))
            .map(|(m, w)| (m.metric_id.clone(), r(*w, total)))
            .collect();
        alpha.insert(d.dimension_id.clone(), w);
    }
    WeightProfile {
        profile_id: "random".into(),
        use_case_id: "uc".into(),
        beta,
        alpha,
        catalog_version: CATALOG_VERSION.into(),
    }
}

fn random_unit(rng: &mut StdRng) -> Rational {
    let den = rng.random_range(1..=12);
    r(rng.random_range(0..=den), den)
}

fn random_scores(rng: &mut StdRng, na_rate: f64) -> Vec<MetricScore> {
    catalog::all_metrics()
        .map(|m| {
            if rng.random_bool(na_rate) {
                MetricScore::not_applicable(&m.metric_id, "generated", now_fixed())
            } else {
                MetricScore::exact(&m.metric_id, random_unit(rng), "generated".into(), now_fixed())
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 1. Catalog fidelity

#[derive(Deserialize)]
struct TableRow {
    dimension: String,
    metrics: Vec<(String, String)>,
}

#[derive(Deserialize)]
struct Table {
    rows: Vec<TableRow>,
}

fn catalog_fidelity() -> Result<String, String> {
    let text = std::fs::read_to_string(fixtures().join("table2.json")).map_err(|e| e.to_string())?;
    let table: Table = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let doc = catalog::catalog_document();
    ensure(doc.catalog_version == CATALOG_VERSION, || "catalog version".into())?;
    ensure(doc.dimensions.len() == 20, || format!("{} dimensions", doc.dimensions.len()))?;
    ensure(table.rows.len() == doc.dimensions.len(), || "row count differs".into())?;
    let mut metrics = 0;
    let mut ql = 0;
    for (row, dim) in table.rows.iter().zip(&doc.dimensions) {
        ensure(row.dimension == dim.name, || format!("{:?} vs {:?}", row.dimension, dim.name))?;
        ensure(row.metrics.len() == dim.metrics.len(), || format!("{}: metric count", dim.name))?;
        for ((slug, kind), m) in row.metrics.iter().zip(&dim.metrics) {
            let id = format!("{}.{slug}", dim.dimension_id);
            ensure(m.metric_id == id, || format!("{} vs {id}", m.metric_id))?;
            ensure(m.dimension_id == dim.dimension_id, || format!("{id}: dimension"))?;
            ensure(m.kind.code() == kind, || format!("{id}: {} vs {kind}", m.kind.code()))?;
            ensure(catalog::resolve_metric(&id).is_ok(), || format!("{id} unresolvable"))?;
            metrics += 1;
            if m.kind == MetricKind::Qualitative {
                ql += 1;
            }
        }
    }
    ensure(metrics == 40, || format!("{metrics} metrics"))?;
    ensure(catalog::all_metrics().count() == 40, || "all_metrics count".into())?;
    Ok(format!("20 dimensions, {metrics} metrics ({ql} QL) match the transcription"))
}

// ---------------------------------------------------------------------------
// 2. Weight-constraint enforcement

fn exact_sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigRational {
    values.into_iter().fold(BigRational::from_integer(BigInt::from(0)), |acc, v| acc + big(v))
}

/// Mutates one weight so the profile breaks a sum constraint.
fn break_profile(rng: &mut StdRng, p: &mut WeightProfile) {
    let weighted: Vec<String> = p.beta.iter().filter(|(_, v)| v.is_positive()).map(|(k, _)| k.clone()).collect();
    match rng.random_range(0..4) {
        0 => {
            let d = &weighted[rng.random_range(0..weighted.len())];
            let old = p.beta[d].clone();
            let mut new = random_unit(rng);
            while new == old {
                new = random_unit(rng);
            }
            p.beta.insert(d.clone(), new);
        }
        1 => {
            let d = &weighted[rng.random_range(0..weighted.len())];
            let spec = catalog::resolve_dimension(d).unwrap();
            let m = &spec.metrics[rng.random_range(0..spec.metrics.len())].metric_id;
            let entry = p.alpha.entry(d.clone()).or_default();
            let old = entry.get(m).cloned().unwrap_or_else(Rational::zero);
            let mut new = random_unit(rng);
            while new == old {
                new = random_unit(rng);
            }
            entry.insert(m.clone(), new);
        }
        2 => {
            let d = &weighted[rng.random_range(0..weighted.len())];
            let entry = p.alpha.get_mut(d).unwrap();
            let k = entry.iter().find(|(_, v)| v.is_positive()).map(|(k, _)| k.clone()).unwrap();
            entry.remove(&k);
        }
        _ => {
            let unweighted: Vec<&str> = catalog::catalog()
                .iter()
                .map(|d| d.dimension_id.as_str())
                .filter(|d| !weighted.iter().any(|w| w == d))
                .collect();
            if unweighted.is_empty() {
                let d = weighted[0].clone();
                p.beta.insert(d, Rational::zero());
            } else {
                let d = unweighted[rng.random_range(0..unweighted.len())];
                p.beta.insert(d.to_string(), r(rng.random_range(1..=5), 5));
            }
        }
    }
}

fn weight_constraints() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 2);
    let one = BigRational::from_integer(BigInt::from(1));
    let (mut accepted, mut rejected) = (0, 0);
    for case in 0..PROFILE_CASES {
        let mut p = random_profile(&mut rng, None);
        if rng.random_bool(0.5) {
            break_profile(&mut rng, &mut p);
        }
        let beta_bad = exact_sum(p.beta.values()) != one;
        let alpha_bad: BTreeSet<String> = p
            .beta
            .iter()
            .filter(|(_, b)| b.is_positive())
            .filter(|(d, _)| p.alpha.get(*d).map(|a| exact_sum(a.values())) != Some(one.clone()))
            .map(|(d, _)| d.clone())
            .collect();
        let violations = profile_violations(&p);
        let named_beta = violations.iter().any(|v| matches!(v, Violation::BetaSum { .. }));
        let named_alpha: BTreeSet<String> = violations
            .iter()
            .filter_map(|v| match v {
                Violation::AlphaSum { dimension_id, .. } => Some(dimension_id.clone()),
                _ => None,
            })
            .collect();
        let others: Vec<_> = violations
            .iter()
            .filter(|v| !matches!(v, Violation::BetaSum { .. } | Violation::AlphaSum { .. }))
            .collect();
        ensure(others.is_empty(), || format!("case {case}: unexpected {others:?}"))?;
        ensure(named_beta == beta_bad, || format!("case {case}: beta violation reported={named_beta}, expected={beta_bad}"))?;
        ensure(named_alpha == alpha_bad, || format!("case {case}: alpha offenders {named_alpha:?} vs {alpha_bad:?}"))?;
        for v in &violations {
            let text = v.to_string();
            let names_offender = match v {
                Violation::BetaSum { .. } => text.contains("beta"),
                Violation::AlphaSum { dimension_id, .. } => text.contains(catalog::dimension_name(dimension_id)),
                _ => false,
            };
            ensure(names_offender, || format!("case {case}: message {text:?} does not name the offender"))?;
        }
        let valid = !beta_bad && alpha_bad.is_empty();
        let validated = aggregation::validate_profile(&p).is_ok();
        ensure(validated == valid, || format!("case {case}: validate_profile={validated}, oracle={valid}"))?;
        if valid {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    Ok(format!("{accepted} valid accepted, {rejected} violating rejected with named offenders"))
}

// ---------------------------------------------------------------------------
// 3. Aggregation oracle

struct OracleResult {
    dims: BTreeMap<String, Option<BigRational>>,
    total: Option<BigRational>,
}

/// Double loop over dimensions and metrics; NA metrics and NA dimensions drop
/// out and the remaining weights are renormalized.
fn aggregation_oracle(scores: &[MetricScore], p: &WeightProfile) -> OracleResult {
    let zero = BigRational::from_integer(BigInt::from(0));
    let mut dims = BTreeMap::new();
    let (mut t_num, mut t_den) = (zero.clone(), zero.clone());
    for d in catalog::catalog() {
        let b = big(&p.beta_of(&d.dimension_id));
        if b <= zero {
            continue;
        }
        let (mut num, mut den) = (zero.clone(), zero.clone());
        for m in &d.metrics {
            let a = big(&p.alpha_of(&d.dimension_id, &m.metric_id));
            if a <= zero {
                continue;
            }
            let s = scores.iter().find(|s| s.metric_id == m.metric_id).unwrap();
            if s.not_applicable {
                continue;
            }
            num += &a * big(&s.value);
            den += a;
        }
        if den > zero {
            let v = num / den;
            t_num += &b * &v;
            t_den += b;
            dims.insert(d.dimension_id.clone(), Some(v));
        } else {
            dims.insert(d.dimension_id.clone(), None);
        }
    }
    let total = (t_den > zero).then(|| t_num / t_den);
    OracleResult { dims, total }
}

fn aggregation_oracle_check() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 3);
    let mut all_na = 0;
    for case in 0..ORACLE_CASES {
        let p = random_profile(&mut rng, None);
        let na_rate = if case % 10 == 0 { 0.97 } else { 0.2 };
        let scores = random_scores(&mut rng, na_rate);
        let want = aggregation_oracle(&scores, &p);
        match aggregation::assess("kg", &scores, &p, AggregationOptions::default()) {
            Ok(a) => {
                let total = want.total.as_ref().ok_or(format!("case {case}: engine totalled an all-NA instance"))?;
                ensure(&big(&a.total) == total, || format!("case {case}: T {} vs {total}", a.total))?;
                for (id, v) in &want.dims {
                    let d = a.dimension(id).unwrap();
                    match v {
                        Some(v) => ensure(!d.not_applicable && &big(&d.value) == v, || {
                            format!("case {case}: {id} {} vs {v}", d.value)
                        })?,
                        None => ensure(d.not_applicable, || format!("case {case}: {id} should be NA"))?,
                    }
                }
            }
            Err(AggregationError::AllNotApplicable) => {
                ensure(want.total.is_none(), || format!("case {case}: engine reported all-NA"))?;
                all_na += 1;
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok(format!("{ORACLE_CASES} instances exact ({all_na} all-NA agreed)"))
}

// ---------------------------------------------------------------------------
// 4. Retune equivalence, 9. End-to-end fixture

const QL_JUDGMENTS: [(&str, i64, i64); 11] = [
    ("believability.trustworthy", 4, 5),
    ("cost_effectiveness.extra_cost", 1, 2),
    ("ease_of_manipulation.documentation", 3, 4),
    ("interoperability.standard_vocabularies", 9, 10),
    ("objectivity.unbiased", 3, 5),
    ("relevancy.domain_coverage", 7, 10),
    ("reputation.rating", 1, 2),
    ("security.authentication", 2, 5),
    ("traceability.provenance_verifiable", 1, 2),
    ("traceability.authenticity", 1, 4),
    ("variety.domain_sources", 3, 10),
];

/// Hand-counted from the fixture layout in `fixtures/e2e/generate.py`.
/// `None` is not applicable (no endpoint is configured).
const E2E_EXPECTED: [(&str, Option<(i64, i64)>); 40] = [
    ("accessibility.available", None),
    ("accessibility.sparql_endpoint", None),
    ("accessibility.retrievable", None),
    ("accessibility.content_negotiation", None),
    ("accessibility.license", Some((0, 1))),
    // 5 of 155 literals are malformed integers
    ("accuracy.syntactic_validity", Some((30, 31))),
    // 4 of 90 range-governed statements point at an untyped country
    ("accuracy.semantic_validity", Some((43, 45))),
    // 56 typed subjects, 100 required
    ("appropriate_amount.instance_amount", Some((14, 25))),
    ("believability.provenance", Some((25, 56))),
    ("believability.trustworthy", Some((4, 5))),
    ("believability.no_unknown_values", Some((152, 155))),
    ("completeness.data", Some((3, 4))),
    ("completeness.population", Some((5, 6))),
    ("completeness.interlinking", Some((5, 14))),
    // one blank node among 208 distinct terms
    ("concise_representation.blank_node_avoidance", Some((207, 208))),
    ("concise_representation.reification_avoidance", Some((99, 100))),
    ("consistent_representation.disjoint_classes", Some((27, 28))),
    ("consistent_representation.inverse_functional", Some((4, 5))),
    ("consistent_representation.schema_restrictions", Some((43, 45))),
    ("cost_effectiveness.extra_cost", Some((1, 2))),
    ("ease_of_manipulation.documentation", Some((3, 4))),
    ("ease_of_operation.update", None),
    ("ease_of_operation.download", None),
    ("ease_of_operation.integrate", None),
    // 45 of 55 subject IRIs; the Q1xx ones are opaque
    ("ease_of_understanding.self_descriptive_uris", Some((9, 11))),
    ("ease_of_understanding.languages", Some((2, 3))),
    ("free_of_error.correct_values", Some((5, 6))),
    ("interoperability.openly_available", None),
    ("interoperability.standard_vocabularies", Some((9, 10))),
    ("objectivity.unbiased", Some((3, 5))),
    ("objectivity.provenance_declared", Some((25, 56))),
    ("relevancy.domain_coverage", Some((7, 10))),
    ("reputation.rating", Some((1, 2))),
    ("security.digital_signature", Some((0, 1))),
    ("security.authentication", Some((2, 5))),
    // latest modification equals the scoring clock
    ("timeliness.up_to_date", Some((1, 1))),
    ("timeliness.freshness", Some((5, 14))),
    ("traceability.provenance_verifiable", Some((1, 2))),
    ("traceability.authenticity", Some((1, 4))),
    ("variety.domain_sources", Some((3, 10))),
];

/// Mean of the 19 applicable dimension means (ease of operation drops out).
const E2E_TOTAL: (i64, i64) = (7_917_616_793, 12_735_122_400);

struct Fixture {
    _dir: tempfile::TempDir,
    store: Store,
    run_id: String,
}

fn e2e_fixture() -> Result<Fixture, String> {
    let e2e = fixtures().join("e2e");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = Store::open(dir.path().join("store")).map_err(|e| e.to_string())?;
    let read = |name: &str| std::fs::read_to_string(e2e.join(name)).map_err(|e| e.to_string());
    let gold: GoldStandard = serde_json::from_str(&read("gold.json")?).map_err(|e| e.to_string())?;
    let schema: SchemaSpec = serde_json::from_str(&read("schema.json")?).map_err(|e| e.to_string())?;
    let mut kg = KgRecord::new("cities", "Cities");
    kg.namespaces = vec!["http://kg.example/".into()];
    kg.data_file = Some(e2e.join("cities.nt").to_string_lossy().into_owned());
    let uc: UseCase = serde_json::from_value(serde_json::json!({
        "use_case_id": "geo",
        "title": "Geography lookups",
        "gold_standard_ref": gold.gold_standard_id,
        "schema_ref": schema.schema_id,
    }))
    .map_err(|e| e.to_string())?;
    let reg = |r: Result<String, StoreError>| r.map(|_| ()).map_err(|e| e.to_string());
    reg(store.register(&gold))?;
    reg(store.register(&schema))?;
    reg(store.register(&kg))?;
    reg(store.register(&uc))?;
    reg(store.register(&WeightProfile::uniform("uniform", "geo")))?;
    let opts = RunOptions {
        now: Some(now_fixed()),
        ..RunOptions::default()
    };
    let mut run = pipeline::assess_kg(&store, "cities", "geo", "uniform", opts).map_err(|e| e.to_string())?;
    for (metric, n, d) in QL_JUDGMENTS {
        let j = Judgment::new(metric, r(n, d), "panel", "acceptance fixture");
        run = pipeline::record_judgment(&store, &run.run_id, j, AggregationOptions::default()).map_err(|e| e.to_string())?;
    }
    Ok(Fixture {
        _dir: dir,
        store,
        run_id: run.run_id,
    })
}

fn end_to_end() -> Result<String, String> {
    let f = e2e_fixture()?;
    let run = f.store.load_run(&f.run_id).map_err(|e| e.to_string())?;
    ensure(run.status == RunStatus::Complete, || format!("status {:?}, notes {:?}", run.status, run.notes))?;
    let snapshot = run.snapshot_ref.as_deref().ok_or("no snapshot stored")?;
    let triples = f.store.load_snapshot(&run.kg_id, snapshot).map_err(|e| e.to_string())?.len();
    ensure(triples == 300, || format!("{triples} triples"))?;
    ensure(run.metric_scores.len() == 40, || "metric count".into())?;
    for (id, want) in E2E_EXPECTED {
        let s = run.metric_scores.iter().find(|s| s.metric_id == id).ok_or(format!("{id} missing"))?;
        match want {
            None => ensure(s.not_applicable, || format!("{id} should be NA, got {}", s.value))?,
            Some((n, d)) => ensure(!s.not_applicable && s.value == r(n, d), || {
                format!("{id}: {} ({}) vs {n}/{d}", s.value, s.evidence_summary)
            })?,
        }
    }
    let want = r(E2E_TOTAL.0, E2E_TOTAL.1);
    let total = run.total.ok_or("no total")?;
    ensure(total == want, || format!("T {total} vs {want}"))?;
    Ok(format!("complete run, 300 triples, T = {want} exactly"))
}

fn retune_equivalence() -> Result<String, String> {
    let f = e2e_fixture()?;
    let run = f.store.load_run(&f.run_id).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(SEED ^ 4);
    let mut slowest = Duration::ZERO;
    for case in 0..RETUNE_PROFILES {
        let mut p = random_profile(&mut rng, Some("accuracy"));
        p.profile_id = format!("r{case}");
        p.use_case_id = "geo".into();
        let cached = aggregation::assess("cities", &run.metric_scores, &p, AggregationOptions::default())
            .map_err(|e| format!("case {case}: {e}"))?;
        let started = Instant::now();
        let retuned = pipeline::retune_run(
            &f.store,
            &f.run_id,
            RetuneTarget::Profile { profile: p.clone() },
            AggregationOptions::default(),
        )
        .map_err(|e| format!("case {case}: {e}"))?;
        let took = started.elapsed();
        slowest = slowest.max(took);
        ensure(took < RETUNE_CALL_LIMIT, || format!("case {case}: retune took {took:?}"))?;
        ensure(retuned.total.as_ref() == Some(&cached.total), || {
            format!("case {case}: {:?} vs {}", retuned.total, cached.total)
        })?;
        ensure(retuned.metric_scores == run.metric_scores, || format!("case {case}: scores changed"))?;
    }
    Ok(format!("{RETUNE_PROFILES} profiles exact, slowest retune {} ms", slowest.as_millis()))
}

// ---------------------------------------------------------------------------
// 5. Monotonicity and convexity

fn monotonicity_convexity() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 5);
    let mut counterexamples = Vec::new();
    let mut checks = [0usize; 3];
    let opts = AggregationOptions::default();
    for case in 0..PROPERTY_CASES {
        let p = random_profile(&mut rng, None);
        let mut scores = random_scores(&mut rng, 0.1);
        let Ok(a) = aggregation::assess("kg", &scores, &p, opts) else {
            continue;
        };
        let weighted: Vec<usize> = scores
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.not_applicable)
            .filter(|(_, s)| {
                let dim = catalog::resolve_metric(&s.metric_id).unwrap().dimension_id.clone();
                p.beta_of(&dim).is_positive() && p.alpha_of(&dim, &s.metric_id).is_positive()
            })
            .map(|(i, _)| i)
            .collect();
        let zero_weight: Vec<usize> = scores
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                let dim = catalog::resolve_metric(&s.metric_id).unwrap().dimension_id.clone();
                !p.beta_of(&dim).is_positive() || !p.alpha_of(&dim, &s.metric_id).is_positive()
            })
            .map(|(i, _)| i)
            .collect();

        // convexity: min contributing score <= T <= max contributing score
        let vals: Vec<&Rational> = weighted.iter().map(|&i| &scores[i].value).collect();
        let (lo, hi) = (vals.iter().min().unwrap(), vals.iter().max().unwrap());
        checks[0] += 1;
        if a.total < **lo || a.total > **hi {
            counterexamples.push(format!("case {case}: T {} outside [{lo}, {hi}]", a.total));
        }

        // the same bound per applicable, positively weighted dimension
        for d in a.dimension_scores.iter().filter(|d| d.effective_beta.is_positive()) {
            let own: Vec<&Rational> = weighted
                .iter()
                .map(|&i| &scores[i])
                .filter(|s| catalog::resolve_metric(&s.metric_id).unwrap().dimension_id == d.dimension_id)
                .map(|s| &s.value)
                .collect();
            match (own.iter().min(), own.iter().max()) {
                (Some(lo), Some(hi)) if d.value >= **lo && d.value <= **hi => {}
                _ => counterexamples.push(format!("case {case}: {} = {} outside {own:?}", d.dimension_id, d.value)),
            }
        }

        // zero-weight irrelevance: rewrite every zero-weight score
        if !zero_weight.is_empty() {
            let mut other = scores.clone();
            for &i in &zero_weight {
                other[i] = if rng.random_bool(0.3) {
                    MetricScore::not_applicable(&other[i].metric_id, "perturbed", now_fixed())
                } else {
                    MetricScore::exact(&other[i].metric_id, random_unit(&mut rng), "perturbed".into(), now_fixed())
                };
            }
            checks[1] += 1;
            match aggregation::assess("kg", &other, &p, opts) {
                Ok(b) if b.total == a.total => {}
                Ok(b) => counterexamples.push(format!("case {case}: zero weights moved T {} -> {}", a.total, b.total)),
                Err(e) => counterexamples.push(format!("case {case}: zero weights broke assess: {e}")),
            }
        }

        // weak monotonicity in one positively weighted metric
        let i = weighted[rng.random_range(0..weighted.len())];
        let old = scores[i].value.clone();
        let raised = random_unit(&mut rng).max(old.clone());
        scores[i] = MetricScore::exact(&scores[i].metric_id, raised.clone(), "raised".into(), now_fixed());
        checks[2] += 1;
        match aggregation::assess("kg", &scores, &p, opts) {
            Ok(b) if b.total >= a.total => {}
            Ok(b) => counterexamples.push(format!("case {case}: raising {old} -> {raised} lowered T {} -> {}", a.total, b.total)),
            Err(e) => counterexamples.push(format!("case {case}: {e}")),
        }
    }
    ensure(counterexamples.is_empty(), || {
        format!("{} counterexamples, first: {}", counterexamples.len(), counterexamples[0])
    })?;
    ensure(checks.iter().all(|c| *c >= PROPERTY_CASES * 9 / 10), || format!("too few cases checked: {checks:?}"))?;
    Ok(format!(
        "0 counterexamples (convexity {}, zero-weight {}, monotonicity {})",
        checks[0], checks[1], checks[2]
    ))
}

// ---------------------------------------------------------------------------
// 6. Metric oracles

fn metric_oracles() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 6);
    let now = oracles::clock();
    let mut compared = 0;
    for case in 0..METRIC_GRAPHS {
        let n = rng.random_range(0..=METRIC_MAX_TRIPLES);
        let g = oracles::random_graph(&mut rng, n);
        let gold = oracles::random_gold(&mut rng, &g);
        for (id, want, got) in oracles::compare(&g, &gold, now) {
            compared += 1;
            ensure(want == got, || format!("graph {case} ({} triples): {id} oracle {want:?} engine {got:?}", g.len()))?;
        }
    }
    let mut injected = 0;
    for kind in oracles::Injection::ALL {
        let mut done = 0;
        let mut attempts = 0;
        while done < INJECTION_TRIALS {
            attempts += 1;
            ensure(attempts < INJECTION_TRIALS * 50, || format!("{kind:?}: too few injectable graphs"))?;
            let n = rng.random_range(20..=METRIC_MAX_TRIPLES);
            let g = oracles::random_graph(&mut rng, n);
            let gold = oracles::random_gold(&mut rng, &g);
            let Some(trial) = oracles::inject(&mut rng, kind, &g, &gold, now) else {
                continue;
            };
            ensure(trial.den_before == trial.den_after, || {
                format!("{kind:?}: denominator moved {} -> {}", trial.den_before, trial.den_after)
            })?;
            let step = r(trial.k as i64, trial.den_before as i64);
            let moved = big(&trial.before) - big(&trial.after);
            ensure(moved == big(&step), || {
                format!(
                    "{kind:?}: {} violations moved {} by {moved}, expected {step} ({} -> {})",
                    trial.k, trial.metric, trial.before, trial.after
                )
            })?;
            done += 1;
            injected += 1;
        }
    }
    Ok(format!(
        "{compared} metric values over {METRIC_GRAPHS} graphs exact; {injected} injections moved by k/den"
    ))
}

// ---------------------------------------------------------------------------
// 7. Parser corpus

#[derive(Deserialize)]
struct CorpusDoc {
    file: String,
    format: RdfFormat,
    #[serde(default)]
    base: Option<String>,
    #[serde(default)]
    triples: Option<usize>,
    #[serde(default)]
    error_line: Option<usize>,
    #[serde(default)]
    lenient_triples: Option<usize>,
    #[serde(default)]
    lenient_error_lines: Option<Vec<usize>>,
}

#[derive(Deserialize)]
struct Manifest {
    documents: Vec<CorpusDoc>,
}

fn round_trip(file: &str, canonical: &str) -> Result<(), String> {
    let again = parse_document(canonical.as_bytes(), RdfFormat::NTriples, &IngestOptions::new("rt"))
        .map_err(|e| format!("{file}: canonical output does not re-parse: {e}"))?;
    let text = again.snapshot.to_canonical_ntriples();
    ensure(text == canonical, || format!("{file}: canonical round-trip differs"))
}

fn parser_corpus() -> Result<String, String> {
    let dir = fixtures().join("corpus");
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let n = manifest.documents.len();
    ensure(n >= CORPUS_MIN_DOCS, || format!("only {n} documents"))?;
    let (mut valid, mut malformed) = (0, 0);
    for doc in &manifest.documents {
        let bytes = std::fs::read(dir.join(&doc.file)).map_err(|e| format!("{}: {e}", doc.file))?;
        let mut opts = IngestOptions::new("corpus");
        if let Some(b) = &doc.base {
            opts = opts.with_base(b);
        }
        let strict = parse_document(&bytes[..], doc.format, &opts);
        match (doc.triples, doc.error_line, strict) {
            (Some(want), None, Ok(p)) => {
                ensure(p.snapshot.len() == want, || format!("{}: {} triples, expected {want}", doc.file, p.snapshot.len()))?;
                round_trip(&doc.file, &p.snapshot.to_canonical_ntriples())?;
                valid += 1;
            }
            (None, Some(line), Err(IngestError::Syntax(e))) => {
                ensure(e.line == line, || format!("{}: error on line {} ({}), expected {line}", doc.file, e.line, e.reason))?;
                malformed += 1;
            }
            (_, _, Ok(p)) => return Err(format!("{}: parsed {} triples, expected an error", doc.file, p.snapshot.len())),
            (_, _, Err(e)) => return Err(format!("{}: {e}", doc.file)),
        }
        if let (Some(want), Some(lines)) = (doc.lenient_triples, &doc.lenient_error_lines) {
            let p = parse_document(&bytes[..], doc.format, &opts.clone().lenient()).map_err(|e| format!("{}: {e}", doc.file))?;
            let got: Vec<usize> = p.errors.iter().map(|e| e.line).collect();
            ensure(&got == lines, || format!("{}: lenient error lines {got:?}, expected {lines:?}", doc.file))?;
            ensure(p.snapshot.len() == want, || format!("{}: lenient kept {} triples, expected {want}", doc.file, p.snapshot.len()))?;
            round_trip(&doc.file, &p.snapshot.to_canonical_ntriples())?;
        }
    }
    Ok(format!("{n} documents: {valid} valid round-trip byte-identical, {malformed} malformed on expected lines"))
}

// ---------------------------------------------------------------------------
// 8. Probe determinism

#[derive(Deserialize)]
struct ScenarioConfig {
    sparql_endpoint: String,
    dump_url: String,
    sample_entity_iris: Vec<String>,
    timeout_ms: u64,
    retries: u32,
    #[serde(default)]
    license_iri_declared: Option<String>,
}

#[derive(Deserialize)]
struct Scenario {
    config: ScenarioConfig,
    #[serde(default)]
    refused: bool,
    routes: serde_json::Value,
    expected: BTreeMap<String, Option<String>>,
}

/// Runs every probe once, timing each, and returns the scored vector.
fn run_scenario(s: &Scenario) -> Result<(BTreeMap<String, Option<Rational>>, kgqa_core::probe::ProbeReport, Duration), String> {
    let script: MockScript =
        serde_json::from_value(serde_json::json!({ "routes": s.routes })).map_err(|e| e.to_string())?;
    let server = MockServer::start(script).map_err(|e| e.to_string())?;
    let base = if s.refused { refused_url("") } else { server.base_url() };
    let mut c = EndpointConfig::new("probe-kg");
    c.sparql_endpoint = Some(format!("{base}{}", s.config.sparql_endpoint));
    c.dump_url = Some(format!("{base}{}", s.config.dump_url));
    c.sample_entity_iris = s.config.sample_entity_iris.iter().map(|p| format!("{base}{p}")).collect();
    c.timeout_ms = s.config.timeout_ms;
    c.retries = s.config.retries;
    c.license_iri_declared = s.config.license_iri_declared.clone();
    let limit = c.timeout() * (c.retries + 1) + PROBE_SLACK;
    let prober = Prober::new(&c);
    let mut observations = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut timed = |count: usize, obs: &mut dyn FnMut() -> Vec<kgqa_core::probe::Observation>| -> Result<(), String> {
        let started = Instant::now();
        let got = obs();
        let took = started.elapsed();
        let per = took / count.max(1) as u32;
        slowest = slowest.max(per);
        ensure(took <= limit * count.max(1) as u32, || format!("{:?} probe took {took:?}", got.first().map(|o| o.probe)))?;
        for o in &got {
            ensure(Duration::from_millis(o.latency_ms) <= limit, || format!("{:?} observation latency {} ms", o.probe, o.latency_ms))?;
        }
        observations.extend(got);
        Ok(())
    };
    timed(1, &mut || vec![prober.probe_availability()])?;
    timed(1, &mut || vec![prober.probe_sparql()])?;
    timed(c.sample_entity_iris.len(), &mut || prober.probe_dereference())?;
    timed(c.accept_types.len(), &mut || prober.probe_content_negotiation())?;
    timed(1, &mut || vec![prober.probe_dump()])?;
    timed(1, &mut || vec![prober.probe_update()])?;
    let report = assemble_report(&c.kg_id, observations);
    let log = JudgmentLog::new();
    let config = MetricConfig::default();
    let inputs = ScoringInputs {
        probe: Some(&report),
        endpoint: Some(&c),
        ..ScoringInputs::new(&log, &config, now_fixed())
    };
    let scores = inputs.score_all();
    let vector = s
        .expected
        .keys()
        .map(|id| {
            let sc = scores.iter().find(|x| &x.metric_id == id).unwrap();
            (id.clone(), (!sc.not_applicable).then(|| sc.value.clone()))
        })
        .collect();
    Ok((vector, report.without_timing(), slowest))
}

fn probe_determinism() -> Result<String, String> {
    let dir = fixtures().join("probe");
    let names = ["all_up", "endpoint_down", "no_conneg", "dump_404", "flaky_then_up"];
    let mut slowest = Duration::ZERO;
    for name in names {
        let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).map_err(|e| e.to_string())?;
        let s: Scenario = serde_json::from_str(&text).map_err(|e| format!("{name}: {e}"))?;
        let want: BTreeMap<String, Option<Rational>> = s
            .expected
            .iter()
            .map(|(k, v)| (k.clone(), v.as_ref().map(|v| v.parse::<Rational>().unwrap())))
            .collect();
        let (first, report_a, t1) = run_scenario(&s).map_err(|e| format!("{name}: {e}"))?;
        let (second, report_b, t2) = run_scenario(&s).map_err(|e| format!("{name}: {e}"))?;
        slowest = slowest.max(t1).max(t2);
        ensure(first == want, || format!("{name}: got {first:?}"))?;
        ensure(second == first, || format!("{name}: second run differs"))?;
        let strip = |mut r: kgqa_core::probe::ProbeReport| {
            r.raw_observations.iter_mut().for_each(|o| o.target.clear());
            r
        };
        ensure(strip(report_a) == strip(report_b), || format!("{name}: reports differ between runs"))?;
    }
    Ok(format!("5 scenarios match expected vectors twice; slowest probe {} ms", slowest.as_millis()))
}

// ---------------------------------------------------------------------------
// 10. Persistence

fn persistence() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = Store::open(dir.path()).map_err(|e| e.to_string())?;
    let mut kg = KgRecord::new("k", "K");
    kg.data_file = Some("unused.nt".into());
    let uc: UseCase = serde_json::from_value(serde_json::json!({"use_case_id": "uc", "title": "T"})).map_err(|e| e.to_string())?;
    store.register(&kg).map_err(|e| e.to_string())?;
    store.register(&uc).map_err(|e| e.to_string())?;
    store.register(&WeightProfile::uniform("p", "uc")).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(SEED ^ 10);
    let mut runs = Vec::new();
    for i in 0..PERSIST_RUNS {
        let mut run = store.create_run("k", "uc", "p").map_err(|e| e.to_string())?;
        let scores = random_scores(&mut rng, 0.15);
        let p = random_profile(&mut rng, None);
        if let Ok(a) = aggregation::assess("k", &scores, &p, AggregationOptions::default()) {
            run.dimension_scores = a.dimension_scores;
            run.total = Some(a.total);
        }
        run.metric_scores = scores;
        for (metric, n, d) in QL_JUDGMENTS.iter().take(i % 4) {
            run.judgment_history
                .record(Judgment::new(*metric, r(*n, *d), "rater", "generated"))
                .map_err(|e| e.to_string())?;
        }
        run.notes.push(format!("generated run {i}"));
        run.status = if i % 2 == 0 { RunStatus::Complete } else { RunStatus::PendingJudgments };
        store.persist_run(&run).map_err(|e| e.to_string())?;
        runs.push(run);
    }
    for run in &runs {
        let back = store.load_run(&run.run_id).map_err(|e| e.to_string())?;
        ensure(&back == run, || format!("{} changed on round-trip", run.run_id))?;
    }
    let mut detected = 0;
    for run in &runs {
        let path = dir.path().join("runs").join(format!("{}.json", run.run_id));
        let original = std::fs::read(&path).map_err(|e| e.to_string())?;
        let mut corrupt = original.clone();
        let at = rng.random_range(0..corrupt.len());
        corrupt[at] ^= 1 << rng.random_range(0..8);
        std::fs::write(&path, &corrupt).map_err(|e| e.to_string())?;
        match store.load_run(&run.run_id) {
            Err(StoreError::Integrity { .. }) => detected += 1,
            Ok(_) => return Err(format!("{}: flipped byte {at} went unnoticed", run.run_id)),
            Err(e) => return Err(format!("{}: flipped byte {at} reported as {e}", run.run_id)),
        }
        std::fs::write(&path, &original).map_err(|e| e.to_string())?;
    }
    ensure(store.load_run(&new_run_id()).is_err(), || "unknown run loaded".into())?;
    Ok(format!("{PERSIST_RUNS} runs round-trip exactly; {detected}/{PERSIST_RUNS} single-byte corruptions detected"))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, Option<Duration>, Check); 10] = [
        ("catalog fidelity", Some(CATALOG_LIMIT), catalog_fidelity),
        ("weight-constraint enforcement", Some(PROFILE_LIMIT), weight_constraints),
        ("aggregation oracle", Some(ORACLE_LIMIT), aggregation_oracle_check),
        ("retune equivalence", None, retune_equivalence),
        ("monotonicity and convexity", None, monotonicity_convexity),
        ("metric oracle equivalence", Some(METRIC_LIMIT), metric_oracles),
        ("parser corpus", Some(CORPUS_LIMIT), parser_corpus),
        ("probe determinism", None, probe_determinism),
        ("end-to-end fixture", Some(E2E_LIMIT), end_to_end),
        ("persistence round-trip", Some(PERSIST_LIMIT), persistence),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = started.elapsed();
        let over = limit.is_some_and(|l| took > l);
        let budget = limit.map_or(String::new(), |l| format!(" / limit {} ms", l.as_millis()));
        let (status, detail) = match outcome {
            Ok(_) if over => ("FAIL", "runtime limit exceeded".to_string()),
            Ok(d) => ("PASS", d),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status}  {name:<30} {detail}  ({} ms{budget})", took.as_millis());
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
