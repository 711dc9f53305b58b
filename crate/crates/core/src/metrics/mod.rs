//! Metric scoring. Every value lies in `[0, 1]` with 1 as best quality.
//!
//! Two empty-denominator conventions apply. Defect ratios (blank nodes,
//! reification, literal validity, unknown values, consistency) score 1 when
//! nothing is governed. Coverage ratios and anything that needs outside
//! evidence (gold standard, probe report, judgment) become not applicable.

pub mod xsd;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, MetricKind, UnknownMetric};
use crate::probe::{EndpointConfig, ProbeKind, ProbeReport};
use crate::rational::Rational;
use crate::rdf::snapshot::GraphSnapshot;
use crate::rdf::term::{Term, Triple};
use crate::rdf::vocab::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric_id: String,
    pub value: Rational,
    pub kind: MetricKind,
    pub evidence_summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<u64>,
    pub computed_at: DateTime<Utc>,
    pub not_applicable: bool,
}

fn kind_of(metric_id: &str) -> MetricKind {
    catalog::resolve_metric(metric_id)
        .map(|m| m.kind)
        .unwrap_or(MetricKind::Quantitative)
}

impl MetricScore {
    fn base(metric_id: &str, value: Rational, summary: String, now: DateTime<Utc>) -> Self {
        MetricScore {
            metric_id: metric_id.to_string(),
            value,
            kind: kind_of(metric_id),
            evidence_summary: summary,
            numerator: None,
            denominator: None,
            computed_at: now,
            not_applicable: false,
        }
    }

    /// `num / den`; panics when `den == 0` or `num > den`.
    pub fn ratio(metric_id: &str, num: usize, den: usize, summary: String, now: DateTime<Utc>) -> Self {
        assert!(den > 0 && num <= den, "ratio {num}/{den} outside [0,1]");
        MetricScore {
            numerator: Some(num as u64),
            denominator: Some(den as u64),
            ..Self::base(metric_id, Rational::ratio(num, den), summary, now)
        }
    }

    /// `1 - defects/den`, recorded as `(den - defects)/den`. With nothing
    /// governed the score is 1 and the summary says so.
    pub fn defect_ratio(metric_id: &str, defects: usize, den: usize, what: &str, now: DateTime<Utc>) -> Self {
        if den == 0 {
            return Self::base(metric_id, Rational::one(), format!("no {what}; vacuously 1"), now);
        }
        let defects = defects.min(den);
        Self::ratio(metric_id, den - defects, den, format!("{defects} of {den} {what} defective"), now)
    }

    pub fn boolean(metric_id: &str, value: bool, summary: String, now: DateTime<Utc>) -> Self {
        let v = if value { Rational::one() } else { Rational::zero() };
        Self::base(metric_id, v, summary, now)
    }

    pub fn exact(metric_id: &str, value: Rational, summary: String, now: DateTime<Utc>) -> Self {
        debug_assert!(value.is_unit_interval());
        Self::base(metric_id, value, summary, now)
    }

    pub fn not_applicable(metric_id: &str, reason: impl Into<String>, now: DateTime<Utc>) -> Self {
        MetricScore {
            not_applicable: true,
            ..Self::base(metric_id, Rational::zero(), reason.into(), now)
        }
    }

    pub fn from_judgment(j: &Judgment) -> Self {
        Self::base(&j.metric_id, j.value.clone(), j.rationale.clone(), j.recorded_at)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PropertyExpectation {
    pub entity: String,
    pub property: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactExpectation {
    pub entity: String,
    pub property: String,
    pub value: Term,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldStandard {
    #[serde(default)]
    pub gold_standard_id: String,
    #[serde(default)]
    pub entities: BTreeSet<String>,
    #[serde(default)]
    pub property_expectations: Vec<PropertyExpectation>,
    #[serde(default)]
    pub fact_expectations: Vec<FactExpectation>,
    #[serde(default)]
    pub required_languages: BTreeSet<String>,
    #[serde(default = "one")]
    pub required_instance_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvidenceError {
    #[error("required_instance_count must be at least 1")]
    ZeroInstanceCount,
    #[error("disjoint pair repeats class {0:?}")]
    SelfDisjoint(String),
    #[error("{0:?} is not an absolute IRI")]
    RelativeIri(String),
}

fn check_iri(s: &str) -> Result<(), EvidenceError> {
    if crate::rdf::iri::is_absolute(s) {
        Ok(())
    } else {
        Err(EvidenceError::RelativeIri(s.to_string()))
    }
}

impl GoldStandard {
    pub fn validate(&self) -> Result<(), EvidenceError> {
        if self.required_instance_count == 0 {
            return Err(EvidenceError::ZeroInstanceCount);
        }
        for e in &self.entities {
            check_iri(e)?;
        }
        for p in &self.property_expectations {
            check_iri(&p.entity)?;
            check_iri(&p.property)?;
        }
        for f in &self.fact_expectations {
            check_iri(&f.entity)?;
            check_iri(&f.property)?;
        }
        Ok(())
    }

    /// Language tags compared lower-cased.
    pub fn required_languages_lower(&self) -> BTreeSet<String> {
        self.required_languages.iter().map(|l| l.to_ascii_lowercase()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeSpec {
    /// Objects must be literals with this effective datatype.
    Datatype(String),
    /// Objects must be explicitly typed with this class.
    Class(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaSpec {
    #[serde(default)]
    pub schema_id: String,
    #[serde(default)]
    pub disjoint_class_pairs: BTreeSet<[String; 2]>,
    #[serde(default)]
    pub inverse_functional_properties: BTreeSet<String>,
    #[serde(default)]
    pub property_ranges: BTreeMap<String, RangeSpec>,
    #[serde(default)]
    pub functional_properties: BTreeSet<String>,
}

impl SchemaSpec {
    pub fn validate(&self) -> Result<(), EvidenceError> {
        for [a, b] in &self.disjoint_class_pairs {
            check_iri(a)?;
            check_iri(b)?;
            if a == b {
                return Err(EvidenceError::SelfDisjoint(a.clone()));
            }
        }
        for p in self.inverse_functional_properties.iter().chain(&self.functional_properties) {
            check_iri(p)?;
        }
        for (p, r) in &self.property_ranges {
            check_iri(p)?;
            match r {
                RangeSpec::Datatype(i) | RangeSpec::Class(i) => check_iri(i)?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub metric_id: String,
    pub value: Rational,
    pub rater: String,
    #[serde(default)]
    pub rationale: String,
    pub recorded_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JudgmentError {
    #[error(transparent)]
    UnknownMetric(#[from] UnknownMetric),
    #[error("metric {0:?} is quantitative; judgments apply to qualitative metrics only")]
    NotQualitative(String),
    #[error("judgment value {0} is outside [0, 1]")]
    OutOfRange(Rational),
}

impl Judgment {
    pub fn new(metric_id: impl Into<String>, value: Rational, rater: impl Into<String>, rationale: impl Into<String>) -> Self {
        Judgment {
            metric_id: metric_id.into(),
            value,
            rater: rater.into(),
            rationale: rationale.into(),
            recorded_at: Utc::now(),
        }
    }

    pub fn validate(&self) -> Result<(), JudgmentError> {
        let spec = catalog::resolve_metric(&self.metric_id)?;
        if spec.kind != MetricKind::Qualitative {
            return Err(JudgmentError::NotQualitative(self.metric_id.clone()));
        }
        if !self.value.is_unit_interval() {
            return Err(JudgmentError::OutOfRange(self.value.clone()));
        }
        Ok(())
    }
}

/// Full judgment history; the last judgment per metric is effective.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JudgmentLog {
    history: Vec<Judgment>,
}

impl JudgmentLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, j: Judgment) -> Result<MetricScore, JudgmentError> {
        j.validate()?;
        let score = MetricScore::from_judgment(&j);
        self.history.push(j);
        Ok(score)
    }

    pub fn effective(&self, metric_id: &str) -> Option<&Judgment> {
        self.history.iter().rev().find(|j| j.metric_id == metric_id)
    }

    pub fn history(&self) -> &[Judgment] {
        &self.history
    }

    pub fn history_for<'a>(&'a self, metric_id: &'a str) -> impl Iterator<Item = &'a Judgment> + 'a {
        self.history.iter().filter(move |j| j.metric_id == metric_id)
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub const DEFAULT_OPAQUE_ID_PATTERN: &str = "^[A-Za-z]?[0-9]+$";
pub const DEFAULT_DECAY_HORIZON_DAYS: u32 = 365;

/// Configurable predicate lists and thresholds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub provenance_predicates: Vec<String>,
    pub linking_predicates: Vec<String>,
    pub unknown_placeholders: Vec<String>,
    pub modification_predicates: Vec<String>,
    pub license_predicates: Vec<String>,
    pub signature_predicates: Vec<String>,
    pub opaque_id_pattern: String,
    pub decay_horizon_days: u32,
    /// IRI prefixes owned by the assessed KG; links elsewhere are external.
    pub kg_namespaces: Vec<String>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            provenance_predicates: strings(&[PROV_WAS_DERIVED_FROM, DCTERMS_SOURCE, DCTERMS_PROVENANCE]),
            linking_predicates: strings(&[OWL_SAME_AS]),
            unknown_placeholders: strings(&["", "unknown", "n/a"]),
            modification_predicates: strings(&[DCTERMS_MODIFIED, SCHEMA_DATE_MODIFIED, SCHEMA_DATE_MODIFIED_HTTPS]),
            license_predicates: strings(&[DCTERMS_LICENSE, SCHEMA_LICENSE, SCHEMA_LICENSE_HTTPS, CC_LICENSE]),
            signature_predicates: strings(&[SEC_PROOF, SEC_SIGNATURE, WOT_ASSURANCE]),
            opaque_id_pattern: DEFAULT_OPAQUE_ID_PATTERN.to_string(),
            decay_horizon_days: DEFAULT_DECAY_HORIZON_DAYS,
            kg_namespaces: Vec::new(),
        }
    }
}

impl MetricConfig {
    pub fn decay_horizon(&self) -> chrono::Duration {
        chrono::Duration::days(i64::from(self.decay_horizon_days))
    }
}

/// Parse `xsd:dateTime`/`xsd:date`-shaped lexical forms; naive values are UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc));
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f") {
        return Some(dt.and_utc());
    }
    let date = s.strip_suffix('Z').unwrap_or(s);
    NaiveDate::parse_from_str(date, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc())
}

/// Everything scoring may consult. Missing pieces make the dependent
/// metrics not applicable.
#[derive(Debug, Clone)]
pub struct ScoringInputs<'a> {
    pub snapshot: Option<&'a GraphSnapshot>,
    pub probe: Option<&'a ProbeReport>,
    pub endpoint: Option<&'a EndpointConfig>,
    pub gold: Option<&'a GoldStandard>,
    pub schema: Option<&'a SchemaSpec>,
    pub judgments: &'a JudgmentLog,
    pub config: &'a MetricConfig,
    pub now: DateTime<Utc>,
}

const NO_SNAPSHOT: &str = "no graph snapshot";
const NO_PROBE: &str = "no probe report";
const NO_GOLD: &str = "no gold standard";

fn local_name(iri: &str) -> &str {
    iri.rfind(['/', '#']).map_or(iri, |i| &iri[i + 1..])
}

impl<'a> ScoringInputs<'a> {
    pub fn new(judgments: &'a JudgmentLog, config: &'a MetricConfig, now: DateTime<Utc>) -> Self {
        ScoringInputs {
            snapshot: None,
            probe: None,
            endpoint: None,
            gold: None,
            schema: None,
            judgments,
            config,
            now,
        }
    }

    fn triples(&self) -> &'a [Triple] {
        self.snapshot.map(|s| s.triples()).unwrap_or(&[])
    }

    fn na(&self, id: &str, reason: &str) -> MetricScore {
        MetricScore::not_applicable(id, reason, self.now)
    }

    fn ratio(&self, id: &str, num: usize, den: usize, what: &str) -> MetricScore {
        if den == 0 {
            return self.na(id, &format!("no {what}"));
        }
        MetricScore::ratio(id, num, den, format!("{num} of {den} {what}"), self.now)
    }

    fn judged(&self, id: &str) -> MetricScore {
        match self.judgments.effective(id) {
            Some(j) => MetricScore::from_judgment(j),
            None => self.na(id, "no judgment recorded"),
        }
    }

    fn with_probe(&self, id: &str, f: impl FnOnce(&ProbeReport) -> MetricScore) -> MetricScore {
        match self.probe {
            Some(p) => f(p),
            None => self.na(id, NO_PROBE),
        }
    }

    fn probe_ratio(&self, id: &str, report: &ProbeReport, kind: ProbeKind, what: &str) -> MetricScore {
        let probed: Vec<_> = report
            .raw_observations
            .iter()
            .filter(|o| o.probe == kind && o.outcome != crate::probe::Outcome::Skipped)
            .collect();
        let ok = probed.iter().filter(|o| o.succeeded()).count();
        self.ratio(id, ok, probed.len(), what)
    }

    fn license_present(&self) -> Option<bool> {
        let declared = self.endpoint.and_then(|c| c.license_iri_declared.as_ref()).is_some();
        let preds: HashSet<&str> = self.config.license_predicates.iter().map(String::as_str).collect();
        let in_data = self.triples().iter().any(|t| preds.contains(t.predicate_iri()));
        if self.snapshot.is_none() && !declared {
            return None;
        }
        Some(declared || in_data)
    }

    pub fn score_accessibility(&self) -> Vec<MetricScore> {
        let now = self.now;
        let license = match self.license_present() {
            Some(v) => MetricScore::boolean(
                "accessibility.license",
                v,
                if v { "license stated or declared" } else { "no license found" }.into(),
                now,
            ),
            None => self.na("accessibility.license", "no snapshot or endpoint config"),
        };
        vec![
            self.with_probe("accessibility.available", |p| {
                MetricScore::boolean("accessibility.available", p.available, format!("available={}", p.available), now)
            }),
            self.with_probe("accessibility.sparql_endpoint", |p| {
                MetricScore::boolean("accessibility.sparql_endpoint", p.sparql_ok, format!("sparql_ok={}", p.sparql_ok), now)
            }),
            self.with_probe("accessibility.retrievable", |p| {
                self.probe_ratio("accessibility.retrievable", p, ProbeKind::Dereference, "sample IRIs dereferenced")
            }),
            self.with_probe("accessibility.content_negotiation", |p| {
                self.probe_ratio("accessibility.content_negotiation", p, ProbeKind::ContentNegotiation, "media types honored")
            }),
            license,
        ]
    }

    /// Count of literal statements and how many are lexically valid.
    pub fn literal_validity(&self) -> (usize, usize) {
        let mut total = 0;
        let mut valid = 0;
        for t in self.triples() {
            if let Some(lit) = t.object().as_literal() {
                total += 1;
                if xsd::check(lit.effective_datatype(), lit.lexical()).unwrap_or(true) {
                    valid += 1;
                }
            }
        }
        (valid, total)
    }

    /// `(violations, governed)` for functional properties and ranges.
    pub fn schema_violations(&self) -> (usize, usize) {
        let empty = SchemaSpec::default();
        let schema = self.schema.unwrap_or(&empty);
        let types = self.types_by_subject();
        let mut governed = 0;
        let mut range_violations = 0;
        let mut functional_values: HashMap<(&Term, &str), HashSet<&Term>> = HashMap::new();
        for t in self.triples() {
            let p = t.predicate_iri();
            let functional = schema.functional_properties.contains(p);
            let range = schema.property_ranges.get(p);
            if functional || range.is_some() {
                governed += 1;
            }
            if functional {
                functional_values.entry((t.subject(), p)).or_default().insert(t.object());
            }
            if let Some(r) = range {
                if !range_satisfied(r, t.object(), &types) {
                    range_violations += 1;
                }
            }
        }
        let functional_violations = functional_values.values().filter(|v| v.len() > 1).count();
        (functional_violations + range_violations, governed)
    }

    pub fn score_accuracy(&self) -> Vec<MetricScore> {
        if self.snapshot.is_none() {
            return vec![
                self.na("accuracy.syntactic_validity", NO_SNAPSHOT),
                self.na("accuracy.semantic_validity", NO_SNAPSHOT),
            ];
        }
        let (valid, total) = self.literal_validity();
        let (violations, governed) = self.schema_violations();
        vec![
            MetricScore::defect_ratio("accuracy.syntactic_validity", total - valid, total, "literals", self.now),
            MetricScore::defect_ratio("accuracy.semantic_validity", violations, governed, "schema-governed statements", self.now),
        ]
    }

    pub fn score_appropriate_amount(&self) -> MetricScore {
        let id = "appropriate_amount.instance_amount";
        let (Some(snap), Some(gold)) = (self.snapshot, self.gold) else {
            return self.na(id, if self.snapshot.is_none() { NO_SNAPSHOT } else { NO_GOLD });
        };
        if gold.required_instance_count == 0 {
            return self.na(id, "required_instance_count is zero");
        }
        let required = gold.required_instance_count as usize;
        let have = snap.stats().typed_instance_count;
        MetricScore::ratio(
            id,
            have.min(required),
            required,
            format!("{have} typed instances, {required} required"),
            self.now,
        )
    }

    /// `(subjects with provenance, distinct subjects)`.
    pub fn provenance_counts(&self) -> (usize, usize) {
        let preds: HashSet<&str> = self.config.provenance_predicates.iter().map(String::as_str).collect();
        let mut subjects = HashSet::new();
        let mut with = HashSet::new();
        for t in self.triples() {
            subjects.insert(t.subject());
            if preds.contains(t.predicate_iri()) {
                with.insert(t.subject());
            }
        }
        (with.len(), subjects.len())
    }

    fn provenance_score(&self, id: &str) -> MetricScore {
        if self.snapshot.is_none() {
            return self.na(id, NO_SNAPSHOT);
        }
        let (with, total) = self.provenance_counts();
        self.ratio(id, with, total, "subjects with provenance")
    }

    /// `(unknown-valued literals, literal statements)`.
    pub fn unknown_value_counts(&self) -> (usize, usize) {
        let placeholders: HashSet<String> = self
            .config
            .unknown_placeholders
            .iter()
            .map(|p| p.trim().to_lowercase())
            .collect();
        let mut unknown = 0;
        let mut total = 0;
        for t in self.triples() {
            if let Some(lit) = t.object().as_literal() {
                total += 1;
                if placeholders.contains(&lit.lexical().trim().to_lowercase()) {
                    unknown += 1;
                }
            }
        }
        (unknown, total)
    }

    pub fn score_believability(&self) -> Vec<MetricScore> {
        let no_unknown = if self.snapshot.is_none() {
            self.na("believability.no_unknown_values", NO_SNAPSHOT)
        } else {
            let (unknown, total) = self.unknown_value_counts();
            MetricScore::defect_ratio("believability.no_unknown_values", unknown, total, "literals", self.now)
        };
        vec![
            self.provenance_score("believability.provenance"),
            self.judged("believability.trustworthy"),
            no_unknown,
        ]
    }

    fn typed_instances(&self) -> BTreeSet<&'a Term> {
        self.triples()
            .iter()
            .filter(|t| t.predicate_iri() == RDF_TYPE)
            .map(|t| t.subject())
            .collect()
    }

    fn types_by_subject(&self) -> HashMap<&'a Term, HashSet<&'a str>> {
        let mut map: HashMap<&Term, HashSet<&str>> = HashMap::new();
        for t in self.triples() {
            if t.predicate_iri() == RDF_TYPE {
                if let Some(c) = t.object().as_iri() {
                    map.entry(t.subject()).or_default().insert(c);
                }
            }
        }
        map
    }

    fn is_external(&self, iri: &str) -> bool {
        !self.config.kg_namespaces.iter().any(|ns| iri.starts_with(ns.as_str()))
    }

    /// `(typed instances with an external link, typed instances)`.
    pub fn interlinking_counts(&self) -> (usize, usize) {
        let typed = self.typed_instances();
        let preds: HashSet<&str> = self.config.linking_predicates.iter().map(String::as_str).collect();
        let linked: HashSet<&Term> = self
            .triples()
            .iter()
            .filter(|t| preds.contains(t.predicate_iri()))
            .filter(|t| t.object().as_iri().is_some_and(|o| self.is_external(o)))
            .map(|t| t.subject())
            .filter(|s| typed.contains(s))
            .collect();
        (linked.len(), typed.len())
    }

    pub fn score_completeness(&self) -> Vec<MetricScore> {
        let Some(_) = self.snapshot else {
            return ["completeness.data", "completeness.population", "completeness.interlinking"]
                .iter()
                .map(|id| self.na(id, NO_SNAPSHOT))
                .collect();
        };
        let (linked, typed) = self.interlinking_counts();
        let interlinking = self.ratio("completeness.interlinking", linked, typed, "typed instances externally linked");
        let Some(gold) = self.gold else {
            return vec![
                self.na("completeness.data", NO_GOLD),
                self.na("completeness.population", NO_GOLD),
                interlinking,
            ];
        };
        let pairs: HashSet<(&str, &str)> = self
            .triples()
            .iter()
            .filter_map(|t| t.subject().as_iri().map(|s| (s, t.predicate_iri())))
            .collect();
        let satisfied = gold
            .property_expectations
            .iter()
            .filter(|e| pairs.contains(&(e.entity.as_str(), e.property.as_str())))
            .count();
        let mentioned: HashSet<&str> = self
            .triples()
            .iter()
            .flat_map(|t| [t.subject().as_iri(), t.object().as_iri()])
            .flatten()
            .collect();
        let present = gold.entities.iter().filter(|e| mentioned.contains(e.as_str())).count();
        vec![
            self.ratio("completeness.data", satisfied, gold.property_expectations.len(), "expected properties present"),
            self.ratio("completeness.population", present, gold.entities.len(), "gold entities present"),
            interlinking,
        ]
    }

    pub fn score_conciseness(&self) -> Vec<MetricScore> {
        let Some(snap) = self.snapshot else {
            return vec![
                self.na("concise_representation.blank_node_avoidance", NO_SNAPSHOT),
                self.na("concise_representation.reification_avoidance", NO_SNAPSHOT),
            ];
        };
        let s = snap.stats();
        vec![
            MetricScore::defect_ratio(
                "concise_representation.blank_node_avoidance",
                s.blank_node_count,
                s.distinct_terms,
                "terms",
                self.now,
            ),
            MetricScore::defect_ratio(
                "concise_representation.reification_avoidance",
                s.reification_triple_count,
                s.triple_count,
                "statements",
                self.now,
            ),
        ]
    }

    /// `(instances typed with both classes of a disjoint pair, typed instances)`.
    pub fn disjoint_counts(&self) -> (usize, usize) {
        let empty = SchemaSpec::default();
        let schema = self.schema.unwrap_or(&empty);
        let types = self.types_by_subject();
        let typed = self.typed_instances();
        let violating = typed
            .iter()
            .filter(|s| {
                types.get(*s).is_some_and(|cs| {
                    schema
                        .disjoint_class_pairs
                        .iter()
                        .any(|[a, b]| cs.contains(a.as_str()) && cs.contains(b.as_str()))
                })
            })
            .count();
        (violating, typed.len())
    }

    /// `(IFP statements whose value is shared by several subjects, IFP statements)`.
    pub fn ifp_counts(&self) -> (usize, usize) {
        let empty = SchemaSpec::default();
        let schema = self.schema.unwrap_or(&empty);
        let mut subjects_by_value: HashMap<(&str, &Term), HashSet<&Term>> = HashMap::new();
        let mut statements = Vec::new();
        for t in self.triples() {
            if schema.inverse_functional_properties.contains(t.predicate_iri()) {
                subjects_by_value
                    .entry((t.predicate_iri(), t.object()))
                    .or_default()
                    .insert(t.subject());
                statements.push(t);
            }
        }
        let violating = statements
            .iter()
            .filter(|t| subjects_by_value[&(t.predicate_iri(), t.object())].len() > 1)
            .count();
        (violating, statements.len())
    }

    /// `(range-violating statements, range-governed statements)`.
    pub fn range_counts(&self) -> (usize, usize) {
        let empty = SchemaSpec::default();
        let schema = self.schema.unwrap_or(&empty);
        let types = self.types_by_subject();
        let mut governed = 0;
        let mut violating = 0;
        for t in self.triples() {
            if let Some(r) = schema.property_ranges.get(t.predicate_iri()) {
                governed += 1;
                if !range_satisfied(r, t.object(), &types) {
                    violating += 1;
                }
            }
        }
        (violating, governed)
    }

    pub fn score_consistency(&self) -> Vec<MetricScore> {
        let ids = [
            "consistent_representation.disjoint_classes",
            "consistent_representation.inverse_functional",
            "consistent_representation.schema_restrictions",
        ];
        if self.snapshot.is_none() {
            return ids.iter().map(|id| self.na(id, NO_SNAPSHOT)).collect();
        }
        let (d, dn) = self.disjoint_counts();
        let (i, ifp_n) = self.ifp_counts();
        let (r, rn) = self.range_counts();
        vec![
            MetricScore::defect_ratio(ids[0], d, dn, "typed instances", self.now),
            MetricScore::defect_ratio(ids[1], i, ifp_n, "inverse functional statements", self.now),
            MetricScore::defect_ratio(ids[2], r, rn, "range-governed statements", self.now),
        ]
    }

    pub fn score_ease_of_operation(&self) -> Vec<MetricScore> {
        let now = self.now;
        let declared = self
            .endpoint
            .is_some_and(|c| c.supports_update_declared == Some(true) || c.edit_interface_declared == Some(true));
        let update = match self.probe {
            Some(p) => MetricScore::boolean("ease_of_operation.update", p.update_supported || declared, format!("update_supported={}", p.update_supported || declared), now),
            None if declared => MetricScore::boolean("ease_of_operation.update", true, "update declared".into(), now),
            None => self.na("ease_of_operation.update", NO_PROBE),
        };
        vec![
            update,
            self.with_probe("ease_of_operation.download", |p| {
                MetricScore::boolean("ease_of_operation.download", p.dump_reachable, format!("dump_reachable={}", p.dump_reachable), now)
            }),
            self.with_probe("ease_of_operation.integrate", |p| {
                let v = p.rdf_serialization_available();
                MetricScore::boolean("ease_of_operation.integrate", v, format!("rdf_serialization={v}"), now)
            }),
        ]
    }

    /// `(self-descriptive subject IRIs, distinct subject IRIs)`.
    pub fn self_descriptive_counts(&self) -> (usize, usize) {
        let opaque = Regex::new(&self.config.opaque_id_pattern)
            .unwrap_or_else(|_| Regex::new(DEFAULT_OPAQUE_ID_PATTERN).expect("default pattern"));
        let subjects: BTreeSet<&str> = self.triples().iter().filter_map(|t| t.subject().as_iri()).collect();
        let good = subjects
            .iter()
            .filter(|iri| {
                let name = local_name(iri);
                name.chars().any(char::is_alphabetic) && !opaque.is_match(name)
            })
            .count();
        (good, subjects.len())
    }

    pub fn score_understandability(&self) -> Vec<MetricScore> {
        let Some(snap) = self.snapshot else {
            return vec![
                self.na("ease_of_understanding.self_descriptive_uris", NO_SNAPSHOT),
                self.na("ease_of_understanding.languages", NO_SNAPSHOT),
            ];
        };
        let (good, total) = self.self_descriptive_counts();
        let langs = &snap.stats().label_languages;
        let required = self.gold.map(GoldStandard::required_languages_lower).unwrap_or_default();
        let languages = if required.is_empty() {
            let n = langs.len().min(2);
            MetricScore::ratio(
                "ease_of_understanding.languages",
                n,
                2,
                format!("{} label languages, none required", langs.len()),
                self.now,
            )
        } else {
            let hit = required.iter().filter(|l| langs.contains(*l)).count();
            MetricScore::ratio(
                "ease_of_understanding.languages",
                hit,
                required.len(),
                format!("{hit} of {} required languages labelled", required.len()),
                self.now,
            )
        };
        vec![
            self.ratio("ease_of_understanding.self_descriptive_uris", good, total, "subject IRIs self-descriptive"),
            languages,
        ]
    }

    pub fn score_free_of_error(&self) -> MetricScore {
        let id = "free_of_error.correct_values";
        let (Some(_), Some(gold)) = (self.snapshot, self.gold) else {
            return self.na(id, if self.snapshot.is_none() { NO_SNAPSHOT } else { NO_GOLD });
        };
        let present: HashSet<(&str, &str, &Term)> = self
            .triples()
            .iter()
            .filter_map(|t| t.subject().as_iri().map(|s| (s, t.predicate_iri(), t.object())))
            .collect();
        let hits = gold
            .fact_expectations
            .iter()
            .filter(|f| present.contains(&(f.entity.as_str(), f.property.as_str(), &f.value)))
            .count();
        self.ratio(id, hits, gold.fact_expectations.len(), "expected facts matched")
    }

    pub fn score_interoperability(&self) -> Vec<MetricScore> {
        let open = match (self.probe, self.license_present()) {
            (Some(p), Some(lic)) => MetricScore::boolean(
                "interoperability.openly_available",
                p.available && lic,
                format!("available={}, licensed={lic}", p.available),
                self.now,
            ),
            (Some(p), None) => MetricScore::boolean(
                "interoperability.openly_available",
                false,
                format!("available={}, no license evidence", p.available),
                self.now,
            ),
            (None, _) => self.na("interoperability.openly_available", NO_PROBE),
        };
        vec![open, self.judged("interoperability.standard_vocabularies")]
    }

    pub fn score_objectivity(&self) -> Vec<MetricScore> {
        vec![
            self.judged("objectivity.unbiased"),
            self.provenance_score("objectivity.provenance_declared"),
        ]
    }

    pub fn score_security(&self) -> Vec<MetricScore> {
        let id = "security.digital_signature";
        let declared = self.endpoint.and_then(|c| c.signature_url_declared.as_ref()).is_some();
        let preds: HashSet<&str> = self.config.signature_predicates.iter().map(String::as_str).collect();
        let in_data = self.triples().iter().any(|t| preds.contains(t.predicate_iri()));
        let signature = if self.snapshot.is_none() && self.endpoint.is_none() {
            self.na(id, "no snapshot or endpoint config")
        } else {
            let v = declared || in_data;
            MetricScore::boolean(id, v, if v { "signature declared or stated" } else { "no signature evidence" }.into(), self.now)
        };
        vec![signature, self.judged("security.authentication")]
    }

    /// Modification timestamps per subject.
    fn modification_times(&self) -> HashMap<&'a Term, Vec<DateTime<Utc>>> {
        let preds: HashSet<&str> = self.config.modification_predicates.iter().map(String::as_str).collect();
        let mut map: HashMap<&Term, Vec<DateTime<Utc>>> = HashMap::new();
        for t in self.triples() {
            if preds.contains(t.predicate_iri()) {
                if let Some(ts) = t.object().as_literal().and_then(|l| parse_timestamp(l.lexical())) {
                    map.entry(t.subject()).or_default().push(ts);
                }
            }
        }
        map
    }

    /// `(typed instances modified within the horizon, typed instances)`.
    pub fn freshness_counts(&self) -> (usize, usize) {
        let times = self.modification_times();
        let horizon = self.config.decay_horizon();
        let typed = self.typed_instances();
        let fresh = typed
            .iter()
            .filter(|s| {
                times
                    .get(*s)
                    .is_some_and(|ts| ts.iter().any(|t| (self.now - *t).max(chrono::Duration::zero()) <= horizon))
            })
            .count();
        (fresh, typed.len())
    }

    pub fn score_timeliness(&self) -> Vec<MetricScore> {
        if self.snapshot.is_none() {
            return vec![
                self.na("timeliness.up_to_date", NO_SNAPSHOT),
                self.na("timeliness.freshness", NO_SNAPSHOT),
            ];
        }
        let latest = self.modification_times().into_values().flatten().max();
        let up_to_date = match latest {
            None => MetricScore::boolean("timeliness.up_to_date", false, "no modification timestamp".into(), self.now),
            Some(ts) => {
                let delta = (self.now - ts).max(chrono::Duration::zero());
                let tau = self.config.decay_horizon();
                let value = if delta.is_zero() {
                    Rational::one()
                } else if tau.is_zero() {
                    Rational::zero()
                } else {
                    let x = delta.num_milliseconds() as f64 / tau.num_milliseconds() as f64;
                    Rational::from_f64((-x).exp()).unwrap_or_else(Rational::zero)
                };
                MetricScore::exact(
                    "timeliness.up_to_date",
                    value,
                    format!("latest modification {} ({} days ago)", ts.to_rfc3339(), delta.num_days()),
                    self.now,
                )
            }
        };
        let (fresh, typed) = self.freshness_counts();
        vec![up_to_date, self.ratio("timeliness.freshness", fresh, typed, "typed instances recently modified")]
    }

    /// Scores for all 40 catalog metrics, in catalog order.
    pub fn score_all(&self) -> Vec<MetricScore> {
        let mut by_id: HashMap<String, MetricScore> = HashMap::new();
        let mut put = |scores: Vec<MetricScore>| {
            for s in scores {
                by_id.insert(s.metric_id.clone(), s);
            }
        };
        put(self.score_accessibility());
        put(self.score_accuracy());
        put(vec![self.score_appropriate_amount()]);
        put(self.score_believability());
        put(self.score_completeness());
        put(self.score_conciseness());
        put(self.score_consistency());
        put(self.score_ease_of_operation());
        put(self.score_understandability());
        put(vec![self.score_free_of_error()]);
        put(self.score_interoperability());
        put(self.score_objectivity());
        put(self.score_security());
        put(self.score_timeliness());
        for m in catalog::all_metrics().filter(|m| m.kind == MetricKind::Qualitative) {
            if !by_id.contains_key(&m.metric_id) {
                let s = self.judged(&m.metric_id);
                by_id.insert(m.metric_id.clone(), s);
            }
        }
        catalog::all_metrics()
            .map(|m| by_id.remove(&m.metric_id).expect("every catalog metric is scored"))
            .collect()
    }
}

fn range_satisfied(range: &RangeSpec, object: &Term, types: &HashMap<&Term, HashSet<&str>>) -> bool {
    match range {
        RangeSpec::Datatype(dt) => object.as_literal().is_some_and(|l| l.effective_datatype() == dt),
        RangeSpec::Class(c) => !object.is_literal() && types.get(object).is_some_and(|cs| cs.contains(c.as_str())),
    }
}
