//! The fixed catalog of 20 quality dimensions and their 40 metrics.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const CATALOG_VERSION: &str = "kgqa-catalog/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "QN")]
    Quantitative,
    #[serde(rename = "QL")]
    Qualitative,
}

impl MetricKind {
    pub fn code(self) -> &'static str {
        match self {
            MetricKind::Quantitative => "QN",
            MetricKind::Qualitative => "QL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Snapshot,
    Probe,
    GoldStandard,
    UseCase,
    Judgment,
    Config,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub metric_id: String,
    pub dimension_id: String,
    pub kind: MetricKind,
    pub evidence: BTreeSet<Evidence>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub dimension_id: String,
    pub name: String,
    pub metrics: Vec<MetricSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogDocument {
    pub catalog_version: String,
    pub dimensions: Vec<DimensionSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown metric {0:?}")]
pub struct UnknownMetric(pub String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dimension {0:?}")]
pub struct UnknownDimension(pub String);

use Evidence::*;
use MetricKind::{Qualitative as QL, Quantitative as QN};

type Row = (&'static str, MetricKind, &'static [Evidence], &'static str);

const TABLE: &[(&str, &str, &[Row])] = &[
    ("accessibility", "Accessibility", &[
        ("available", QN, &[Probe], "the KG or part of it answers over HTTP"),
        ("sparql_endpoint", QN, &[Probe], "a working SPARQL endpoint is offered"),
        ("retrievable", QN, &[Probe], "sample entity IRIs dereference to RDF"),
        ("content_negotiation", QN, &[Probe], "requested RDF media types are honored"),
        ("license", QN, &[Snapshot, Config], "a license is stated in the data or declared"),
    ]),
    ("accuracy", "Accuracy", &[
        ("syntactic_validity", QN, &[Snapshot], "typed literals conform to their datatype"),
        ("semantic_validity", QN, &[Snapshot, UseCase], "statements respect functional and range declarations"),
    ]),
    ("appropriate_amount", "Appropriate amount", &[
        ("instance_amount", QN, &[Snapshot, GoldStandard], "enough typed instances for the task"),
    ]),
    ("believability", "Believability", &[
        ("provenance", QN, &[Snapshot], "subjects carry provenance statements"),
        ("trustworthy", QL, &[Judgment], "raters consider the KG trustworthy"),
        ("no_unknown_values", QN, &[Snapshot], "literals are neither empty nor unknown placeholders"),
    ]),
    ("completeness", "Completeness", &[
        ("data", QN, &[Snapshot, GoldStandard], "expected entity properties are present"),
        ("population", QN, &[Snapshot, GoldStandard], "expected entities are present"),
        ("interlinking", QN, &[Snapshot], "instances link to external resources"),
    ]),
    ("concise_representation", "Concise representation", &[
        ("blank_node_avoidance", QN, &[Snapshot], "few blank nodes among terms"),
        ("reification_avoidance", QN, &[Snapshot], "few reification statements"),
    ]),
    ("consistent_representation", "Consistent representation", &[
        ("disjoint_classes", QN, &[Snapshot, UseCase], "no instance belongs to two disjoint classes"),
        ("inverse_functional", QN, &[Snapshot, UseCase], "inverse functional values identify one subject"),
        ("schema_restrictions", QN, &[Snapshot, UseCase], "objects satisfy declared property ranges"),
    ]),
    ("cost_effectiveness", "Cost-effectiveness", &[
        ("extra_cost", QL, &[Judgment], "using the KG needs no costly extra data"),
    ]),
    ("ease_of_manipulation", "Ease of manipulation", &[
        ("documentation", QL, &[Judgment], "the KG is documented"),
    ]),
    ("ease_of_operation", "Ease of operation", &[
        ("update", QN, &[Probe, Config], "updates are supported"),
        ("download", QN, &[Probe], "a dump can be downloaded"),
        ("integrate", QN, &[Probe], "data is served in a standard RDF serialization"),
    ]),
    ("ease_of_understanding", "Ease of understanding", &[
        ("self_descriptive_uris", QN, &[Snapshot], "subject IRIs have readable local names"),
        ("languages", QN, &[Snapshot, GoldStandard], "labels cover the required languages"),
    ]),
    ("free_of_error", "Free of error", &[
        ("correct_values", QN, &[Snapshot, GoldStandard], "expected facts appear exactly"),
    ]),
    ("interoperability", "Interoperability", &[
        ("openly_available", QN, &[Probe, Snapshot, Config], "available and licensed"),
        ("standard_vocabularies", QL, &[Judgment], "well-known vocabularies are reused"),
    ]),
    ("objectivity", "Objectivity", &[
        ("unbiased", QL, &[Judgment], "content is judged unbiased"),
        ("provenance_declared", QN, &[Snapshot], "subjects declare provenance"),
    ]),
    ("relevancy", "Relevancy", &[
        ("domain_coverage", QL, &[Judgment], "knowledge covers the domain of the use case"),
    ]),
    ("reputation", "Reputation", &[
        ("rating", QL, &[Judgment], "the KG ranks well in explicit ratings"),
    ]),
    ("security", "Security", &[
        ("digital_signature", QN, &[Snapshot, Config], "a digital signature is provided"),
        ("authentication", QL, &[Judgment], "access is authenticated adequately"),
    ]),
    ("timeliness", "Timeliness", &[
        ("up_to_date", QN, &[Snapshot], "the latest modification is recent"),
        ("freshness", QN, &[Snapshot], "instances were modified recently"),
    ]),
    ("traceability", "Traceability", &[
        ("provenance_verifiable", QL, &[Judgment], "provenance can be verified"),
        ("authenticity", QL, &[Judgment], "authenticity can be verified"),
    ]),
    ("variety", "Variety", &[
        ("domain_sources", QL, &[Judgment], "sources from various domains are integrated"),
    ]),
];

fn build() -> Vec<DimensionSpec> {
    TABLE
        .iter()
        .map(|(dim, name, rows)| DimensionSpec {
            dimension_id: dim.to_string(),
            name: name.to_string(),
            metrics: rows
                .iter()
                .map(|(local, kind, evidence, description)| MetricSpec {
                    metric_id: format!("{dim}.{local}"),
                    dimension_id: dim.to_string(),
                    kind: *kind,
                    evidence: evidence.iter().copied().collect(),
                    description: description.to_string(),
                })
                .collect(),
        })
        .collect()
}

/// The 20 dimensions in catalog order.
pub fn catalog() -> &'static [DimensionSpec] {
    static CATALOG: OnceLock<Vec<DimensionSpec>> = OnceLock::new();
    CATALOG.get_or_init(build)
}

pub fn catalog_document() -> CatalogDocument {
    CatalogDocument {
        catalog_version: CATALOG_VERSION.to_string(),
        dimensions: catalog().to_vec(),
    }
}

pub fn all_metrics() -> impl Iterator<Item = &'static MetricSpec> {
    catalog().iter().flat_map(|d| d.metrics.iter())
}

pub fn resolve_metric(metric_id: &str) -> Result<&'static MetricSpec, UnknownMetric> {
    all_metrics()
        .find(|m| m.metric_id == metric_id)
        .ok_or_else(|| UnknownMetric(metric_id.to_string()))
}

pub fn resolve_dimension(dimension_id: &str) -> Result<&'static DimensionSpec, UnknownDimension> {
    catalog()
        .iter()
        .find(|d| d.dimension_id == dimension_id)
        .ok_or_else(|| UnknownDimension(dimension_id.to_string()))
}

pub fn dimension_name(dimension_id: &str) -> &str {
    resolve_dimension(dimension_id).map(|d| d.name.as_str()).unwrap_or(dimension_id)
}

pub fn ql_metric_ids() -> Vec<&'static str> {
    all_metrics()
        .filter(|m| m.kind == MetricKind::Qualitative)
        .map(|m| m.metric_id.as_str())
        .collect()
}
