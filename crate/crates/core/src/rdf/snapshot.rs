use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::parse::canonicalize_blanks;
use super::term::{Term, Triple};
use super::vocab::{
    RDFS_LABEL, RDF_OBJECT, RDF_PREDICATE, RDF_STATEMENT, RDF_SUBJECT, RDF_TYPE, SCHEMA_NAME, SCHEMA_NAME_HTTPS,
    SKOS_PREF_LABEL,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SnapshotSource {
    Inline,
    File {
        path: String,
    },
    Endpoint {
        url: String,
        query_template: String,
        page_size: usize,
        retrieved_at: DateTime<Utc>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsConfig {
    /// Predicates whose literal language tags count toward `label_languages`.
    pub label_predicates: Vec<String>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            label_predicates: [RDFS_LABEL, SCHEMA_NAME, SCHEMA_NAME_HTTPS, SKOS_PREF_LABEL]
                .into_iter()
                .map(str::to_string)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub triple_count: usize,
    pub distinct_subjects: usize,
    pub distinct_predicates: usize,
    pub distinct_objects: usize,
    /// Distinct terms in subject or object position.
    pub distinct_terms: usize,
    pub blank_node_count: usize,
    /// Statements with a literal object.
    pub literal_count: usize,
    /// Keyed by effective datatype (`xsd:string`, `rdf:langString` defaults applied).
    pub literals_by_datatype: BTreeMap<String, usize>,
    /// Lower-cased language tags seen on labeling predicates.
    pub label_languages: BTreeSet<String>,
    /// Distinct subjects with at least one `rdf:type`.
    pub typed_instance_count: usize,
    pub class_instance_counts: BTreeMap<String, usize>,
    pub reification_triple_count: usize,
}

pub fn is_reification_triple(t: &Triple) -> bool {
    match t.predicate_iri() {
        RDF_SUBJECT | RDF_PREDICATE | RDF_OBJECT => true,
        RDF_TYPE => t.object().as_iri() == Some(RDF_STATEMENT),
        _ => false,
    }
}

pub fn compute_stats<'a>(triples: impl IntoIterator<Item = &'a Triple>, config: &StatsConfig) -> GraphStats {
    let distinct: HashSet<&Triple> = triples.into_iter().collect();
    let label_predicates: HashSet<&str> = config.label_predicates.iter().map(String::as_str).collect();

    let mut subjects = HashSet::new();
    let mut predicates = HashSet::new();
    let mut objects = HashSet::new();
    let mut typed = HashSet::new();
    let mut class_members: BTreeMap<String, HashSet<&Term>> = BTreeMap::new();
    let mut stats = GraphStats {
        triple_count: distinct.len(),
        ..GraphStats::default()
    };

    for t in &distinct {
        subjects.insert(t.subject());
        predicates.insert(t.predicate_iri());
        objects.insert(t.object());
        if let Some(lit) = t.object().as_literal() {
            stats.literal_count += 1;
            *stats
                .literals_by_datatype
                .entry(lit.effective_datatype().to_string())
                .or_default() += 1;
            if let Some(lang) = lit.language() {
                if label_predicates.contains(t.predicate_iri()) {
                    stats.label_languages.insert(lang.to_ascii_lowercase());
                }
            }
        }
        if t.predicate_iri() == RDF_TYPE {
            typed.insert(t.subject());
            if let Some(class) = t.object().as_iri() {
                class_members.entry(class.to_string()).or_default().insert(t.subject());
            }
        }
        if is_reification_triple(t) {
            stats.reification_triple_count += 1;
        }
    }

    let terms: HashSet<&Term> = subjects.iter().chain(objects.iter()).copied().collect();
    stats.distinct_subjects = subjects.len();
    stats.distinct_predicates = predicates.len();
    stats.distinct_objects = objects.len();
    stats.distinct_terms = terms.len();
    stats.blank_node_count = terms.iter().filter(|t| t.is_blank()).count();
    stats.typed_instance_count = typed.len();
    stats.class_instance_counts = class_members.into_iter().map(|(k, v)| (k, v.len())).collect();
    stats
}

/// Immutable ingested graph. Triples keep input order with duplicates removed.
#[derive(Debug, Clone)]
pub struct GraphSnapshot {
    kg_id: String,
    triples: Vec<Triple>,
    source: SnapshotSource,
    ingested_at: DateTime<Utc>,
    stats: GraphStats,
}

impl GraphSnapshot {
    pub fn new(kg_id: impl Into<String>, triples: Vec<Triple>, source: SnapshotSource, config: &StatsConfig) -> Self {
        let mut seen = HashSet::with_capacity(triples.len());
        let triples: Vec<Triple> = triples.into_iter().filter(|t| seen.insert(t.clone())).collect();
        let stats = compute_stats(&triples, config);
        GraphSnapshot {
            kg_id: kg_id.into(),
            triples,
            source,
            ingested_at: Utc::now(),
            stats,
        }
    }

    pub fn kg_id(&self) -> &str {
        &self.kg_id
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn source(&self) -> &SnapshotSource {
        &self.source
    }

    pub fn ingested_at(&self) -> DateTime<Utc> {
        self.ingested_at
    }

    pub fn stats(&self) -> &GraphStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn to_canonical_ntriples(&self) -> String {
        canonical_ntriples(&self.triples)
    }
}

/// Sorted N-Triples with blank labels renumbered in order of first appearance.
///
/// Relabeling can reorder lines, so the two steps repeat until the output is
/// stable; a stable output re-parses to the same labels and bytes.
pub fn canonical_ntriples(triples: &[Triple]) -> String {
    let mut unique: Vec<Triple> = {
        let mut seen = HashSet::new();
        triples.iter().filter(|t| seen.insert(*t)).cloned().collect()
    };
    let mut rendered: Vec<String>;
    let mut rounds = 0;
    loop {
        let mut keyed: Vec<(String, Triple)> = unique.into_iter().map(|t| (t.to_string(), t)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let sorted: Vec<Triple> = keyed.iter().map(|(_, t)| t.clone()).collect();
        let relabeled = canonicalize_blanks(&sorted);
        rounds += 1;
        if relabeled == sorted || rounds >= 64 {
            rendered = keyed.into_iter().map(|(s, _)| s).collect();
            break;
        }
        unique = relabeled;
    }
    rendered.iter_mut().for_each(|l| l.push('\n'));
    rendered.concat()
}
