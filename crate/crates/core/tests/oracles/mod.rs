//! Labelled random graphs and brute-force recounts of the graph metrics.
//!
//! Every generated term carries the facts the oracle needs (lexical validity,
//! placeholder status, timestamp, opacity) as labels fixed by its pool, so the
//! oracle never consults the engine's own checks.

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, TimeZone, Utc};
use kgqa_core::metrics::{GoldStandard, JudgmentLog, MetricConfig, PropertyExpectation, RangeSpec, ScoringInputs, SchemaSpec};
use kgqa_core::rdf::{GraphSnapshot, Literal, SnapshotSource, StatsConfig, Term, Triple};
use kgqa_core::Rational;
use rand::rngs::StdRng;
use rand::RngExt;

pub const KG: &str = "http://kg.example/";
const EXT: &str = "http://other.example/";
const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
const DERIVED: &str = "http://www.w3.org/ns/prov#wasDerivedFrom";
const MODIFIED: &str = "http://purl.org/dc/terms/modified";
const POPULATION: &str = "http://kg.example/population";
const COUNTRY: &str = "http://kg.example/country";
const CODE: &str = "http://kg.example/code";
const NAME: &str = "http://kg.example/name";
const FOUNDED: &str = "http://kg.example/founded";
const KNOWS: &str = "http://kg.example/knows";
const REF: &str = "http://kg.example/ref";
const CITY: &str = "http://kg.example/City";
const RIVER: &str = "http://kg.example/River";
const COUNTRY_CLASS: &str = "http://kg.example/Country";

pub fn clock() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 12, 31, 0, 0, 0).unwrap()
}

fn horizon() -> Duration {
    Duration::days(365)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    /// `descriptive`: the local name has a letter and is not an opaque id.
    Iri { iri: String, descriptive: bool },
    Blank(String),
    Lit {
        lex: String,
        datatype: Option<String>,
        lang: Option<String>,
        valid: bool,
        unknown: bool,
        stamp: Option<DateTime<Utc>>,
    },
}

impl Node {
    fn iri(&self) -> Option<&str> {
        match self {
            Node::Iri { iri, .. } => Some(iri),
            _ => None,
        }
    }

    fn is_lit(&self) -> bool {
        matches!(self, Node::Lit { .. })
    }

    fn term(&self) -> Term {
        match self {
            Node::Iri { iri, .. } => Term::iri(iri.clone()).unwrap(),
            Node::Blank(b) => Term::blank(b.clone()),
            Node::Lit { lex, datatype, lang, .. } => Term::literal(match (datatype, lang) {
                (_, Some(l)) => Literal::lang(lex.clone(), l.clone()),
                (Some(d), None) => Literal::typed(lex.clone(), d.clone()),
                (None, None) => Literal::simple(lex.clone()),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct T {
    pub s: Node,
    pub p: String,
    pub o: Node,
}

pub type Graph = Vec<T>;

fn kg_iri(local: &str, descriptive: bool) -> Node {
    Node::Iri {
        iri: format!("{KG}{local}"),
        descriptive,
    }
}

fn ext_iri(local: String, descriptive: bool) -> Node {
    Node::Iri {
        iri: format!("{EXT}{local}"),
        descriptive,
    }
}

fn lit(lex: &str, datatype: Option<&str>, valid: bool) -> Node {
    Node::Lit {
        lex: lex.to_string(),
        datatype: datatype.map(str::to_string),
        lang: None,
        valid,
        unknown: false,
        stamp: None,
    }
}

fn subject(rng: &mut StdRng) -> Node {
    match rng.random_range(0..20) {
        0..=10 => kg_iri(&format!("Place_{}", rng.random_range(0..30)), true),
        11..=13 => kg_iri(&format!("Q{}", rng.random_range(0..15)), false),
        14 => kg_iri(&format!("{}", rng.random_range(0..10)), false),
        15 => kg_iri(&format!("item-{}", rng.random_range(0..10)), true),
        16 => ext_iri(format!("Thing_{}", rng.random_range(0..10)), true),
        _ => Node::Blank(format!("b{}", rng.random_range(0..6))),
    }
}

fn plain(rng: &mut StdRng) -> Node {
    let (lex, unknown) = match rng.random_range(0..10) {
        0 => ("unknown".to_string(), true),
        1 => ("N/A".to_string(), true),
        2 => ("".to_string(), true),
        3 => (" Unknown ".to_string(), true),
        4 => ("unknowable".to_string(), false),
        _ => (format!("text {}", rng.random_range(0..40)), false),
    };
    Node::Lit {
        lex,
        datatype: None,
        lang: None,
        valid: true,
        unknown,
        stamp: None,
    }
}

fn integer(rng: &mut StdRng) -> Node {
    let n = rng.random_range(0..500);
    match rng.random_range(0..8) {
        0 => lit(&format!("{n}x"), Some(&format!("{XSD}integer")), false),
        1 => lit("1.5", Some(&format!("{XSD}integer")), false),
        2 => lit(&format!("{n}"), None, true),
        3 => lit(&format!("-{n}"), Some(&format!("{XSD}integer")), true),
        _ => lit(&format!("{n}"), Some(&format!("{XSD}integer")), true),
    }
}

fn date(rng: &mut StdRng) -> Node {
    let dt = format!("{XSD}date");
    match rng.random_range(0..6) {
        0 => lit("2023-02-29", Some(&dt), false),
        1 => lit("2024-13-01", Some(&dt), false),
        2 => lit("2024-02-29", Some(&dt), true),
        _ => lit(&format!("19{:02}-0{}-1{}", rng.random_range(0..100), rng.random_range(1..10), rng.random_range(0..10)), Some(&dt), true),
    }
}

fn stamp_lit(lex: &str, stamp: Option<DateTime<Utc>>) -> Node {
    Node::Lit {
        lex: lex.to_string(),
        datatype: Some(format!("{XSD}dateTime")),
        lang: None,
        valid: stamp.is_some(),
        unknown: false,
        stamp,
    }
}

fn timestamp(rng: &mut StdRng) -> Node {
    let at = |y, m, d| Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap();
    match rng.random_range(0..7) {
        0 => stamp_lit("2024-06-01T00:00:00Z", Some(at(2024, 6, 1))),
        1 => stamp_lit("2024-01-01T00:00:00Z", Some(at(2024, 1, 1))),
        2 => stamp_lit("2025-03-01T00:00:00Z", Some(at(2025, 3, 1))),
        3 => stamp_lit("2023-06-01T00:00:00Z", Some(at(2023, 6, 1))),
        4 => stamp_lit("2021-01-15T00:00:00Z", Some(at(2021, 1, 15))),
        5 => stamp_lit("2019-01-01T00:00:00Z", Some(at(2019, 1, 1))),
        _ => stamp_lit("not-a-date", None),
    }
}

fn one_triple(rng: &mut StdRng) -> T {
    let s = subject(rng);
    let (p, o) = match rng.random_range(0..26) {
        0..=4 => (
            TYPE,
            kg_iri(["City", "River", "Country", "Person"][rng.random_range(0..4)], true),
        ),
        5..=6 => (
            LABEL,
            Node::Lit {
                lex: format!("name {}", rng.random_range(0..20)),
                datatype: None,
                lang: Some(["en", "de", "fr"][rng.random_range(0..3)].into()),
                valid: true,
                unknown: false,
                stamp: None,
            },
        ),
        7..=8 => (NAME, plain(rng)),
        9..=10 => (
            POPULATION,
            if rng.random_bool(0.15) { plain(rng) } else { integer(rng) },
        ),
        11..=12 => (COUNTRY, subject(rng)),
        13 => (CODE, lit(&format!("C{}", rng.random_range(0..25)), None, true)),
        14..=15 => (
            SAME_AS,
            if rng.random_bool(0.8) {
                ext_iri(format!("e{}", rng.random_range(0..2000)), false)
            } else {
                subject(rng)
            },
        ),
        16..=17 => (
            DERIVED,
            Node::Iri {
                iri: format!("http://source.example/s{}", rng.random_range(0..5)),
                descriptive: false,
            },
        ),
        18..=19 => (MODIFIED, timestamp(rng)),
        20 => (FOUNDED, date(rng)),
        21 => (KNOWS, subject(rng)),
        22..=23 => (REF, ext_iri(format!("o{}", rng.random_range(0..100_000)), false)),
        24 => (
            "http://www.w3.org/1999/02/22-rdf-syntax-ns#subject",
            kg_iri(&format!("Place_{}", rng.random_range(0..30)), true),
        ),
        _ => (
            TYPE,
            Node::Iri {
                iri: format!("{RDF}Statement"),
                descriptive: true,
            },
        ),
    };
    T { s, p: p.to_string(), o }
}

fn dedup(g: Graph) -> Graph {
    let mut seen = std::collections::HashSet::new();
    g.into_iter().filter(|t| seen.insert(t.clone())).collect()
}

pub fn random_graph(rng: &mut StdRng, n: usize) -> Graph {
    dedup((0..n).map(|_| one_triple(rng)).collect())
}

pub fn random_gold(rng: &mut StdRng, g: &Graph) -> GoldStandard {
    let mut gold = GoldStandard {
        gold_standard_id: "g".into(),
        entities: BTreeSet::new(),
        property_expectations: vec![],
        fact_expectations: vec![],
        required_languages: BTreeSet::new(),
        required_instance_count: 1,
    };
    let preds = [TYPE, LABEL, NAME, POPULATION, COUNTRY, CODE, SAME_AS, MODIFIED];
    let mut pairs = BTreeSet::new();
    for _ in 0..rng.random_range(0..15) {
        let e = if !g.is_empty() && rng.random_bool(0.6) {
            g[rng.random_range(0..g.len())].s.iri().map(str::to_string)
        } else {
            subject(rng).iri().map(str::to_string)
        };
        let Some(e) = e else { continue };
        if rng.random_bool(0.5) {
            gold.entities.insert(e.clone());
        }
        let p = if !g.is_empty() && rng.random_bool(0.5) {
            g[rng.random_range(0..g.len())].p.clone()
        } else {
            preds[rng.random_range(0..preds.len())].to_string()
        };
        pairs.insert((e, p));
    }
    gold.property_expectations = pairs
        .into_iter()
        .map(|(entity, property)| PropertyExpectation { entity, property })
        .collect();
    gold
}

fn schema() -> SchemaSpec {
    let mut s = SchemaSpec {
        schema_id: "s".into(),
        ..SchemaSpec::default()
    };
    s.disjoint_class_pairs.insert([CITY.to_string(), RIVER.to_string()]);
    s.inverse_functional_properties.insert(CODE.to_string());
    s.property_ranges.insert(POPULATION.into(), RangeSpec::Datatype(format!("{XSD}integer")));
    s.property_ranges.insert(COUNTRY.into(), RangeSpec::Class(COUNTRY_CLASS.into()));
    s
}

fn config() -> MetricConfig {
    MetricConfig {
        kg_namespaces: vec![KG.to_string()],
        decay_horizon_days: 365,
        ..MetricConfig::default()
    }
}

// ---------------------------------------------------------------------------
// Brute-force counts. Each returns `(num, den)` where `num` is the defect
// count for defect metrics and the hit count for coverage metrics.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `1 - num/den`, and 1 when `den == 0`.
    Defect,
    /// `num/den`, not applicable when `den == 0`.
    Coverage,
}

pub const METRICS: [(&str, Shape); 14] = [
    ("concise_representation.blank_node_avoidance", Shape::Defect),
    ("concise_representation.reification_avoidance", Shape::Defect),
    ("consistent_representation.disjoint_classes", Shape::Defect),
    ("consistent_representation.inverse_functional", Shape::Defect),
    ("consistent_representation.schema_restrictions", Shape::Defect),
    ("accuracy.semantic_validity", Shape::Defect),
    ("accuracy.syntactic_validity", Shape::Defect),
    ("believability.no_unknown_values", Shape::Defect),
    ("completeness.data", Shape::Coverage),
    ("completeness.population", Shape::Coverage),
    ("completeness.interlinking", Shape::Coverage),
    ("believability.provenance", Shape::Coverage),
    ("ease_of_understanding.self_descriptive_uris", Shape::Coverage),
    ("timeliness.freshness", Shape::Coverage),
];

fn has_type(g: &Graph, s: &Node, class: &str) -> bool {
    g.iter().any(|t| &t.s == s && t.p == TYPE && t.o.iri() == Some(class))
}

fn typed(g: &Graph) -> Vec<&Node> {
    let mut out: Vec<&Node> = Vec::new();
    for t in g {
        if t.p == TYPE && !out.contains(&&t.s) {
            out.push(&t.s);
        }
    }
    out
}

fn distinct<'a>(items: impl Iterator<Item = &'a Node>) -> Vec<&'a Node> {
    let mut out: Vec<&Node> = Vec::new();
    for n in items {
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

fn is_reification(t: &T) -> bool {
    let rdf = |local: &str| format!("{RDF}{local}");
    t.p == rdf("subject") || t.p == rdf("predicate") || t.p == rdf("object") || (t.p == TYPE && t.o.iri() == Some(&rdf("Statement")))
}

fn range_ok(g: &Graph, t: &T) -> Option<bool> {
    match t.p.as_str() {
        POPULATION => Some(match &t.o {
            Node::Lit { datatype, lang, .. } => lang.is_none() && datatype.as_deref() == Some(&format!("{XSD}integer")),
            _ => false,
        }),
        COUNTRY => Some(!t.o.is_lit() && has_type(g, &t.o, COUNTRY_CLASS)),
        _ => None,
    }
}

pub fn count(id: &str, g: &Graph, gold: &GoldStandard, now: DateTime<Utc>) -> (usize, usize) {
    match id {
        "concise_representation.blank_node_avoidance" => {
            let terms = distinct(g.iter().flat_map(|t| [&t.s, &t.o]));
            (terms.iter().filter(|n| matches!(n, Node::Blank(_))).count(), terms.len())
        }
        "concise_representation.reification_avoidance" => (g.iter().filter(|t| is_reification(t)).count(), g.len()),
        "consistent_representation.disjoint_classes" => {
            let ty = typed(g);
            (ty.iter().filter(|s| has_type(g, s, CITY) && has_type(g, s, RIVER)).count(), ty.len())
        }
        "consistent_representation.inverse_functional" => {
            let stmts: Vec<&T> = g.iter().filter(|t| t.p == CODE).collect();
            let bad = stmts
                .iter()
                .filter(|a| stmts.iter().any(|b| b.o == a.o && b.s != a.s))
                .count();
            (bad, stmts.len())
        }
        "consistent_representation.schema_restrictions" | "accuracy.semantic_validity" => {
            let checks: Vec<bool> = g.iter().filter_map(|t| range_ok(g, t)).collect();
            (checks.iter().filter(|ok| !**ok).count(), checks.len())
        }
        "accuracy.syntactic_validity" => {
            let lits: Vec<&Node> = g.iter().map(|t| &t.o).filter(|o| o.is_lit()).collect();
            (lits.iter().filter(|l| matches!(l, Node::Lit { valid: false, .. })).count(), lits.len())
        }
        "believability.no_unknown_values" => {
            let lits: Vec<&Node> = g.iter().map(|t| &t.o).filter(|o| o.is_lit()).collect();
            (lits.iter().filter(|l| matches!(l, Node::Lit { unknown: true, .. })).count(), lits.len())
        }
        "completeness.data" => {
            let hit = gold
                .property_expectations
                .iter()
                .filter(|e| g.iter().any(|t| t.s.iri() == Some(&e.entity) && t.p == e.property))
                .count();
            (hit, gold.property_expectations.len())
        }
        "completeness.population" => {
            let hit = gold
                .entities
                .iter()
                .filter(|e| g.iter().any(|t| t.s.iri() == Some(e) || t.o.iri() == Some(e)))
                .count();
            (hit, gold.entities.len())
        }
        "completeness.interlinking" => {
            let ty = typed(g);
            let linked = ty
                .iter()
                .filter(|s| {
                    g.iter()
                        .any(|t| &&t.s == *s && t.p == SAME_AS && t.o.iri().is_some_and(|o| !o.starts_with(KG)))
                })
                .count();
            (linked, ty.len())
        }
        "believability.provenance" => {
            let subjects = distinct(g.iter().map(|t| &t.s));
            let with = subjects
                .iter()
                .filter(|s| g.iter().any(|t| &&t.s == *s && t.p == DERIVED))
                .count();
            (with, subjects.len())
        }
        "ease_of_understanding.self_descriptive_uris" => {
            let subjects = distinct(g.iter().map(|t| &t.s).filter(|s| s.iri().is_some()));
            let good = subjects
                .iter()
                .filter(|s| matches!(s, Node::Iri { descriptive: true, .. }))
                .count();
            (good, subjects.len())
        }
        "timeliness.freshness" => {
            let ty = typed(g);
            let fresh = ty
                .iter()
                .filter(|s| {
                    g.iter().any(|t| {
                        &&t.s == *s
                            && t.p == MODIFIED
                            && matches!(&t.o, Node::Lit { stamp: Some(at), .. } if (now - *at).max(Duration::zero()) <= horizon())
                    })
                })
                .count();
            (fresh, ty.len())
        }
        other => panic!("no oracle for {other}"),
    }
}

fn shape(id: &str) -> Shape {
    METRICS.iter().find(|(m, _)| *m == id).unwrap().1
}

pub fn oracle_value(id: &str, g: &Graph, gold: &GoldStandard, now: DateTime<Utc>) -> Option<Rational> {
    let (num, den) = count(id, g, gold, now);
    match (shape(id), den) {
        (Shape::Defect, 0) => Some(Rational::one()),
        (Shape::Defect, d) => Some(Rational::ratio(d - num, d)),
        (Shape::Coverage, 0) => None,
        (Shape::Coverage, d) => Some(Rational::ratio(num, d)),
    }
}

/// Engine values for the oracle metrics; `None` is not applicable.
pub fn engine_values(g: &Graph, gold: &GoldStandard, now: DateTime<Utc>) -> Vec<(&'static str, Option<Rational>)> {
    let triples: Vec<Triple> = g.iter().map(|t| Triple::new(t.s.term(), Term::iri(t.p.clone()).unwrap(), t.o.term()).unwrap()).collect();
    let snapshot = GraphSnapshot::new("oracle", triples, SnapshotSource::Inline, &StatsConfig::default());
    assert_eq!(snapshot.len(), g.len(), "generator produced duplicate triples");
    let log = JudgmentLog::new();
    let cfg = config();
    let schema = schema();
    let inputs = ScoringInputs {
        snapshot: Some(&snapshot),
        gold: Some(gold),
        schema: Some(&schema),
        ..ScoringInputs::new(&log, &cfg, now)
    };
    let scores = inputs.score_all();
    METRICS
        .iter()
        .map(|(id, _)| {
            let s = scores.iter().find(|s| s.metric_id == *id).unwrap();
            (*id, (!s.not_applicable).then(|| s.value.clone()))
        })
        .collect()
}

pub fn compare(g: &Graph, gold: &GoldStandard, now: DateTime<Utc>) -> Vec<(&'static str, Option<Rational>, Option<Rational>)> {
    engine_values(g, gold, now)
        .into_iter()
        .map(|(id, got)| (id, oracle_value(id, g, gold, now), got))
        .collect()
}

// ---------------------------------------------------------------------------
// Defect injection: each kind adds `k` violations (or removes `k` hits)
// without touching the metric's denominator.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    InvalidLiteral,
    UnknownPlaceholder,
    BlankObject,
    Reification,
    DisjointType,
    SharedIfpValue,
    RangeBreak,
    DropProperty,
    DropEntity,
    DropLinks,
    DropProvenance,
    OpaqueRename,
    StaleDate,
}

impl Injection {
    pub const ALL: [Injection; 13] = [
        Injection::InvalidLiteral,
        Injection::UnknownPlaceholder,
        Injection::BlankObject,
        Injection::Reification,
        Injection::DisjointType,
        Injection::SharedIfpValue,
        Injection::RangeBreak,
        Injection::DropProperty,
        Injection::DropEntity,
        Injection::DropLinks,
        Injection::DropProvenance,
        Injection::OpaqueRename,
        Injection::StaleDate,
    ];

    fn metric(self) -> &'static str {
        match self {
            Injection::InvalidLiteral => "accuracy.syntactic_validity",
            Injection::UnknownPlaceholder => "believability.no_unknown_values",
            Injection::BlankObject => "concise_representation.blank_node_avoidance",
            Injection::Reification => "concise_representation.reification_avoidance",
            Injection::DisjointType => "consistent_representation.disjoint_classes",
            Injection::SharedIfpValue => "consistent_representation.inverse_functional",
            Injection::RangeBreak => "consistent_representation.schema_restrictions",
            Injection::DropProperty => "completeness.data",
            Injection::DropEntity => "completeness.population",
            Injection::DropLinks => "completeness.interlinking",
            Injection::DropProvenance => "believability.provenance",
            Injection::OpaqueRename => "ease_of_understanding.self_descriptive_uris",
            Injection::StaleDate => "timeliness.freshness",
        }
    }
}

pub struct Trial {
    pub metric: &'static str,
    pub k: usize,
    pub den_before: usize,
    pub den_after: usize,
    pub before: Rational,
    pub after: Rational,
}

fn pick<T: Clone>(rng: &mut StdRng, mut items: Vec<T>) -> Vec<T> {
    if items.is_empty() {
        return items;
    }
    let k = rng.random_range(1..=items.len().min(3));
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(items.swap_remove(rng.random_range(0..items.len())));
    }
    out
}

fn fresh_id(rng: &mut StdRng) -> u64 {
    rng.random_range(1_000_000..u64::MAX / 2)
}

fn replace_object(g: &mut Graph, at: usize, o: Node) {
    g[at].o = o;
}

fn rename(g: &mut Graph, from: &Node, to: &Node) {
    for t in g.iter_mut() {
        if &t.s == from {
            t.s = to.clone();
        }
        if &t.o == from {
            t.o = to.clone();
        }
    }
}

/// Apply one injection. `None` when the graph offers no candidate.
pub fn inject(rng: &mut StdRng, kind: Injection, g: &Graph, gold: &GoldStandard, now: DateTime<Utc>) -> Option<Trial> {
    let metric = kind.metric();
    let mut h = g.clone();
    let idx = |f: &dyn Fn(&T) -> bool| -> Vec<usize> { (0..g.len()).filter(|&i| f(&g[i])).collect() };
    let k = match kind {
        Injection::InvalidLiteral => {
            let chosen = pick(rng, idx(&|t| matches!(t.o, Node::Lit { valid: true, .. })));
            for &i in &chosen {
                let lex = format!("{}x", fresh_id(rng));
                replace_object(&mut h, i, lit(&lex, Some(&format!("{XSD}integer")), false));
            }
            chosen.len()
        }
        Injection::UnknownPlaceholder => {
            let chosen = pick(rng, idx(&|t| matches!(t.o, Node::Lit { unknown: false, .. })));
            for (n, &i) in chosen.iter().enumerate() {
                let lex = format!("{}UnKnown{}", " ".repeat(20 + n), " ".repeat(rng.random_range(0..5)));
                let o = Node::Lit {
                    lex,
                    datatype: None,
                    lang: None,
                    valid: true,
                    unknown: true,
                    stamp: None,
                };
                replace_object(&mut h, i, o);
            }
            chosen.len()
        }
        Injection::BlankObject => {
            let uses = |n: &Node| g.iter().filter(|t| &t.s == n).count() + g.iter().filter(|t| &t.o == n).count();
            let chosen = pick(rng, idx(&|t| t.o.iri().is_some() && uses(&t.o) == 1));
            for &i in &chosen {
                replace_object(&mut h, i, Node::Blank(format!("inj{}", fresh_id(rng))));
            }
            chosen.len()
        }
        Injection::Reification => {
            let chosen = pick(rng, idx(&|t| !is_reification(t)));
            for &i in &chosen {
                h[i] = T {
                    s: kg_iri(&format!("stmt{}", fresh_id(rng)), true),
                    p: format!("{RDF}subject"),
                    o: kg_iri("Place_0", true),
                };
            }
            chosen.len()
        }
        Injection::DisjointType => {
            let candidates: Vec<(Node, &str)> = typed(g)
                .into_iter()
                .filter_map(|s| match (has_type(g, s, CITY), has_type(g, s, RIVER)) {
                    (true, false) => Some((s.clone(), RIVER)),
                    (false, true) => Some((s.clone(), CITY)),
                    _ => None,
                })
                .collect();
            let chosen = pick(rng, candidates);
            for (s, class) in &chosen {
                h.push(T {
                    s: s.clone(),
                    p: TYPE.into(),
                    o: kg_iri(class.trim_start_matches(KG), true),
                });
            }
            chosen.len()
        }
        Injection::SharedIfpValue => {
            let stmts: Vec<usize> = idx(&|t| t.p == CODE);
            let shared: Vec<&Node> = stmts
                .iter()
                .map(|&i| &g[i].o)
                .filter(|v| {
                    let holders = distinct(g.iter().filter(|t| t.p == CODE && &&t.o == v).map(|t| &t.s));
                    holders.len() > 1
                })
                .collect();
            let value = (*shared.first()?).clone();
            let mut seen_subjects: Vec<&Node> = Vec::new();
            let mut candidates = Vec::new();
            for &i in &stmts {
                let t = &g[i];
                let unique = !g.iter().any(|u| u.p == CODE && u.o == t.o && u.s != t.s);
                let holds_value = g.iter().any(|u| u.p == CODE && u.s == t.s && u.o == value);
                if unique && !holds_value && !seen_subjects.contains(&&t.s) {
                    seen_subjects.push(&t.s);
                    candidates.push(i);
                }
            }
            let chosen = pick(rng, candidates);
            for &i in &chosen {
                replace_object(&mut h, i, value.clone());
            }
            chosen.len()
        }
        Injection::RangeBreak => {
            let chosen = pick(rng, idx(&|t| range_ok(g, t) == Some(true)));
            for &i in &chosen {
                let lex = format!("r{}", fresh_id(rng));
                replace_object(&mut h, i, lit(&lex, Some(&format!("{XSD}string")), true));
            }
            chosen.len()
        }
        Injection::DropProperty => {
            let hits: Vec<(String, String)> = gold
                .property_expectations
                .iter()
                .filter(|e| g.iter().any(|t| t.s.iri() == Some(&e.entity) && t.p == e.property))
                .map(|e| (e.entity.clone(), e.property.clone()))
                .collect();
            let chosen = pick(rng, hits);
            h.retain(|t| !chosen.iter().any(|(e, p)| t.s.iri() == Some(e) && &t.p == p));
            chosen.len()
        }
        Injection::DropEntity => {
            let (present, _) = count(metric, g, gold, now);
            let safe: Vec<String> = gold
                .entities
                .iter()
                .filter(|e| g.iter().any(|t| t.s.iri() == Some(e) || t.o.iri() == Some(e)))
                .filter(|e| {
                    let rest: Graph = g.iter().filter(|t| t.s.iri() != Some(e) && t.o.iri() != Some(e)).cloned().collect();
                    count(metric, &rest, gold, now).0 == present - 1
                })
                .cloned()
                .collect();
            let e = safe.get(rng.random_range(0..safe.len().max(1)))?.clone();
            h.retain(|t| t.s.iri() != Some(&e) && t.o.iri() != Some(&e));
            1
        }
        Injection::DropLinks => {
            let linked: Vec<Node> = typed(g)
                .into_iter()
                .filter(|s| {
                    g.iter()
                        .any(|t| &&t.s == s && t.p == SAME_AS && t.o.iri().is_some_and(|o| !o.starts_with(KG)))
                })
                .cloned()
                .collect();
            let chosen = pick(rng, linked);
            h.retain(|t| !(t.p == SAME_AS && chosen.contains(&t.s)));
            chosen.len()
        }
        Injection::DropProvenance => {
            let with: Vec<Node> = distinct(g.iter().filter(|t| t.p == DERIVED).map(|t| &t.s))
                .into_iter()
                .filter(|s| g.iter().any(|t| &&t.s == s && t.p != DERIVED))
                .cloned()
                .collect();
            let chosen = pick(rng, with);
            h.retain(|t| !(t.p == DERIVED && chosen.contains(&t.s)));
            chosen.len()
        }
        Injection::OpaqueRename => {
            let good: Vec<Node> = distinct(g.iter().map(|t| &t.s))
                .into_iter()
                .filter(|s| matches!(s, Node::Iri { descriptive: true, .. }))
                .cloned()
                .collect();
            let chosen = pick(rng, good);
            for s in &chosen {
                let to = kg_iri(&format!("Q{}", fresh_id(rng)), false);
                rename(&mut h, s, &to);
            }
            chosen.len()
        }
        Injection::StaleDate => {
            let fresh_subjects: Vec<Node> = typed(g)
                .into_iter()
                .filter(|s| {
                    g.iter().any(|t| {
                        &&t.s == s
                            && t.p == MODIFIED
                            && matches!(&t.o, Node::Lit { stamp: Some(at), .. } if (now - *at).max(Duration::zero()) <= horizon())
                    })
                })
                .cloned()
                .collect();
            let chosen = pick(rng, fresh_subjects);
            let old = stamp_lit("2010-01-01T00:00:00Z", Some(Utc.with_ymd_and_hms(2010, 1, 1, 0, 0, 0).unwrap()));
            for t in h.iter_mut() {
                if t.p == MODIFIED && chosen.contains(&t.s) {
                    t.o = old.clone();
                }
            }
            chosen.len()
        }
    };
    if k == 0 {
        return None;
    }
    let h = dedup(h);
    let value = |graph: &Graph| {
        engine_values(graph, gold, now)
            .into_iter()
            .find(|(id, _)| *id == metric)
            .and_then(|(_, v)| v)
    };
    Some(Trial {
        metric,
        k,
        den_before: count(metric, g, gold, now).1,
        den_after: count(metric, &h, gold, now).1,
        before: value(g)?,
        after: value(&h)?,
    })
}
