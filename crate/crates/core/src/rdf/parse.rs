use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::snapshot::{GraphSnapshot, SnapshotSource, StatsConfig};
use super::term::{Term, Triple};
use super::{ntriples, turtle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    NTriples,
    Turtle,
}

impl RdfFormat {
    /// Guess from a file extension; defaults to Turtle, which also accepts N-Triples.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("nt") => RdfFormat::NTriples,
            _ => RdfFormat::Turtle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("line {line}, column {column}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("input is not valid UTF-8 at byte {0}")]
    Encoding(usize),
    #[error("syntax error at {0}")]
    Syntax(ParseError),
}

/// Per-document blank node relabeling to `b0`, `b1`, ... in order of first use.
#[derive(Debug, Clone, Default)]
pub(crate) struct BlankLabels {
    named: HashMap<String, String>,
    next: usize,
}

impl BlankLabels {
    pub fn fresh(&mut self) -> Term {
        let label = format!("b{}", self.next);
        self.next += 1;
        Term::blank(label)
    }

    pub fn named(&mut self, label: &str) -> Term {
        if let Some(existing) = self.named.get(label) {
            return Term::blank(existing.clone());
        }
        let Term::Blank { value } = self.fresh() else { unreachable!() };
        self.named.insert(label.to_string(), value.clone());
        Term::blank(value)
    }
}

/// Relabel blank nodes of an arbitrary triple sequence canonically.
pub(crate) fn canonicalize_blanks(triples: &[Triple]) -> Vec<Triple> {
    let mut labels = BlankLabels::default();
    triples
        .iter()
        .map(|t| {
            t.map_blanks(|l| match labels.named(l) {
                Term::Blank { value } => value,
                _ => unreachable!(),
            })
        })
        .collect()
}

#[derive(Debug)]
pub(crate) struct RawParse {
    pub triples: Vec<Triple>,
    pub errors: Vec<ParseError>,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub kg_id: String,
    pub mode: ParseMode,
    pub base_iri: Option<String>,
    pub stats: StatsConfig,
    pub source: SnapshotSource,
}

impl IngestOptions {
    pub fn new(kg_id: impl Into<String>) -> Self {
        IngestOptions {
            kg_id: kg_id.into(),
            mode: ParseMode::Strict,
            base_iri: None,
            stats: StatsConfig::default(),
            source: SnapshotSource::Inline,
        }
    }

    pub fn lenient(mut self) -> Self {
        self.mode = ParseMode::Lenient;
        self
    }

    pub fn with_mode(mut self, mode: ParseMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_base(mut self, base: impl Into<String>) -> Self {
        self.base_iri = Some(base.into());
        self
    }

    pub fn with_source(mut self, source: SnapshotSource) -> Self {
        self.source = source;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub snapshot: GraphSnapshot,
    pub errors: Vec<ParseError>,
}

fn read_utf8(mut input: impl Read) -> Result<String, IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    String::from_utf8(bytes).map_err(|e| IngestError::Encoding(e.utf8_error().valid_up_to()))
}

fn finish(raw: RawParse, opts: &IngestOptions) -> Parsed {
    let snapshot = GraphSnapshot::new(opts.kg_id.clone(), raw.triples, opts.source.clone(), &opts.stats);
    Parsed {
        snapshot,
        errors: raw.errors,
    }
}

pub fn parse_ntriples(input: impl Read, opts: &IngestOptions) -> Result<Parsed, IngestError> {
    let text = read_utf8(input)?;
    let raw = ntriples::parse(&text, opts.mode).map_err(IngestError::Syntax)?;
    Ok(finish(raw, opts))
}

pub fn parse_turtle(input: impl Read, opts: &IngestOptions) -> Result<Parsed, IngestError> {
    let text = read_utf8(input)?;
    let raw = turtle::parse(&text, opts.base_iri.as_deref(), opts.mode).map_err(IngestError::Syntax)?;
    Ok(finish(raw, opts))
}

pub fn parse_document(input: impl Read, format: RdfFormat, opts: &IngestOptions) -> Result<Parsed, IngestError> {
    match format {
        RdfFormat::NTriples => parse_ntriples(input, opts),
        RdfFormat::Turtle => parse_turtle(input, opts),
    }
}

/// Parse a file, recording its path as the snapshot source.
pub fn parse_file(path: &Path, opts: &IngestOptions) -> Result<Parsed, IngestError> {
    let file = std::fs::File::open(path)?;
    let mut opts = opts.clone();
    if matches!(opts.source, SnapshotSource::Inline) {
        opts.source = SnapshotSource::File {
            path: path.display().to_string(),
        };
    }
    parse_document(std::io::BufReader::new(file), RdfFormat::from_path(path), &opts)
}
