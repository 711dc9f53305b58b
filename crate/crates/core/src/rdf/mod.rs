//! RDF terms, parsers, and immutable graph snapshots.

pub mod endpoint;
pub mod iri;
pub(crate) mod lex;
pub(crate) mod ntriples;
pub mod parse;
pub mod snapshot;
pub mod term;
pub(crate) mod turtle;
pub mod vocab;

pub use endpoint::{snapshot_from_endpoint, EndpointError, SampleSpec};
pub use parse::{
    parse_document, parse_file, parse_ntriples, parse_turtle, IngestError, IngestOptions, ParseError, ParseMode,
    Parsed, RdfFormat,
};
pub use snapshot::{canonical_ntriples, compute_stats, GraphSnapshot, GraphStats, SnapshotSource, StatsConfig};
pub use term::{Literal, Term, TermError, Triple};
