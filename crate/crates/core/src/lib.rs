//! Knowledge graph quality assessment: RDF ingestion, endpoint probing,
//! a fixed metric catalog, metric scoring, weighted aggregation, and a
//! file-backed run registry.

pub mod aggregation;
pub mod catalog;
pub mod http;
pub mod metrics;
pub mod probe;
pub mod rational;
pub mod pipeline;
pub mod rdf;
pub mod registry;

pub use rational::Rational;
