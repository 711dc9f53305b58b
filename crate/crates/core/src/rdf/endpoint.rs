//! Paged, ordered snapshot retrieval from a SPARQL endpoint.

use chrono::Utc;
use serde::{Deserialize, Serialize};

use super::snapshot::{GraphSnapshot, SnapshotSource, StatsConfig};
use super::term::{Literal, Term, Triple};
use crate::http::{FetchFailure, FetchRequest, HttpClient};
use crate::probe::EndpointConfig;

pub const QUERY_TEMPLATE: &str = "SELECT ?s ?p ?o WHERE { ?s ?p ?o } ORDER BY ?s ?p ?o LIMIT {limit} OFFSET {offset}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub max_triples: usize,
    pub page_size: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            max_triples: 10_000,
            page_size: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EndpointError {
    #[error("endpoint config has no SPARQL endpoint")]
    NotConfigured,
    #[error("endpoint timed out")]
    Timeout,
    #[error("endpoint unavailable: HTTP status {0}")]
    Status(u16),
    #[error("malformed result payload: {0}")]
    Malformed(String),
    #[error("page at offset {0} added no new triples")]
    NoProgress(usize),
    #[error("network failure: {0}")]
    Network(String),
    #[error("invalid sample spec: {0}")]
    InvalidSpec(&'static str),
}

impl From<FetchFailure> for EndpointError {
    fn from(f: FetchFailure) -> Self {
        match f {
            FetchFailure::Timeout => EndpointError::Timeout,
            other => EndpointError::Network(other.reason()),
        }
    }
}

pub fn page_query(limit: usize, offset: usize) -> String {
    QUERY_TEMPLATE
        .replace("{limit}", &limit.to_string())
        .replace("{offset}", &offset.to_string())
}

fn binding_term(b: &serde_json::Value) -> Result<Term, EndpointError> {
    let malformed = |m: &str| EndpointError::Malformed(m.to_string());
    let kind = b.get("type").and_then(|v| v.as_str()).ok_or_else(|| malformed("binding without type"))?;
    let value = b.get("value").and_then(|v| v.as_str()).ok_or_else(|| malformed("binding without value"))?;
    match kind {
        "uri" => Term::iri(value).map_err(|e| EndpointError::Malformed(e.to_string())),
        "bnode" => Ok(Term::blank(value)),
        "literal" | "typed-literal" => {
            let lit = if let Some(lang) = b.get("xml:lang").and_then(|v| v.as_str()) {
                Literal::lang(value, lang)
            } else if let Some(dt) = b.get("datatype").and_then(|v| v.as_str()) {
                Literal::typed(value, dt)
            } else {
                Literal::simple(value)
            };
            Ok(Term::literal(lit))
        }
        other => Err(EndpointError::Malformed(format!("unknown binding type {other:?}"))),
    }
}

/// Parse a SPARQL JSON result set with `s`, `p`, `o` variables.
pub fn parse_spo_results(body: &str) -> Result<Vec<Triple>, EndpointError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| EndpointError::Malformed(e.to_string()))?;
    let rows = v
        .get("results")
        .and_then(|r| r.get("bindings"))
        .and_then(|b| b.as_array())
        .ok_or_else(|| EndpointError::Malformed("missing results.bindings".into()))?;
    rows.iter()
        .map(|row| {
            let get = |k: &str| {
                row.get(k)
                    .ok_or_else(|| EndpointError::Malformed(format!("row without ?{k}")))
                    .and_then(binding_term)
            };
            Triple::new(get("s")?, get("p")?, get("o")?).map_err(|e| EndpointError::Malformed(e.to_string()))
        })
        .collect()
}

/// Page through the endpoint with an ordered query until `max_triples` are
/// collected or a short page signals the end.
pub fn snapshot_from_endpoint(
    config: &EndpointConfig,
    sample: SampleSpec,
    stats: &StatsConfig,
) -> Result<GraphSnapshot, EndpointError> {
    let endpoint = config.sparql_endpoint.as_deref().ok_or(EndpointError::NotConfigured)?;
    if sample.page_size == 0 {
        return Err(EndpointError::InvalidSpec("page_size must be positive"));
    }
    let client = HttpClient::with_headers(config.headers.clone());
    let mut triples: Vec<Triple> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut offset = 0;
    while triples.len() < sample.max_triples {
        let limit = sample.page_size.min(sample.max_triples - triples.len());
        let url = reqwest::Url::parse_with_params(endpoint, &[("query", page_query(limit, offset))])
            .map_err(|e| EndpointError::Network(e.to_string()))?;
        let url = url.to_string();
        let resp = client.fetch_following(
            &FetchRequest::get(&url, config.timeout()).accept("application/sparql-results+json"),
        )?;
        let resp = resp.0;
        if !(200..300).contains(&resp.status) {
            return Err(EndpointError::Status(resp.status));
        }
        let page = parse_spo_results(&resp.body)?;
        let fetched = page.len();
        if fetched == 0 {
            break;
        }
        let before = triples.len();
        for t in page {
            if triples.len() >= sample.max_triples {
                break;
            }
            if seen.insert(t.clone()) {
                triples.push(t);
            }
        }
        if triples.len() == before {
            return Err(EndpointError::NoProgress(offset));
        }
        offset += fetched;
        if fetched < limit {
            break;
        }
    }
    let source = SnapshotSource::Endpoint {
        url: endpoint.to_string(),
        query_template: QUERY_TEMPLATE.to_string(),
        page_size: sample.page_size,
        retrieved_at: Utc::now(),
    };
    Ok(GraphSnapshot::new(config.kg_id.clone(), triples, source, stats))
}
