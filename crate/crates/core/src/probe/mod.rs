//! Network-facing evidence: availability, SPARQL health, dereferencing,
//! content negotiation, dump reachability, and update support.
//!
//! Probes only issue `GET`/`HEAD` requests and read-only SPARQL forms. Every
//! failure is recorded as an [`Observation`]; nothing here aborts a run.

pub mod mock;

use std::collections::BTreeMap;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::http::{FetchFailure, FetchRequest, FetchResponse, HttpClient, RetryBudget};
use crate::rational::Rational;

pub const DEFAULT_ACCEPT_TYPES: [&str; 3] = ["text/turtle", "application/n-triples", "application/rdf+xml"];

/// Media types counted as standard RDF serializations.
pub const RDF_MEDIA_TYPES: [&str; 8] = [
    "text/turtle",
    "application/n-triples",
    "application/rdf+xml",
    "application/ld+json",
    "application/n-quads",
    "application/trig",
    "text/n3",
    "application/x-turtle",
];

const DEREFERENCE_ACCEPT: &str =
    "text/turtle, application/n-triples;q=0.9, application/rdf+xml;q=0.8, application/ld+json;q=0.7";
const SPARQL_JSON: &str = "application/sparql-results+json";

pub fn is_rdf_media_type(essence: &str) -> bool {
    RDF_MEDIA_TYPES.contains(&essence)
}

fn default_accept_types() -> Vec<String> {
    DEFAULT_ACCEPT_TYPES.iter().map(|s| s.to_string()).collect()
}

fn default_timeout_ms() -> u64 {
    5_000
}

fn default_retries() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub kg_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparql_endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_url: Option<String>,
    #[serde(default)]
    pub sample_entity_iris: Vec<String>,
    #[serde(default = "default_accept_types")]
    pub accept_types: Vec<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supports_update_declared: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit_interface_declared: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub license_iri_declared: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature_url_declared: Option<String>,
    /// Static headers injected into every probe request.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("endpoint config for {0:?} names no SPARQL endpoint, dump URL, or sample IRI")]
    NoTargets(String),
    #[error("endpoint config for {0:?} has a zero timeout")]
    ZeroTimeout(String),
}

impl EndpointConfig {
    pub fn new(kg_id: impl Into<String>) -> Self {
        EndpointConfig {
            kg_id: kg_id.into(),
            sparql_endpoint: None,
            dump_url: None,
            sample_entity_iris: Vec::new(),
            accept_types: default_accept_types(),
            timeout_ms: default_timeout_ms(),
            retries: default_retries(),
            supports_update_declared: None,
            edit_interface_declared: None,
            license_iri_declared: None,
            signature_url_declared: None,
            headers: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sparql_endpoint.is_none() && self.dump_url.is_none() && self.sample_entity_iris.is_empty() {
            return Err(ConfigError::NoTargets(self.kg_id.clone()));
        }
        if self.timeout_ms == 0 {
            return Err(ConfigError::ZeroTimeout(self.kg_id.clone()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Availability,
    Sparql,
    Dereference,
    ContentNegotiation,
    Dump,
    Update,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
    /// Nothing configured to probe.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub probe: ProbeKind,
    pub target: String,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_type: Option<String>,
    pub latency_ms: u64,
    pub attempts: u32,
}

impl Observation {
    fn skipped(probe: ProbeKind, reason: &str) -> Self {
        Observation {
            probe,
            target: String::new(),
            outcome: Outcome::Skipped,
            status: None,
            reason: Some(reason.to_string()),
            accept: None,
            content_type: None,
            latency_ms: 0,
            attempts: 0,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::Success
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub kg_id: String,
    pub probed_at: DateTime<Utc>,
    pub available: bool,
    pub sparql_ok: bool,
    /// `None` when no sample IRI was probed.
    pub dereference_success_fraction: Option<Rational>,
    /// `None` when no content negotiation probe ran.
    pub conneg_success_fraction: Option<Rational>,
    pub dump_reachable: bool,
    pub update_supported: bool,
    /// Median over successful probes; `None` without any success.
    pub median_latency_ms: Option<u64>,
    pub raw_observations: Vec<Observation>,
}

impl ProbeReport {
    /// True when any successful dereference, negotiation or dump response
    /// carried a standard RDF media type.
    pub fn rdf_serialization_available(&self) -> bool {
        self.raw_observations.iter().any(|o| {
            o.succeeded()
                && matches!(
                    o.probe,
                    ProbeKind::ContentNegotiation | ProbeKind::Dereference | ProbeKind::Dump
                )
                && o.content_type.as_deref().is_some_and(is_rdf_media_type)
        })
    }

    /// Copy with timing-dependent fields cleared, for determinism checks.
    pub fn without_timing(&self) -> ProbeReport {
        let mut r = self.clone();
        r.probed_at = DateTime::<Utc>::UNIX_EPOCH;
        r.median_latency_ms = None;
        for o in &mut r.raw_observations {
            o.latency_ms = 0;
        }
        r
    }
}

fn median(mut values: Vec<u64>) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2
    })
}

fn fraction(observations: &[Observation], kind: ProbeKind) -> Option<Rational> {
    let probed: Vec<_> = observations
        .iter()
        .filter(|o| o.probe == kind && o.outcome != Outcome::Skipped)
        .collect();
    if probed.is_empty() {
        return None;
    }
    let ok = probed.iter().filter(|o| o.succeeded()).count();
    Some(Rational::ratio(ok, probed.len()))
}

/// Summarize one probing session. Every summary field derives from the
/// observations alone.
pub fn assemble_report(kg_id: &str, observations: Vec<Observation>) -> ProbeReport {
    let any = |kind: ProbeKind| observations.iter().any(|o| o.probe == kind && o.succeeded());
    ProbeReport {
        kg_id: kg_id.to_string(),
        probed_at: Utc::now(),
        available: any(ProbeKind::Availability),
        sparql_ok: any(ProbeKind::Sparql),
        dereference_success_fraction: fraction(&observations, ProbeKind::Dereference),
        conneg_success_fraction: fraction(&observations, ProbeKind::ContentNegotiation),
        dump_reachable: any(ProbeKind::Dump),
        update_supported: any(ProbeKind::Update),
        median_latency_ms: median(
            observations
                .iter()
                .filter(|o| o.succeeded())
                .map(|o| o.latency_ms)
                .collect(),
        ),
        raw_observations: observations,
    }
}

/// Issues probes for one endpoint configuration.
pub struct Prober<'a> {
    config: &'a EndpointConfig,
    client: HttpClient,
}

struct Attempted {
    result: Result<FetchResponse, FetchFailure>,
    attempts: u32,
    elapsed_ms: u64,
    /// Statuses of every hop when redirects were followed.
    hops: Vec<u16>,
}

fn retryable(result: &Result<FetchResponse, FetchFailure>) -> bool {
    match result {
        Ok(resp) => resp.status >= 500,
        Err(FetchFailure::InvalidUrl(_)) => false,
        Err(_) => true,
    }
}

fn status_reason(status: u16) -> String {
    format!("http-status-{status}")
}

fn success_status(status: u16) -> bool {
    (200..300).contains(&status)
}

impl<'a> Prober<'a> {
    pub fn new(config: &'a EndpointConfig) -> Self {
        Prober {
            config,
            client: HttpClient::with_headers(config.headers.clone()),
        }
    }

    fn budget(&self) -> RetryBudget {
        RetryBudget::new(self.config.timeout(), self.config.retries)
    }

    fn attempt(&self, req: FetchRequest<'_>, follow: bool) -> Attempted {
        self.attempt_in(req, follow, &mut self.budget())
    }

    /// Retries `req` while the shared budget allows.
    fn attempt_in(&self, req: FetchRequest<'_>, follow: bool, budget: &mut RetryBudget) -> Attempted {
        let started = std::time::Instant::now();
        let first = budget.attempts();
        let mut last: Result<FetchResponse, FetchFailure> = Err(FetchFailure::Timeout);
        let mut hops = Vec::new();
        while let Some(timeout) = budget.next_attempt() {
            let r = FetchRequest { timeout, ..req.clone() };
            last = if follow {
                self.client.fetch_following(&r).map(|(resp, h)| {
                    hops = h.iter().map(|h| h.status).collect();
                    resp
                })
            } else {
                self.client.fetch(&r).inspect(|resp| hops = vec![resp.status])
            };
            if !retryable(&last) {
                break;
            }
        }
        Attempted {
            result: last,
            attempts: budget.attempts() - first,
            elapsed_ms: started.elapsed().as_millis() as u64,
            hops,
        }
    }

    fn observe(&self, probe: ProbeKind, target: &str, accept: Option<&str>, a: &Attempted, ok: bool, reason: Option<String>) -> Observation {
        let (status, content_type, latency) = match &a.result {
            Ok(resp) => (Some(resp.status), resp.content_type.clone(), resp.latency.as_millis() as u64),
            Err(_) => (None, None, a.elapsed_ms),
        };
        let reason = reason.or_else(|| match &a.result {
            Err(f) => Some(f.reason()),
            Ok(resp) if !ok => Some(status_reason(resp.status)),
            Ok(_) => None,
        });
        Observation {
            probe,
            target: target.to_string(),
            outcome: if ok { Outcome::Success } else { Outcome::Failure },
            status,
            reason,
            accept: accept.map(str::to_string),
            content_type,
            latency_ms: latency,
            attempts: a.attempts,
        }
    }

    /// Success when any configured URL answers 2xx (after redirects). Targets
    /// are tried in rounds that share one retry budget.
    pub fn probe_availability(&self) -> Observation {
        let mut targets: Vec<&str> = Vec::new();
        targets.extend(self.config.sparql_endpoint.as_deref());
        targets.extend(self.config.dump_url.as_deref());
        targets.extend(self.config.sample_entity_iris.iter().map(String::as_str));
        if targets.is_empty() {
            return Observation::skipped(ProbeKind::Availability, "not-configured");
        }
        let started = std::time::Instant::now();
        let mut budget = self.budget();
        let mut last: Option<(&str, Attempted)> = None;
        while let Some(timeout) = budget.next_attempt() {
            let mut retry = false;
            for target in &targets {
                let remaining = budget.remaining();
                if remaining.is_zero() {
                    break;
                }
                let req = FetchRequest::get(target, timeout.min(remaining)).accept("*/*");
                let mut hops = Vec::new();
                let result = self.client.fetch_following(&req).map(|(resp, h)| {
                    hops = h.iter().map(|h| h.status).collect();
                    resp
                });
                retry |= retryable(&result);
                let a = Attempted {
                    result,
                    attempts: budget.attempts(),
                    elapsed_ms: started.elapsed().as_millis() as u64,
                    hops,
                };
                if matches!(&a.result, Ok(r) if success_status(r.status)) {
                    return self.observe(ProbeKind::Availability, target, None, &a, true, None);
                }
                last = Some((target, a));
            }
            if !retry {
                break;
            }
        }
        match last {
            Some((target, a)) => self.observe(ProbeKind::Availability, target, None, &a, false, None),
            None => {
                let mut obs = Observation::skipped(ProbeKind::Availability, "timeout");
                obs.outcome = Outcome::Failure;
                obs.target = targets[0].to_string();
                obs
            }
        }
    }

    /// `ASK {}` must come back as a well-formed SPARQL JSON result.
    pub fn probe_sparql(&self) -> Observation {
        let Some(endpoint) = self.config.sparql_endpoint.as_deref() else {
            return Observation::skipped(ProbeKind::Sparql, "not-configured");
        };
        let url = match reqwest::Url::parse_with_params(endpoint, &[("query", "ASK {}")]) {
            Ok(u) => u.to_string(),
            Err(_) => {
                let mut obs = Observation::skipped(ProbeKind::Sparql, "invalid-url");
                obs.outcome = Outcome::Failure;
                obs.target = endpoint.to_string();
                return obs;
            }
        };
        let a = self.attempt(FetchRequest::get(&url, self.config.timeout()).accept(SPARQL_JSON), true);
        let (ok, reason) = match &a.result {
            Ok(resp) if success_status(resp.status) => {
                if well_formed_sparql_json(&resp.body) {
                    (true, None)
                } else {
                    (false, Some("malformed-result".to_string()))
                }
            }
            _ => (false, None),
        };
        self.observe(ProbeKind::Sparql, endpoint, Some(SPARQL_JSON), &a, ok, reason)
    }

    /// One observation per sample IRI. Success is a 2xx with an RDF media type,
    /// or any `303 See Other` along the redirect chain.
    pub fn probe_dereference(&self) -> Vec<Observation> {
        self.config
            .sample_entity_iris
            .iter()
            .map(|iri| {
                let a = self.attempt(
                    FetchRequest::get(iri, self.config.timeout()).accept(DEREFERENCE_ACCEPT),
                    true,
                );
                let ok = match &a.result {
                    Ok(resp) => {
                        a.hops.contains(&303)
                            || (success_status(resp.status)
                                && resp.content_type.as_deref().is_some_and(is_rdf_media_type))
                    }
                    Err(_) => false,
                };
                let reason = match &a.result {
                    Ok(resp) if !ok && success_status(resp.status) => Some("non-rdf-media-type".to_string()),
                    _ => None,
                };
                self.observe(ProbeKind::Dereference, iri, Some(DEREFERENCE_ACCEPT), &a, ok, reason)
            })
            .collect()
    }

    /// One observation per tested media type; success when the response
    /// Content-Type equals the requested type.
    pub fn probe_content_negotiation(&self) -> Vec<Observation> {
        let target = match (self.config.sample_entity_iris.first(), &self.config.sparql_endpoint) {
            (Some(iri), _) => iri.clone(),
            (None, Some(endpoint)) => {
                match reqwest::Url::parse_with_params(endpoint, &[("query", "CONSTRUCT WHERE { ?s ?p ?o } LIMIT 1")]) {
                    Ok(u) => u.to_string(),
                    Err(_) => endpoint.clone(),
                }
            }
            (None, None) => return vec![Observation::skipped(ProbeKind::ContentNegotiation, "not-configured")],
        };
        if self.config.accept_types.is_empty() {
            return vec![Observation::skipped(ProbeKind::ContentNegotiation, "no-accept-types")];
        }
        self.config
            .accept_types
            .iter()
            .map(|accept| {
                let a = self.attempt(FetchRequest::get(&target, self.config.timeout()).accept(accept), true);
                let wanted = crate::http::media_type_essence(accept);
                let ok = matches!(&a.result, Ok(resp) if success_status(resp.status)
                    && resp.content_type.as_deref() == Some(wanted.as_str()));
                let reason = match &a.result {
                    Ok(resp) if !ok && success_status(resp.status) => Some("content-type-mismatch".to_string()),
                    _ => None,
                };
                self.observe(ProbeKind::ContentNegotiation, &target, Some(accept), &a, ok, reason)
            })
            .collect()
    }

    /// `HEAD`, falling back to a one-byte ranged `GET` when HEAD is refused.
    /// Both share one retry budget.
    pub fn probe_dump(&self) -> Observation {
        let Some(url) = self.config.dump_url.as_deref() else {
            return Observation::skipped(ProbeKind::Dump, "not-configured");
        };
        let mut budget = self.budget();
        let mut a = self.attempt_in(FetchRequest::head(url, self.config.timeout()), true, &mut budget);
        if matches!(&a.result, Ok(r) if r.status == 405 || r.status == 501) {
            budget.grant_fallback();
            let head_attempts = a.attempts;
            a = self.attempt_in(FetchRequest::get(url, self.config.timeout()).range("bytes=0-0"), true, &mut budget);
            a.attempts += head_attempts;
        }
        let ok = matches!(&a.result, Ok(r) if success_status(r.status));
        self.observe(ProbeKind::Dump, url, None, &a, ok, None)
    }

    /// Declared support wins; otherwise the endpoint's service description
    /// must advertise SPARQL 1.1 Update. No update is ever sent.
    pub fn probe_update(&self) -> Observation {
        if self.config.supports_update_declared == Some(true) {
            let mut obs = Observation::skipped(ProbeKind::Update, "declared");
            obs.outcome = Outcome::Success;
            obs.target = "config".to_string();
            return obs;
        }
        let Some(endpoint) = self.config.sparql_endpoint.as_deref() else {
            return Observation::skipped(ProbeKind::Update, "not-configured");
        };
        let a = self.attempt(FetchRequest::get(endpoint, self.config.timeout()).accept("text/turtle"), true);
        let ok = matches!(&a.result, Ok(r) if success_status(r.status) && r.body.contains("SPARQL11Update"));
        let reason = match &a.result {
            Ok(r) if success_status(r.status) && !ok => Some("update-not-advertised".to_string()),
            _ => None,
        };
        self.observe(ProbeKind::Update, endpoint, Some("text/turtle"), &a, ok, reason)
    }

    pub fn run_all(&self) -> ProbeReport {
        let mut observations = vec![self.probe_availability(), self.probe_sparql()];
        observations.extend(self.probe_dereference());
        observations.extend(self.probe_content_negotiation());
        observations.push(self.probe_dump());
        observations.push(self.probe_update());
        assemble_report(&self.config.kg_id, observations)
    }
}

/// Probe everything configured for one KG.
pub fn probe_all(config: &EndpointConfig) -> ProbeReport {
    Prober::new(config).run_all()
}

/// Either an ASK result or a SELECT result set.
pub fn well_formed_sparql_json(body: &str) -> bool {
    let Ok(v) = serde_json::from_str::<serde_json::Value>(body) else {
        return false;
    };
    if v.get("boolean").is_some_and(serde_json::Value::is_boolean) {
        return true;
    }
    v.get("head").is_some_and(serde_json::Value::is_object)
        && v.get("results")
            .and_then(|r| r.get("bindings"))
            .is_some_and(serde_json::Value::is_array)
}
