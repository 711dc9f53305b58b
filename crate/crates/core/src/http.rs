//! Blocking HTTP client used by probes and endpoint sampling.
//!
//! Redirects are followed by hand so that every hop is observable.

use std::collections::BTreeMap;
use std::error::Error as _;
use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use reqwest::header::{ACCEPT, CONTENT_TYPE, LOCATION, RANGE};
use reqwest::redirect::Policy;
use reqwest::{Method, Url};

pub const USER_AGENT: &str = concat!("kgqa-probe/", env!("CARGO_PKG_VERSION"), " (knowledge graph quality assessment)");
pub const MAX_REDIRECTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchFailure {
    Timeout,
    ConnectionRefused,
    InvalidUrl(String),
    Network(String),
    TooManyRedirects,
}

impl FetchFailure {
    /// Short machine-readable reason used in observations.
    pub fn reason(&self) -> String {
        match self {
            FetchFailure::Timeout => "timeout".into(),
            FetchFailure::ConnectionRefused => "connection-refused".into(),
            FetchFailure::InvalidUrl(_) => "invalid-url".into(),
            FetchFailure::Network(_) => "network-error".into(),
            FetchFailure::TooManyRedirects => "too-many-redirects".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FetchResponse {
    pub status: u16,
    /// Lower-cased media type without parameters.
    pub content_type: Option<String>,
    pub location: Option<String>,
    pub body: String,
    pub latency: Duration,
}

#[derive(Debug, Clone)]
pub struct FetchRequest<'a> {
    pub method: Method,
    pub url: &'a str,
    pub accept: Option<&'a str>,
    pub range: Option<&'a str>,
    pub timeout: Duration,
}

impl<'a> FetchRequest<'a> {
    pub fn get(url: &'a str, timeout: Duration) -> Self {
        FetchRequest {
            method: Method::GET,
            url,
            accept: None,
            range: None,
            timeout,
        }
    }

    pub fn head(url: &'a str, timeout: Duration) -> Self {
        FetchRequest {
            method: Method::HEAD,
            ..FetchRequest::get(url, timeout)
        }
    }

    pub fn accept(mut self, accept: &'a str) -> Self {
        self.accept = Some(accept);
        self
    }

    pub fn range(mut self, range: &'a str) -> Self {
        self.range = Some(range);
        self
    }
}

/// One hop of a redirect chain.
#[derive(Debug, Clone)]
pub struct Hop {
    pub url: String,
    pub status: u16,
}

#[derive(Clone)]
pub struct HttpClient {
    client: Client,
    headers: BTreeMap<String, String>,
}

pub fn media_type_essence(value: &str) -> String {
    value.split(';').next().unwrap_or("").trim().to_ascii_lowercase()
}

fn classify(err: reqwest::Error) -> FetchFailure {
    if err.is_timeout() {
        return FetchFailure::Timeout;
    }
    let mut source = err.source();
    while let Some(s) = source {
        if let Some(io) = s.downcast_ref::<std::io::Error>() {
            match io.kind() {
                std::io::ErrorKind::ConnectionRefused => return FetchFailure::ConnectionRefused,
                std::io::ErrorKind::TimedOut => return FetchFailure::Timeout,
                _ => {}
            }
        }
        source = s.source();
    }
    if err.is_connect() {
        return FetchFailure::ConnectionRefused;
    }
    FetchFailure::Network(err.to_string())
}

impl HttpClient {
    pub fn new() -> Self {
        Self::with_headers(BTreeMap::new())
    }

    /// Static headers are sent with every request (e.g. an API key).
    pub fn with_headers(headers: BTreeMap<String, String>) -> Self {
        let client = Client::builder()
            .user_agent(USER_AGENT)
            .redirect(Policy::none())
            .build()
            .expect("HTTP client construction");
        HttpClient { client, headers }
    }

    /// Single request, no redirect handling.
    pub fn fetch(&self, req: &FetchRequest<'_>) -> Result<FetchResponse, FetchFailure> {
        let url = Url::parse(req.url).map_err(|e| FetchFailure::InvalidUrl(e.to_string()))?;
        let mut builder = self.client.request(req.method.clone(), url).timeout(req.timeout);
        for (k, v) in &self.headers {
            builder = builder.header(k, v);
        }
        if let Some(accept) = req.accept {
            builder = builder.header(ACCEPT, accept);
        }
        if let Some(range) = req.range {
            builder = builder.header(RANGE, range);
        }
        let started = Instant::now();
        let resp = builder.send().map_err(classify)?;
        let status = resp.status().as_u16();
        let content_type = resp
            .headers()
            .get(CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(media_type_essence);
        let location = resp
            .headers()
            .get(LOCATION)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = if req.method == Method::HEAD {
            String::new()
        } else {
            resp.text().map_err(classify)?
        };
        Ok(FetchResponse {
            status,
            content_type,
            location,
            body,
            latency: started.elapsed(),
        })
    }

    /// Follows up to [`MAX_REDIRECTS`] redirects; returns the final response and
    /// every hop visited (including the final one).
    pub fn fetch_following(&self, req: &FetchRequest<'_>) -> Result<(FetchResponse, Vec<Hop>), FetchFailure> {
        let started = Instant::now();
        let mut url = req.url.to_string();
        let mut hops = Vec::new();
        for _ in 0..=MAX_REDIRECTS {
            let remaining = req.timeout.saturating_sub(started.elapsed());
            if remaining.is_zero() {
                return Err(FetchFailure::Timeout);
            }
            let hop_req = FetchRequest {
                url: &url,
                timeout: remaining,
                ..req.clone()
            };
            let mut resp = self.fetch(&hop_req)?;
            hops.push(Hop {
                url: url.clone(),
                status: resp.status,
            });
            let redirect = matches!(resp.status, 301 | 302 | 303 | 307 | 308);
            match (redirect, &resp.location) {
                (true, Some(loc)) => {
                    let base = Url::parse(&url).map_err(|e| FetchFailure::InvalidUrl(e.to_string()))?;
                    url = base
                        .join(loc)
                        .map_err(|e| FetchFailure::InvalidUrl(e.to_string()))?
                        .to_string();
                }
                _ => {
                    resp.latency = started.elapsed();
                    return Ok((resp, hops));
                }
            }
        }
        Err(FetchFailure::TooManyRedirects)
    }
}

impl Default for HttpClient {
    fn default() -> Self {
        Self::new()
    }
}

/// Deadline-bounded retry loop with exponential backoff starting at 250 ms.
///
/// The whole loop never runs longer than `timeout * (retries + 1)`: each
/// attempt and each backoff sleep is clipped to the remaining budget.
pub struct RetryBudget {
    started: Instant,
    budget: Duration,
    per_attempt: Duration,
    max_attempts: u32,
    attempts: u32,
    backoff: Duration,
    skip_pause: bool,
}

pub const INITIAL_BACKOFF: Duration = Duration::from_millis(250);

impl RetryBudget {
    pub fn new(timeout: Duration, retries: u32) -> Self {
        RetryBudget {
            started: Instant::now(),
            budget: timeout * (retries + 1),
            per_attempt: timeout,
            max_attempts: retries + 1,
            attempts: 0,
            backoff: INITIAL_BACKOFF,
            skip_pause: false,
        }
    }

    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    pub fn remaining(&self) -> Duration {
        self.budget.saturating_sub(self.started.elapsed())
    }

    /// Grant one extra attempt that starts without a backoff pause, still
    /// inside the original deadline. Used for protocol fallbacks.
    pub fn grant_fallback(&mut self) {
        self.max_attempts += 1;
        self.skip_pause = true;
    }

    /// Timeout for the next attempt, or `None` when attempts or time ran out.
    /// Sleeps the backoff interval before every attempt but the first.
    pub fn next_attempt(&mut self) -> Option<Duration> {
        if self.attempts >= self.max_attempts {
            return None;
        }
        if self.attempts > 0 && !std::mem::take(&mut self.skip_pause) {
            let pause = self.backoff.min(self.remaining().saturating_sub(Duration::from_millis(1)));
            std::thread::sleep(pause);
            self.backoff *= 2;
        }
        let remaining = self.remaining();
        if remaining.is_zero() {
            return None;
        }
        self.attempts += 1;
        Some(self.per_attempt.min(remaining))
    }
}
