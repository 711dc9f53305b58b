//! Scripted HTTP server for deterministic probe tests.
//!
//! A script maps `(method, path, accept)` to a response sequence. The n-th
//! matching request receives the n-th response; the last one repeats.
//!
//! ```json
//! {"routes": [
//!   {"method": "GET", "path": "/sparql", "accept": "application/sparql-results+json",
//!    "responses": [{"status": 200, "content_type": "application/sparql-results+json",
//!                   "body": "{\"boolean\": true}", "delay_ms": 0}]}
//! ]}
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockResponse {
    pub status: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_type: Option<String>,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub delay_ms: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRoute {
    pub method: String,
    pub path: String,
    /// Exact Accept header to match; any when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept: Option<String>,
    /// Substring the decoded query string must contain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<MockResponse>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub responses: Vec<MockResponse>,
}

impl MockRoute {
    fn sequence(&self) -> Vec<MockResponse> {
        let mut seq: Vec<MockResponse> = self.response.iter().cloned().collect();
        seq.extend(self.responses.iter().cloned());
        seq
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockScript {
    pub routes: Vec<MockRoute>,
}

impl MockScript {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    pub query: String,
    pub accept: Option<String>,
}

struct Shared {
    routes: Vec<(MockRoute, Vec<MockResponse>)>,
    counters: Mutex<Vec<usize>>,
    log: Mutex<Vec<RecordedRequest>>,
}

pub struct MockServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => out.push(b' '),
            b'%' if i + 2 < bytes.len()
                && bytes[i + 1].is_ascii_hexdigit()
                && bytes[i + 2].is_ascii_hexdigit() =>
            {
                let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).expect("ascii hex digits");
                out.push(u8::from_str_radix(hex, 16).expect("validated hex"));
                i += 2;
            }
            b => out.push(b),
        }
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn reason_phrase(status: u16) -> &'static str {
    match status {
        200 => "OK",
        201 => "Created",
        202 => "Accepted",
        204 => "No Content",
        206 => "Partial Content",
        301 => "Moved Permanently",
        302 => "Found",
        303 => "See Other",
        307 => "Temporary Redirect",
        308 => "Permanent Redirect",
        400 => "Bad Request",
        404 => "Not Found",
        405 => "Method Not Allowed",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    }
}

impl Shared {
    fn respond(&self, req: &RecordedRequest) -> MockResponse {
        self.log.lock().unwrap().push(req.clone());
        let decoded_query = percent_decode(&req.query);
        for (idx, (route, seq)) in self.routes.iter().enumerate() {
            let method_ok = route.method.eq_ignore_ascii_case(&req.method)
                || (req.method == "HEAD" && route.method.eq_ignore_ascii_case("GET") && !self.has_head_route(&req.path));
            if !method_ok || route.path != req.path {
                continue;
            }
            if let Some(accept) = &route.accept {
                if req.accept.as_deref().map(str::trim) != Some(accept.trim()) {
                    continue;
                }
            }
            if let Some(needle) = &route.query_contains {
                if !decoded_query.contains(needle.as_str()) {
                    continue;
                }
            }
            if seq.is_empty() {
                break;
            }
            let mut counters = self.counters.lock().unwrap();
            let n = counters[idx];
            counters[idx] += 1;
            return seq[n.min(seq.len() - 1)].clone();
        }
        MockResponse {
            status: 404,
            content_type: Some("text/plain".into()),
            body: "no scripted route".into(),
            delay_ms: 0,
            headers: BTreeMap::new(),
        }
    }

    fn has_head_route(&self, path: &str) -> bool {
        self.routes
            .iter()
            .any(|(r, _)| r.path == path && r.method.eq_ignore_ascii_case("HEAD"))
    }
}

fn handle_connection(stream: TcpStream, shared: &Shared) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut parts = request_line.split_whitespace();
    let method = parts.next().unwrap_or("").to_string();
    let target = parts.next().unwrap_or("/").to_string();
    let mut accept = None;
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let name = name.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            match name.as_str() {
                "accept" => accept = Some(value),
                "content-length" => content_length = value.parse().unwrap_or(0),
                _ => {}
            }
        }
    }
    if content_length > 0 {
        let mut body = vec![0u8; content_length];
        reader.read_exact(&mut body)?;
    }
    let (path, query) = match target.split_once('?') {
        Some((p, q)) => (p.to_string(), q.to_string()),
        None => (target.clone(), String::new()),
    };
    let req = RecordedRequest {
        method: method.clone(),
        path,
        query,
        accept,
    };
    let resp = shared.respond(&req);
    if resp.delay_ms > 0 {
        std::thread::sleep(Duration::from_millis(resp.delay_ms));
    }
    let mut head = format!("HTTP/1.1 {} {}\r\n", resp.status, reason_phrase(resp.status));
    if let Some(ct) = &resp.content_type {
        head.push_str(&format!("Content-Type: {ct}\r\n"));
    }
    for (k, v) in &resp.headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str(&format!("Content-Length: {}\r\nConnection: close\r\n\r\n", resp.body.len()));
    let mut stream = stream;
    stream.write_all(head.as_bytes())?;
    if method != "HEAD" {
        stream.write_all(resp.body.as_bytes())?;
    }
    stream.flush()
}

impl MockServer {
    pub fn start(script: MockScript) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let routes: Vec<_> = script
            .routes
            .into_iter()
            .map(|r| {
                let seq = r.sequence();
                (r, seq)
            })
            .collect();
        let shared = Arc::new(Shared {
            counters: Mutex::new(vec![0; routes.len()]),
            routes,
            log: Mutex::new(Vec::new()),
        });
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let shared = Arc::clone(&shared);
            let stop = Arc::clone(&stop);
            std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    match listener.accept() {
                        Ok((stream, _)) => {
                            let _ = stream.set_nonblocking(false);
                            let shared = Arc::clone(&shared);
                            std::thread::spawn(move || {
                                let _ = handle_connection(stream, &shared);
                            });
                        }
                        Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                            std::thread::sleep(Duration::from_millis(2));
                        }
                        Err(_) => break,
                    }
                }
            })
        };
        Ok(MockServer {
            addr,
            shared,
            stop,
            handle: Some(handle),
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.shared.log.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// A loopback URL on which nothing is listening.
pub fn refused_url(path: &str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind ephemeral port");
    let addr = listener.local_addr().expect("local addr");
    drop(listener);
    format!("http://{addr}{path}")
}
