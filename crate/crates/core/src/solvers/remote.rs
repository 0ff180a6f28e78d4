//! HTTP client for a remote QUBO sampler, plus a local mock server.
//!
//! Wire format (JSON over `POST`):
//!
//! ```text
//! request  {"n": 22, "linear": [..], "quadratic": [[i, j, w], ..], "num_reads": 3000}
//! response {"samples": [{"x": "0101..", "energy": -1.5, "occurrences": 12}, ..]}
//! ```
//!
//! The request carries no constant term, so reported energies exclude the
//! instance offset.

use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::exhaustive::{solve_exhaustive, ExhaustiveParams};
use super::{SampleRecord, SampleSet};
use crate::encoding::{bits_to_string, parse_bits};
use crate::error::{Error, Result};
use crate::qubo::QuboInstance;

/// Tolerance for reported versus recomputed energies.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRequest {
    pub n: usize,
    pub linear: Vec<f64>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub num_reads: usize,
}

impl SampleRequest {
    pub fn from_qubo(q: &QuboInstance, num_reads: usize) -> Self {
        Self {
            n: q.n(),
            linear: q.linear().to_vec(),
            quadratic: q.pairs().collect(),
            num_reads,
        }
    }

    /// The instance described by the request, with zero offset.
    pub fn to_qubo(&self) -> Result<QuboInstance> {
        if self.linear.len() != self.n {
            return Err(Error::MalformedResponse(format!(
                "linear has {} entries for n = {}",
                self.linear.len(),
                self.n
            )));
        }
        if let Some(&(i, j, _)) = self
            .quadratic
            .iter()
            .find(|&&(i, j, _)| i == j || i >= self.n || j >= self.n)
        {
            return Err(Error::MalformedResponse(format!("invalid coupling index ({i}, {j})")));
        }
        Ok(QuboInstance::from_parts(self.linear.clone(), self.quadratic.iter().copied(), 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSample {
    pub x: String,
    pub energy: f64,
    pub occurrences: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResponse {
    pub samples: Vec<WireSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteParams {
    pub num_reads: usize,
    /// Retries after the first failed attempt.
    pub retries: u32,
    /// First backoff delay; doubles on every retry.
    pub backoff_ms: u64,
    pub timeout_ms: u64,
}

impl Default for RemoteParams {
    fn default() -> Self {
        Self {
            num_reads: 3000,
            retries: 3,
            backoff_ms: 200,
            timeout_ms: 60_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RemoteClient {
    endpoint: String,
    params: RemoteParams,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(endpoint: impl Into<String>, params: RemoteParams) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(params.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            params,
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post_once(&self, request: &SampleRequest) -> Result<SampleResponse> {
        let mut response = self
            .agent
            .post(&self.endpoint)
            .send_json(request)
            .map_err(|e| Error::Connection {
                attempts: 1,
                message: e.to_string(),
            })?;
        let status = response.status().as_u16();
        if status >= 500 {
            return Err(Error::Connection {
                attempts: 1,
                message: format!("HTTP {status}"),
            });
        }
        if status != 200 {
            return Err(Error::MalformedResponse(format!("HTTP {status}")));
        }
        response
            .body_mut()
            .read_json::<SampleResponse>()
            .map_err(|e| Error::MalformedResponse(e.to_string()))
    }

    fn post_with_retries(&self, request: &SampleRequest) -> Result<SampleResponse> {
        let mut delay = Duration::from_millis(self.params.backoff_ms);
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.post_once(request) {
                Err(e) if e.is_retryable() && attempt <= self.params.retries => {
                    thread::sleep(delay);
                    delay *= 2;
                }
                Err(Error::Connection { message, .. }) => {
                    return Err(Error::Connection {
                        attempts: attempt,
                        message,
                    })
                }
                other => return other,
            }
        }
    }

    pub fn solve(&self, q: &QuboInstance) -> Result<SampleSet> {
        let start = Instant::now();
        let request = SampleRequest::from_qubo(q, self.params.num_reads);
        let response = self.post_with_retries(&request)?;
        let mut set = validate_response(q, &response)?;
        set.wall_time = start.elapsed();
        Ok(set)
    }
}

/// Checks every sample against `q` and returns them sorted.
pub fn validate_response(q: &QuboInstance, response: &SampleResponse) -> Result<SampleSet> {
    if response.samples.is_empty() {
        return Err(Error::MalformedResponse("no samples".into()));
    }
    let records = response
        .samples
        .iter()
        .map(|s| {
            let x = parse_bits(&s.x).map_err(|e| Error::MalformedResponse(e.to_string()))?;
            if x.len() != q.n() {
                return Err(Error::MalformedResponse(format!(
                    "sample {} has {} bits, expected {}",
                    s.x,
                    x.len(),
                    q.n()
                )));
            }
            let local = q.energy(&x);
            let reported = s.energy + q.offset();
            // Written so that NaN energies are rejected too.
            if (reported - local).abs().is_nan() || (reported - local).abs() > ENERGY_TOLERANCE {
                return Err(Error::EnergyMismatch {
                    bits: s.x.clone(),
                    reported,
                    local,
                });
            }
            Ok(SampleRecord {
                x,
                energy: local,
                occurrences: s.occurrences,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = SampleSet {
        records,
        solver_tag: "remote".into(),
        wall_time: Duration::ZERO,
    };
    set.sort();
    Ok(set)
}

pub fn solve_remote(q: &QuboInstance, endpoint: &str, p: &RemoteParams) -> Result<SampleSet> {
    RemoteClient::new(endpoint, *p).solve(q)
}

/// What the mock sampler answers.
#[derive(Debug, Clone)]
pub enum MockBehavior {
    /// Exact optimum (plus up to `keep - 1` next-lowest states).
    Exhaustive { keep: usize },
    /// Like `Exhaustive`, but every reported energy is off by `error`.
    CorruptEnergy { keep: usize, error: f64 },
    /// Like `Exhaustive`, reported from highest to lowest energy.
    Reversed { keep: usize },
    /// Answers 503 to the first `failures` requests, then behaves as `Exhaustive`.
    FailFirst { failures: usize, keep: usize },
    /// Always returns this response.
    Fixed(SampleResponse),
}

impl MockBehavior {
    fn respond(&self, request_index: usize, request: &SampleRequest) -> (u16, String) {
        let exhaustive = |keep: usize| -> Result<SampleResponse> {
            let q = request.to_qubo()?;
            let set = solve_exhaustive(&q, &ExhaustiveParams { keep })?;
            Ok(SampleResponse {
                samples: set
                    .records
                    .into_iter()
                    .map(|r| WireSample {
                        x: bits_to_string(&r.x),
                        energy: r.energy,
                        occurrences: r.occurrences,
                    })
                    .collect(),
            })
        };
        let response = match self {
            MockBehavior::Exhaustive { keep } => exhaustive(*keep),
            MockBehavior::CorruptEnergy { keep, error } => exhaustive(*keep).map(|mut r| {
                for s in &mut r.samples {
                    s.energy += error;
                }
                r
            }),
            MockBehavior::Reversed { keep } => exhaustive(*keep).map(|mut r| {
                r.samples.reverse();
                r
            }),
            MockBehavior::FailFirst { failures, keep } => {
                if request_index < *failures {
                    return (503, "{\"error\":\"unavailable\"}".into());
                }
                exhaustive(*keep)
            }
            MockBehavior::Fixed(r) => Ok(r.clone()),
        };
        match response {
            Ok(r) => (200, serde_json::to_string(&r).expect("response serializes")),
            Err(e) => (400, serde_json::json!({ "error": e.to_string() }).to_string()),
        }
    }
}

/// In-process HTTP sampler on `127.0.0.1`, stopped on drop.
pub struct MockSampler {
    url: String,
    server: Arc<tiny_http::Server>,
    requests: Arc<Mutex<Vec<String>>>,
    handle: Option<JoinHandle<()>>,
}

impl MockSampler {
    pub fn spawn(behavior: MockBehavior) -> Result<Self> {
        Self::bind("127.0.0.1:0", behavior)
    }

    pub fn bind(addr: &str, behavior: MockBehavior) -> Result<Self> {
        let server = tiny_http::Server::http(addr)
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        let server = Arc::new(server);
        let local = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| Error::Io(std::io::Error::other("mock sampler has no IP address")))?;
        let url = format!("http://{local}/sample");
        let requests = Arc::new(Mutex::new(Vec::new()));

        let handle = {
            let server = Arc::clone(&server);
            let requests = Arc::clone(&requests);
            thread::spawn(move || {
                for mut incoming in server.incoming_requests() {
                    let mut body = String::new();
                    let (status, payload) = match incoming.as_reader().read_to_string(&mut body) {
                        Err(e) => (400, serde_json::json!({ "error": e.to_string() }).to_string()),
                        Ok(_) => {
                            let index = {
                                let mut log = requests.lock().expect("request log poisoned");
                                log.push(body.clone());
                                log.len() - 1
                            };
                            match serde_json::from_str::<SampleRequest>(&body) {
                                Ok(req) => behavior.respond(index, &req),
                                Err(e) => (400, serde_json::json!({ "error": e.to_string() }).to_string()),
                            }
                        }
                    };
                    let header = tiny_http::Header::from_bytes("Content-Type", "application/json")
                        .expect("static header is valid");
                    let response = tiny_http::Response::from_string(payload)
                        .with_status_code(status)
                        .with_header(header);
                    let _ = incoming.respond(response);
                }
            })
        };

        Ok(Self {
            url,
            server,
            requests,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Raw request bodies received so far.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("request log poisoned").clone()
    }

    /// Blocks until the server thread exits (it never does on its own).
    pub fn join(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockSampler {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
