use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

/// What the resolver needs from one HTTP exchange. Redirects are not
/// followed at this level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub location: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait HttpTransport: Send + Sync {
    fn get(&self, url: &str, accept: &str) -> Result<RawResponse, TransportError>;
}

/// Largest body accepted from a server.
const BODY_LIMIT: u64 = 16 * 1024 * 1024;

/// Blocking client built on `ureq`, with redirect following turned off so
/// the resolver sees every hop.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .max_redirects(0)
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .user_agent(concat!("omld/", env!("CARGO_PKG_VERSION")))
            .build();
        UreqTransport {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        UreqTransport::new(Duration::from_secs(30))
    }
}

impl HttpTransport for UreqTransport {
    fn get(&self, url: &str, accept: &str) -> Result<RawResponse, TransportError> {
        let mut resp = self
            .agent
            .get(url)
            .header("Accept", accept)
            .call()
            .map_err(|e| TransportError(e.to_string()))?;
        let header = |name: &str| {
            resp.headers()
                .get(name)
                .and_then(|v| v.to_str().ok())
                .map(str::to_string)
        };
        let content_type = header("content-type");
        let location = header("location");
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_vec()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(RawResponse {
            status,
            content_type,
            location,
            body,
        })
    }
}

/// Wraps a transport and records every request it passes on.
pub struct CountingTransport<T> {
    inner: T,
    log: Mutex<Vec<(String, String)>>,
}

impl<T: HttpTransport> CountingTransport<T> {
    pub fn new(inner: T) -> Self {
        CountingTransport {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn count(&self) -> usize {
        self.log.lock().expect("request log").len()
    }

    /// `(url, accept)` pairs in the order they were sent.
    pub fn requests(&self) -> Vec<(String, String)> {
        self.log.lock().expect("request log").clone()
    }

    pub fn reset(&self) {
        self.log.lock().expect("request log").clear();
    }
}

impl<T: HttpTransport> HttpTransport for CountingTransport<T> {
    fn get(&self, url: &str, accept: &str) -> Result<RawResponse, TransportError> {
        self.log
            .lock()
            .expect("request log")
            .push((url.to_string(), accept.to_string()));
        self.inner.get(url, accept)
    }
}

impl<T: HttpTransport + ?Sized> HttpTransport for std::sync::Arc<T> {
    fn get(&self, url: &str, accept: &str) -> Result<RawResponse, TransportError> {
        (**self).get(url, accept)
    }
}
