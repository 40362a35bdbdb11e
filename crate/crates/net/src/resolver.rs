//! Dereferencing symbol and dictionary URIs over HTTP.

use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::time::{Duration, Instant, SystemTime};

use log::{debug, warn};
use omld_core::cd::{parse_cd_xml, ContentDictionary, SymbolDefinition};
use omld_core::om::{SymbolUri, UriScheme, OPENMATH_MIME};
use omld_core::rdf::Iri;
use omld_core::rewrite::CdSource;
use thiserror::Error;
use url::Url;

use crate::conneg::{accept_header, media_type};
use crate::transport::{HttpTransport, TransportError, UreqTransport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("{url}: HTTP status {status}")]
    Status { url: String, status: u16 },
    #[error("{url}: {source}")]
    Transport { url: String, source: TransportError },
    #[error("`{0}` is not an http(s) URL")]
    UnsupportedUrl(String),
    #[error("more than {limit} redirects: {}", .chain.join(" -> "))]
    TooManyRedirects { limit: usize, chain: Vec<String> },
    #[error("{url}: redirect without a usable Location")]
    BadRedirect { url: String },
    #[error("no symbol `{name}` in {cd}")]
    SymbolNotInCd { cd: String, name: String },
    #[error("{url}: cannot use {content_type} body: {detail}")]
    UnparseableBody {
        url: String,
        content_type: String,
        detail: String,
    },
}

impl ResolveError {
    /// A definite "there is nothing at this URL", as opposed to a failure.
    pub fn is_not_found(&self) -> bool {
        matches!(self, ResolveError::Status { status: 404 | 410, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchResult {
    pub final_url: String,
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
    /// Every URL requested, starting with the first.
    pub redirect_chain: Vec<String>,
    pub retrieved_at: SystemTime,
}

#[derive(Debug, Clone)]
pub struct ResolverConfig {
    pub max_redirects: usize,
    pub cache_ttl: Duration,
    /// `(from, to)` URL prefixes; requests for `from...` go to `to...`.
    pub mirrors: Vec<(String, String)>,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            max_redirects: 5,
            cache_ttl: Duration::from_secs(300),
            mirrors: Vec::new(),
        }
    }
}

struct CacheEntry {
    cd: Arc<ContentDictionary>,
    expires_at: Instant,
}

type Outcome = Result<Arc<ContentDictionary>, ResolveError>;

#[derive(Default)]
struct Flight {
    result: Mutex<Option<Outcome>>,
    done: Condvar,
}

/// Fetches and caches content dictionaries. Concurrent requests for the
/// same document share one HTTP exchange.
pub struct Resolver {
    transport: Arc<dyn HttpTransport>,
    config: ResolverConfig,
    cache: RwLock<HashMap<String, CacheEntry>>,
    in_flight: Mutex<HashMap<String, Arc<Flight>>>,
}

/// The URL without its fragment; also the cache key.
pub fn strip_fragment(url: &str) -> &str {
    url.split_once('#').map_or(url, |(u, _)| u)
}

impl Resolver {
    pub fn new(transport: Arc<dyn HttpTransport>, config: ResolverConfig) -> Self {
        Resolver {
            transport,
            config,
            cache: RwLock::new(HashMap::new()),
            in_flight: Mutex::new(HashMap::new()),
        }
    }

    /// A resolver using a real HTTP client.
    pub fn http(config: ResolverConfig) -> Self {
        Resolver::new(Arc::new(UreqTransport::default()), config)
    }

    pub fn config(&self) -> &ResolverConfig {
        &self.config
    }

    fn mirrored(&self, url: &str) -> String {
        for (from, to) in &self.config.mirrors {
            if let Some(rest) = url.strip_prefix(from.as_str()) {
                return format!("{to}{rest}");
            }
        }
        url.to_string()
    }

    /// GET `url` asking for `accept` types in preference order, following
    /// redirects. The fragment is never sent.
    pub fn negotiate_fetch(&self, url: &str, accept: &[&str]) -> Result<FetchResult, ResolveError> {
        let header = accept_header(accept);
        let mut current = self.mirrored(strip_fragment(url));
        let mut chain = Vec::new();
        loop {
            let parsed = Url::parse(&current).map_err(|_| ResolveError::UnsupportedUrl(current.clone()))?;
            if !matches!(parsed.scheme(), "http" | "https") || parsed.host_str().is_none() {
                return Err(ResolveError::UnsupportedUrl(current));
            }
            chain.push(current.clone());
            debug!("GET {current} (Accept: {header})");
            let resp = self.transport.get(&current, &header).map_err(|source| ResolveError::Transport {
                url: current.clone(),
                source,
            })?;
            match resp.status {
                200 => {
                    return Ok(FetchResult {
                        final_url: current,
                        status: 200,
                        content_type: resp.content_type.unwrap_or_default(),
                        body: resp.body,
                        redirect_chain: chain,
                        retrieved_at: SystemTime::now(),
                    })
                }
                301 | 302 | 303 | 307 | 308 => {
                    if chain.len() > self.config.max_redirects {
                        return Err(ResolveError::TooManyRedirects {
                            limit: self.config.max_redirects,
                            chain,
                        });
                    }
                    let next = resp
                        .location
                        .and_then(|loc| parsed.join(&loc).ok())
                        .ok_or_else(|| ResolveError::BadRedirect { url: current.clone() })?;
                    current = self.mirrored(strip_fragment(next.as_str()));
                }
                status => return Err(ResolveError::Status { url: current, status }),
            }
        }
    }

    fn cached(&self, key: &str) -> Option<Arc<ContentDictionary>> {
        let cache = self.cache.read().expect("cache lock");
        cache
            .get(key)
            .filter(|e| e.expires_at > Instant::now())
            .map(|e| e.cd.clone())
    }

    /// The dictionary at `url`, from cache when fresh.
    pub fn fetch_cd(&self, url: &str) -> Result<Arc<ContentDictionary>, ResolveError> {
        let key = strip_fragment(url).to_string();
        if let Some(cd) = self.cached(&key) {
            return Ok(cd);
        }

        let (flight, leader) = {
            let mut in_flight = self.in_flight.lock().expect("in-flight lock");
            match in_flight.get(&key) {
                Some(f) => (f.clone(), false),
                None => {
                    let f = Arc::new(Flight::default());
                    in_flight.insert(key.clone(), f.clone());
                    (f, true)
                }
            }
        };
        if !leader {
            let mut slot = flight.result.lock().expect("flight lock");
            while slot.is_none() {
                slot = flight.done.wait(slot).expect("flight lock");
            }
            return slot.clone().expect("result present");
        }

        // Another thread may have finished this key between the cache check
        // and registering the flight.
        let outcome = match self.cached(&key) {
            Some(cd) => Ok(cd),
            None => self.download_cd(&key),
        };
        if let Ok(cd) = &outcome {
            self.cache.write().expect("cache lock").insert(
                key.clone(),
                CacheEntry {
                    cd: cd.clone(),
                    expires_at: Instant::now() + self.config.cache_ttl,
                },
            );
        }
        *flight.result.lock().expect("flight lock") = Some(outcome.clone());
        flight.done.notify_all();
        self.in_flight.lock().expect("in-flight lock").remove(&key);
        outcome
    }

    fn download_cd(&self, url: &str) -> Outcome {
        let res = self.negotiate_fetch(url, &[OPENMATH_MIME])?;
        let unparseable = |detail: String| ResolveError::UnparseableBody {
            url: res.final_url.clone(),
            content_type: res.content_type.clone(),
            detail,
        };
        if media_type(&res.content_type) != OPENMATH_MIME {
            return Err(unparseable(format!("expected {OPENMATH_MIME}")));
        }
        let text = std::str::from_utf8(&res.body).map_err(|e| unparseable(e.to_string()))?;
        let source = Iri::new(url).ok();
        let cd = parse_cd_xml(text, source.as_ref()).map_err(|e| unparseable(e.to_string()))?;
        Ok(Arc::new(cd))
    }

    /// Look up the definition a symbol URI names. Hash URIs fetch the whole
    /// dictionary; slash URIs try the per-symbol document first and fall
    /// back to the dictionary when that is missing.
    pub fn dereference_symbol(&self, uri: &SymbolUri) -> Result<SymbolDefinition, ResolveError> {
        let cd_url = uri.cd_url();
        let cd = match uri.scheme {
            UriScheme::Hash => self.fetch_cd(&cd_url)?,
            UriScheme::Slash => match self.cached(&cd_url) {
                Some(cd) => cd,
                None => match self.fetch_cd(&uri.to_string()) {
                    Ok(cd) => cd,
                    Err(e) if e.is_not_found() => {
                        debug!("{uri}: no per-symbol document, fetching {cd_url}");
                        self.fetch_cd(&cd_url)?
                    }
                    Err(e) => return Err(e),
                },
            },
        };
        cd.definition(&uri.name).cloned().ok_or_else(|| ResolveError::SymbolNotInCd {
            cd: cd_url,
            name: uri.name.clone(),
        })
    }
}

impl CdSource for Resolver {
    fn fetch_cd(&self, cdbase: &str, cd: &str) -> Result<Option<ContentDictionary>, String> {
        let url = SymbolUri::hash(cdbase, cd, "x").cd_url();
        match Resolver::fetch_cd(self, &url) {
            Ok(cd) => Ok(Some((*cd).clone())),
            Err(e) if e.is_not_found() => {
                warn!("{e}");
                Ok(None)
            }
            Err(e) => Err(e.to_string()),
        }
    }
}
