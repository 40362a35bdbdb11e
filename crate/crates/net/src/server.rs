//! Publishing a directory of content dictionaries over HTTP.

use std::collections::BTreeMap;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;

use log::{debug, error, info, warn};
use omld_core::cd::{parse_cd_xml, serialize_cd_xml, CdError, ContentDictionary, RDFS_SEE_ALSO};
use omld_core::om::{is_ncname, OPENMATH_MIME};
use omld_core::rdf::{serialize_turtle, Iri};
use thiserror::Error;

use crate::conneg::negotiate;
use crate::describe::{cd_to_rdf, render_cd_html};

pub const HTML_MIME: &str = "text/html";
pub const TURTLE_MIME: &str = "text/turtle";
/// Representations of a dictionary, in the server's order of preference.
pub const OFFERED: [&str; 3] = [OPENMATH_MIME, HTML_MIME, TURTLE_MIME];

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: IpAddr,
    /// 0 picks a free port.
    pub port: u16,
    pub cd_dir: PathBuf,
    /// Base for minted URIs; `http://{bound address}` when absent.
    pub base_iri: Option<Iri>,
    pub default_representation: String,
    pub link_predicates: Vec<Iri>,
    pub workers: usize,
}

impl ServerConfig {
    pub fn new(cd_dir: impl Into<PathBuf>) -> Self {
        ServerConfig {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 0,
            cd_dir: cd_dir.into(),
            base_iri: None,
            default_representation: OPENMATH_MIME.to_string(),
            link_predicates: vec![Iri::new(RDFS_SEE_ALSO).expect("rdfs:seeAlso")],
            workers: 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}: not a directory")]
    MissingDir(PathBuf),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: CdError },
    #[error("dictionary `{name}` is defined by both {first} and {second}")]
    Duplicate {
        name: String,
        first: PathBuf,
        second: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct Published {
    pub cd: ContentDictionary,
    /// The file as it is on disk; served for the XML representation.
    pub raw: String,
    pub path: PathBuf,
}

/// The dictionaries being served at one point in time.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub cds: BTreeMap<String, Published>,
}

/// Read every `*.ocd` and `*.xml` file in `dir`. Any unreadable or invalid
/// file fails the whole load.
pub fn load_dir(dir: &Path) -> Result<Snapshot, LoadError> {
    if !dir.is_dir() {
        return Err(LoadError::MissingDir(dir.to_path_buf()));
    }
    let io = |path: &Path, e: std::io::Error| LoadError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("ocd" | "xml")))
        .collect();
    paths.sort();
    let mut snapshot = Snapshot::default();
    for path in paths {
        let raw = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
        let cd = parse_cd_xml(&raw, None).map_err(|source| LoadError::Parse {
            path: path.clone(),
            source,
        })?;
        if let Some(prev) = snapshot.cds.get(&cd.name) {
            return Err(LoadError::Duplicate {
                name: cd.name.clone(),
                first: prev.path.clone(),
                second: path,
            });
        }
        snapshot.cds.insert(cd.name.clone(), Published { cd, raw, path });
    }
    Ok(snapshot)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    fn new(status: u16) -> Self {
        HttpResponse {
            status,
            headers: Vec::new(),
            body: Vec::new(),
        }
    }

    fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_string(), value.into()));
        self
    }

    fn body(self, content_type: &str, body: impl Into<Vec<u8>>) -> Self {
        let mut r = self.header("Content-Type", content_type);
        r.body = body.into();
        r
    }

    fn text(status: u16, message: &str) -> Self {
        HttpResponse::new(status).body("text/plain; charset=utf-8", format!("{message}\n"))
    }

    pub fn header_value(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

/// Everything `route` needs besides the request.
#[derive(Debug, Clone)]
pub struct Site {
    pub base: Iri,
    pub default_representation: String,
    pub link_predicates: Vec<Iri>,
}

fn content_type_for(mime: &str) -> String {
    if mime == OPENMATH_MIME {
        mime.to_string()
    } else {
        format!("{mime}; charset=utf-8")
    }
}

fn not_acceptable() -> HttpResponse {
    let mut msg = String::from("none of the requested types is available; this resource has:");
    for m in OFFERED {
        msg.push_str("\n  ");
        msg.push_str(m);
    }
    HttpResponse::text(406, &msg).header("Vary", "Accept")
}

/// Answer one request against a snapshot. `target` is the request path,
/// possibly with a query string.
pub fn route(snapshot: &Snapshot, site: &Site, method: &str, target: &str, accept: Option<&str>) -> HttpResponse {
    if method != "GET" && method != "HEAD" {
        return HttpResponse::text(405, "only GET and HEAD are supported").header("Allow", "GET, HEAD");
    }
    let path = target.split(['?', '#']).next().unwrap_or("");
    let Some(path) = path.strip_prefix('/') else {
        return HttpResponse::text(400, "request target must be a path");
    };
    let segments: Vec<&str> = path.split('/').collect();
    match segments.as_slice() {
        [""] => index(snapshot),
        [page] if page.ends_with(".xhtml") => {
            let name = &page[..page.len() - ".xhtml".len()];
            match snapshot.cds.get(name) {
                Some(p) => HttpResponse::new(200).body(
                    &content_type_for(HTML_MIME),
                    render_cd_html(&p.cd, &site.base, &site.link_predicates),
                ),
                None => HttpResponse::text(404, &format!("no dictionary `{name}`")),
            }
        }
        [name] => {
            let Some(p) = snapshot.cds.get(*name) else {
                return HttpResponse::text(404, &format!("no dictionary `{name}`"));
            };
            let Some(mime) = negotiate(accept, &OFFERED, &site.default_representation) else {
                return not_acceptable();
            };
            let r = HttpResponse::new(match mime {
                HTML_MIME => 303,
                _ => 200,
            })
            .header("Vary", "Accept");
            match mime {
                OPENMATH_MIME => r.body(OPENMATH_MIME, p.raw.clone()),
                HTML_MIME => r
                    .header("Location", format!("/{name}.xhtml"))
                    .body(&content_type_for("text/plain"), format!("See /{name}.xhtml\n")),
                _ => r.body(
                    &content_type_for(TURTLE_MIME),
                    serialize_turtle(&cd_to_rdf(&p.cd, &site.base, &site.link_predicates)),
                ),
            }
        }
        [name, symbol] if !symbol.is_empty() => {
            let Some(p) = snapshot.cds.get(*name) else {
                return HttpResponse::text(404, &format!("no dictionary `{name}`"));
            };
            let Some(single) = is_ncname(symbol).then(|| p.cd.restricted_to(symbol)).flatten() else {
                return HttpResponse::text(404, &format!("no symbol `{symbol}` in `{name}`"));
            };
            let Some(mime) = negotiate(accept, &OFFERED, &site.default_representation) else {
                return not_acceptable();
            };
            let r = HttpResponse::new(match mime {
                HTML_MIME => 303,
                _ => 200,
            })
            .header("Vary", "Accept");
            match mime {
                OPENMATH_MIME => r.body(OPENMATH_MIME, serialize_cd_xml(&single)),
                HTML_MIME => r
                    .header("Location", format!("/{name}.xhtml#{symbol}"))
                    .body(&content_type_for("text/plain"), format!("See /{name}.xhtml#{symbol}\n")),
                _ => r.body(
                    &content_type_for(TURTLE_MIME),
                    serialize_turtle(&cd_to_rdf(&single, &site.base, &site.link_predicates)),
                ),
            }
        }
        _ => HttpResponse::text(404, "not found"),
    }
}

fn index(snapshot: &Snapshot) -> HttpResponse {
    use omld_core::xml::escape_text;
    let mut html = String::from(
        "<!DOCTYPE html>\n<html xmlns=\"http://www.w3.org/1999/xhtml\" lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n\
         <title>Content dictionaries</title>\n</head>\n<body>\n<h1>Content dictionaries</h1>\n<ul>\n",
    );
    for (name, p) in &snapshot.cds {
        html.push_str(&format!(
            "<li><a href=\"/{0}\">{0}</a>: {1}</li>\n",
            escape_text(name),
            escape_text(p.cd.description.trim())
        ));
    }
    html.push_str("</ul>\n</body>\n</html>\n");
    HttpResponse::new(200).body(&content_type_for(HTML_MIME), html)
}

/// Shared state of a running server. Requests read the current snapshot;
/// `reload` swaps in a new one.
pub struct ServerState {
    pub cd_dir: PathBuf,
    pub site: Site,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl ServerState {
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    /// Re-read the directory. On failure the old snapshot stays in place.
    pub fn reload(&self) -> Result<usize, LoadError> {
        let fresh = load_dir(&self.cd_dir)?;
        let n = fresh.cds.len();
        *self.snapshot.write().expect("snapshot lock") = Arc::new(fresh);
        info!("reloaded {n} dictionaries from {}", self.cd_dir.display());
        Ok(n)
    }

    pub fn handle(&self, method: &str, target: &str, accept: Option<&str>) -> HttpResponse {
        route(&self.snapshot(), &self.site, method, target, accept)
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("cannot listen on {addr}: {message}")]
    Bind { addr: SocketAddr, message: String },
    #[error("invalid base IRI: {0}")]
    BaseIri(String),
}

pub struct RunningServer {
    addr: SocketAddr,
    http: Arc<tiny_http::Server>,
    state: Arc<ServerState>,
    stopping: Arc<AtomicBool>,
    workers: Vec<JoinHandle<()>>,
}

impl RunningServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://host:port`
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn state(&self) -> Arc<ServerState> {
        self.state.clone()
    }

    /// Block until the server is shut down from another thread.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }

    /// Stop accepting requests and wait for the workers.
    pub fn shutdown(mut self) {
        self.stop();
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }

    /// A handle that can stop the server from another thread.
    pub fn stopper(&self) -> Stopper {
        Stopper {
            http: self.http.clone(),
            stopping: self.stopping.clone(),
            workers: self.workers.len(),
        }
    }

    fn stop(&self) {
        self.stopper().stop();
    }
}

#[derive(Clone)]
pub struct Stopper {
    http: Arc<tiny_http::Server>,
    stopping: Arc<AtomicBool>,
    workers: usize,
}

impl Stopper {
    pub fn stop(&self) {
        self.stopping.store(true, Ordering::SeqCst);
        for _ in 0..self.workers {
            self.http.unblock();
        }
    }
}

fn respond(state: &ServerState, request: tiny_http::Request) {
    let method = request.method().as_str().to_string();
    let target = request.url().to_string();
    let accept = request
        .headers()
        .iter()
        .find(|h| h.field.equiv("Accept"))
        .map(|h| h.value.as_str().to_string());
    let r = state.handle(&method, &target, accept.as_deref());
    debug!("{method} {target} -> {}", r.status);
    let mut response = tiny_http::Response::from_data(r.body).with_status_code(r.status);
    for (k, v) in r.headers {
        match tiny_http::Header::from_bytes(k.as_bytes(), v.as_bytes()) {
            Ok(h) => response.add_header(h),
            Err(()) => warn!("dropping unencodable header {k}"),
        }
    }
    if let Err(e) = request.respond(response) {
        debug!("client went away: {e}");
    }
}

/// Load the dictionaries, bind, and serve on background threads.
pub fn start(config: ServerConfig) -> Result<RunningServer, ServeError> {
    let snapshot = load_dir(&config.cd_dir)?;
    let requested = SocketAddr::new(config.bind, config.port);
    let http = tiny_http::Server::http(requested).map_err(|e| ServeError::Bind {
        addr: requested,
        message: e.to_string(),
    })?;
    let addr = http.server_addr().to_ip().unwrap_or(requested);
    let base = match config.base_iri {
        Some(b) => b,
        None => Iri::new(format!("http://{addr}")).map_err(|e| ServeError::BaseIri(e.to_string()))?,
    };
    if base.as_str().ends_with('#') {
        return Err(ServeError::BaseIri(format!("{base} ends with `#`")));
    }
    let state = Arc::new(ServerState {
        cd_dir: config.cd_dir,
        site: Site {
            base,
            default_representation: config.default_representation,
            link_predicates: config.link_predicates,
        },
        snapshot: RwLock::new(Arc::new(snapshot)),
    });
    let http = Arc::new(http);
    let stopping = Arc::new(AtomicBool::new(false));
    let workers = (0..config.workers.max(1))
        .map(|_| {
            let (http, state, stopping) = (http.clone(), state.clone(), stopping.clone());
            std::thread::spawn(move || loop {
                match http.recv() {
                    Ok(rq) => respond(&state, rq),
                    Err(_) if stopping.load(Ordering::SeqCst) => break,
                    Err(e) => error!("accept failed: {e}"),
                }
            })
        })
        .collect();
    info!("serving {} dictionaries on http://{addr}", state.snapshot().cds.len());
    Ok(RunningServer {
        addr,
        http,
        state,
        stopping,
        workers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const STATS: &str = r#"<CD><CDName>statistics</CDName><CDBase>http://example.org</CDBase><Description>stats</Description>
<CDDefinition><Name>hdi</Name><Description>human development index</Description></CDDefinition>
<CDDefinition><Name>mean</Name><Description>average</Description></CDDefinition></CD>"#;

    fn snapshot() -> Snapshot {
        let cd = parse_cd_xml(STATS, None).unwrap();
        let mut s = Snapshot::default();
        s.cds.insert(
            cd.name.clone(),
            Published {
                cd,
                raw: STATS.to_string(),
                path: PathBuf::from("statistics.ocd"),
            },
        );
        s
    }

    fn site() -> Site {
        Site {
            base: Iri::new("http://localhost:8080").unwrap(),
            default_representation: OPENMATH_MIME.into(),
            link_predicates: vec![],
        }
    }

    fn get(path: &str, accept: Option<&str>) -> HttpResponse {
        route(&snapshot(), &site(), "GET", path, accept)
    }

    #[test]
    fn xml_is_the_file_on_disk() {
        let r = get("/statistics", Some(OPENMATH_MIME));
        assert_eq!(r.status, 200);
        assert_eq!(r.header_value("content-type"), Some(OPENMATH_MIME));
        assert_eq!(r.body, STATS.as_bytes());
        assert_eq!(r.header_value("vary"), Some("Accept"));
    }

    #[test]
    fn html_redirects() {
        let r = get("/statistics", Some("text/html"));
        assert_eq!(r.status, 303);
        assert_eq!(r.header_value("location"), Some("/statistics.xhtml"));
        let page = get("/statistics.xhtml", None);
        assert_eq!(page.status, 200);
        assert!(String::from_utf8(page.body).unwrap().contains(r#"id="hdi""#));
        let r = get("/statistics/hdi", Some("text/html"));
        assert_eq!(r.header_value("location"), Some("/statistics.xhtml#hdi"));
    }

    #[test]
    fn turtle_describes() {
        let r = get("/statistics", Some("text/turtle"));
        assert_eq!(r.status, 200);
        assert_eq!(r.header_value("content-type"), Some("text/turtle; charset=utf-8"));
        let text = String::from_utf8(r.body).unwrap();
        let g = omld_core::rdf::parse_turtle(&text, &site().base).unwrap();
        assert_eq!(g.len(), 3 + 2 * 5);
    }

    #[test]
    fn per_symbol_document() {
        let r = get("/statistics/hdi", Some(OPENMATH_MIME));
        assert_eq!(r.status, 200);
        let cd = parse_cd_xml(std::str::from_utf8(&r.body).unwrap(), None).unwrap();
        assert_eq!(cd.definitions.len(), 1);
        assert_eq!(cd.definitions[0].name, "hdi");
        assert_eq!(get("/statistics/nosuch", None).status, 404);
    }

    #[test]
    fn errors() {
        assert_eq!(get("/nosuch", None).status, 404);
        assert_eq!(get("/nosuch.xhtml", None).status, 404);
        assert_eq!(get("/a/b/c", None).status, 404);
        let r = get("/statistics", Some("image/png"));
        assert_eq!(r.status, 406);
        assert!(String::from_utf8(r.body).unwrap().contains("text/turtle"));
        let r = route(&snapshot(), &site(), "POST", "/statistics", None);
        assert_eq!(r.status, 405);
        assert_eq!(r.header_value("allow"), Some("GET, HEAD"));
    }

    #[test]
    fn negotiated_type_matches_content_type() {
        for mime in OFFERED {
            for path in ["/statistics", "/statistics/hdi"] {
                let r = get(path, Some(mime));
                if mime == HTML_MIME {
                    assert_eq!(r.status, 303);
                } else {
                    assert_eq!(crate::conneg::media_type(r.header_value("content-type").unwrap()), mime);
                }
            }
        }
    }
}
