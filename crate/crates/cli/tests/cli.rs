use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStderr, Command, Output, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use omld_core::om::{parse_om_xml, OmObject};
use omld_core::rdf::{Iri, Term, TurtleParser};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(rel: &str) -> String {
    fixtures().join(rel).to_str().unwrap().to_string()
}

fn config() -> String {
    fixture("toolkit.toml")
}

fn omld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omld")).args(args).output().expect("run omld")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_consistent_dataset() {
    let o = omld(&["--config", &config(), "verify", &fixture("data/geese.ttl")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("MATCH http://example.org/data/ahs/PD100"));
}

#[test]
fn verify_tampered_dataset() {
    let o = omld(&["--config", &config(), "verify", &fixture("data/geese-tampered.ttl")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("MISMATCH http://example.org/data/ahs/PD100"));
}

#[test]
fn verify_exit_codes() {
    let o = omld(&["--config", "/nonexistent/toolkit.toml", "verify", &fixture("data/geese.ttl")]);
    assert_eq!(code(&o), 64);
    let o = omld(&["--config", &config(), "verify", "/nonexistent/data.ttl"]);
    assert_eq!(code(&o), 64);
    let o = omld(&["--config", &config(), "verify", &fixture("data/cyclic.ttl")]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("UNCOMPUTABLE"));
    let o = omld(&["--config", &config(), "verify", "--tolerance", "-1", &fixture("data/geese.ttl")]);
    assert_eq!(code(&o), 64);
    let o = omld(&["--config", &config(), "verify", "--tolerance", "0.2", &fixture("data/geese-tampered.ttl")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = omld(&["--config", &config(), "verify", &fixture("data/hdi.ttl"), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let json = std::fs::read_to_string(&out).unwrap();
    assert_eq!(json.matches("\"match\"").count(), 2, "{json}");
}

#[test]
fn usage_errors() {
    assert_eq!(code(&omld(&[])), 64);
    assert_eq!(code(&omld(&["frobnicate"])), 64);
    let help = omld(&["--help"]);
    assert_eq!(code(&help), 0);
    for cmd in ["verify", "recompute", "expand", "fetch", "serve", "query-max"] {
        assert!(stdout(&help).contains(cmd), "{cmd}");
    }
}

fn value_of(turtle: &str, point: &str) -> String {
    let g = TurtleParser::new(Iri::new("file:///out.ttl").unwrap()).parse(turtle).unwrap();
    let value = Iri::new(omld_core::rdf::RDF_VALUE).unwrap();
    let objs = g.objects(&Term::Iri(Iri::new(point).unwrap()), &value);
    assert_eq!(objs.len(), 1, "{objs:?}");
    objs[0].as_literal().unwrap().lexical().to_string()
}

#[test]
fn recompute_after_editing_a_base_value() {
    let dir = tempfile::tempdir().unwrap();
    let edited = dir.path().join("geese.ttl");
    let text = std::fs::read_to_string(fixture("data/geese.ttl")).unwrap();
    std::fs::write(&edited, text.replace("\"693\"", "\"700\"")).unwrap();
    let out = dir.path().join("out.ttl");
    let o = omld(&["--config", &config(), "recompute", edited.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let written = std::fs::read_to_string(&out).unwrap();
    let v: f64 = value_of(&written, "http://example.org/data/ahs/PD100").parse().unwrap();
    assert_eq!(v, 700.0 / 380.0);

    let o = omld(&["--config", &config(), "verify", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn recompute_without_derivations_is_stable() {
    let o = omld(&["--config", &config(), "recompute", &fixture("data/underived.ttl")]);
    assert_eq!(code(&o), 0);
    let first = stdout(&o);
    let parser = TurtleParser::new(Iri::new("file:///x.ttl").unwrap());
    let input = parser
        .parse(&std::fs::read_to_string(fixture("data/underived.ttl")).unwrap())
        .unwrap();
    assert!(parser.parse(&first).unwrap().is_isomorphic(&input));

    let dir = tempfile::tempdir().unwrap();
    let again = dir.path().join("again.ttl");
    std::fs::write(&again, &first).unwrap();
    let o = omld(&["--config", &config(), "recompute", again.to_str().unwrap()]);
    assert_eq!(stdout(&o), first);
}

#[test]
fn recompute_refuses_cycles() {
    let o = omld(&["--config", &config(), "recompute", &fixture("data/cyclic.ttl")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("cyclic derivation"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

fn symbols_in(obj: &OmObject) -> Vec<String> {
    obj.symbols().iter().map(|s| s.uri()).collect()
}

#[test]
fn expand_hdi_to_arith1() {
    let o = omld(&["expand", &fixture("om/hdi.xml"), &fixture("cds")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let obj = parse_om_xml(&stdout(&o)).unwrap();
    for s in symbols_in(&obj) {
        assert!(s.starts_with("http://www.openmath.org/cd/arith1#"), "{s}");
    }
    assert!(stderr(&o).is_empty(), "{}", stderr(&o));
}

#[test]
fn expand_base_expression_is_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("base.xml");
    let xml = r#"<OMOBJ xmlns="http://www.openmath.org/OpenMath"><OMA><OMS cd="arith1" name="plus"/><OMI>1</OMI><OMF dec="2.5"/></OMA></OMOBJ>"#;
    std::fs::write(&p, xml).unwrap();
    let o = omld(&["expand", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(parse_om_xml(&stdout(&o)).unwrap(), parse_om_xml(xml).unwrap());
}

#[test]
fn expand_reports_residual_symbols() {
    let o = omld(&["expand", &fixture("om/residual.xml"), &fixture("cds/statistics.ocd")]);
    assert_eq!(code(&o), 0);
    let obj = parse_om_xml(&stdout(&o)).unwrap();
    assert!(symbols_in(&obj).contains(&"http://example.org/statistics#median".to_string()));
    assert!(!symbols_in(&obj).contains(&"http://example.org/statistics#density".to_string()));
    assert!(stderr(&o).contains("http://example.org/statistics#median"));
}

#[test]
fn expand_stops_on_cycles() {
    let o = omld(&["expand", &fixture("om/cycle.xml"), &fixture("cds")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("32 passes"), "{}", stderr(&o));
    let o = omld(&["expand", "--max-depth", "4", &fixture("om/cycle.xml"), &fixture("cds")]);
    assert!(stderr(&o).contains("4 passes"), "{}", stderr(&o));
}

#[test]
fn query_max_fixtures() {
    let run = |data: &str| {
        let o = omld(&[
            "--config",
            &config(),
            "query-max",
            &fixture(data),
            "http://example.org/statistics#density",
            "env:year-2008",
            "env:year-2009",
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        stdout(&o).split_whitespace().next().unwrap().to_string()
    };
    assert_eq!(run("data/regions.ttl"), "http://example.org/data/env/region-3");
    assert_eq!(run("data/regions-tie.ttl"), "http://example.org/data/env/region-a");
    assert_eq!(run("data/regions-single.ttl"), "http://example.org/data/env/region-1");

    let o = omld(&[
        "--config",
        &config(),
        "query-max",
        &fixture("data/geese.ttl"),
        "http://example.org/statistics#density",
        "env:year-2008",
        "env:year-2009",
    ]);
    assert_eq!(code(&o), 2);
}

/// A `serve` child process, killed on drop.
struct Server {
    child: Child,
    url: String,
    lines: mpsc::Receiver<String>,
}

impl Server {
    fn start(dir: &Path) -> Server {
        let mut child = Command::new(env!("CARGO_BIN_EXE_omld"))
            .args(["serve", "--port", "0", "--dir", dir.to_str().unwrap()])
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let lines = forward(child.stderr.take().unwrap());
        let first = lines.recv_timeout(Duration::from_secs(10)).expect("server announces itself");
        let url = first.rsplit(' ').next().unwrap().to_string();
        assert!(url.starts_with("http://127.0.0.1:"), "{first}");
        Server { child, url, lines }
    }

    fn signal(&self, sig: &str) {
        let ok = Command::new("kill")
            .args([sig, &self.child.id().to_string()])
            .status()
            .unwrap()
            .success();
        assert!(ok);
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn forward(stderr: ChildStderr) -> mpsc::Receiver<String> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(stderr).lines().map_while(Result::ok) {
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    rx
}

#[test]
fn fetch_from_local_server() {
    let server = Server::start(&fixtures().join("cds"));
    let o = omld(&["fetch", &format!("{}/statistics#hdi", server.url)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let on_disk = std::fs::read_to_string(fixture("cds/statistics.ocd")).unwrap();
    assert_eq!(stdout(&o), on_disk);

    let o = omld(&["fetch", "--accept", "text/html", &format!("{}/statistics#hdi", server.url)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("id=\"hdi\""));

    let o = omld(&["fetch", &format!("{}/nosuchcd", server.url)]);
    assert_eq!(code(&o), 2);
    let o = omld(&["fetch", "http://host.invalid/statistics#hdi"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn serve_missing_dir() {
    let o = omld(&["serve", "--port", "0", "--dir", "/nonexistent/cds"]);
    assert_eq!(code(&o), 64);
    let o = omld(&["serve", "--port", "0"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn serve_reloads_on_hangup_and_stops_on_term() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("cds/statistics.ocd"), dir.path().join("statistics.ocd")).unwrap();
    let mut server = Server::start(dir.path());
    let url = format!("{}/logarithm", server.url);
    assert_eq!(code(&omld(&["fetch", &url])), 2);

    std::fs::copy(fixture("cds/logarithm.ocd"), dir.path().join("logarithm.ocd")).unwrap();
    server.signal("-HUP");
    let line = server.lines.recv_timeout(Duration::from_secs(10)).unwrap();
    assert_eq!(line, "reloaded 2 dictionaries");
    let o = omld(&["fetch", &url]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("<CDName>logarithm</CDName>"));

    // A broken file keeps the previous dictionaries in service.
    std::fs::write(dir.path().join("broken.ocd"), "<CD>").unwrap();
    server.signal("-HUP");
    let line = server.lines.recv_timeout(Duration::from_secs(10)).unwrap();
    assert!(line.starts_with("reload failed"), "{line}");
    assert_eq!(code(&omld(&["fetch", &url])), 0);

    server.signal("-TERM");
    let status = server.child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}
