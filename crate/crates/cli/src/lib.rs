//! The `omld` command line.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use log::info;
use omld_core::cd::parse_cd_xml;
use omld_core::om::{parse_om_xml, serialize_om_xml, OPENMATH_MIME};
use omld_core::pipeline::{query_max_increase, recompute, verify_dataset, RegionQuery};
use omld_core::rdf::{serialize_turtle, Graph, Iri, TurtleParser};
use omld_core::rewrite::{expand, CdStore};
use omld_net::resolver::Resolver;
use omld_net::server::{load_dir, start, RunningServer, ServerConfig};

use config::ToolkitConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "omld", version, about = "OpenMath content dictionaries as linked data")]
pub struct Cli {
    /// Toolkit configuration file (TOML). Built-in defaults apply without one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recompute every derived point and compare with its stored value.
    Verify {
        dataset: PathBuf,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        max_depth: Option<usize>,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the dataset with every derived value recomputed.
    Recompute {
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// Expand an OpenMath object into base symbols.
    Expand {
        object: PathBuf,
        /// CD files, directories of CDs, or CD URLs.
        cds: Vec<String>,
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// Dereference a URI and print the body.
    Fetch {
        uri: String,
        #[arg(long, default_value = OPENMATH_MIME)]
        accept: String,
    },
    /// Publish a directory of CDs over HTTP.
    Serve {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        base_iri: Option<String>,
    },
    /// Region with the largest increase of a derived metric between two times.
    QueryMax {
        dataset: PathBuf,
        /// Function IRI (or prefixed name) of the metric's derivations.
        metric: String,
        t1: String,
        t2: String,
        #[arg(long)]
        region_class: Option<String>,
        #[arg(long)]
        max_depth: Option<usize>,
    },
}

/// A failure that ends the command with a given exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: i32,
    pub message: String,
}

impl Exit {
    fn usage(message: impl Into<String>) -> Self {
        Exit {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn failed(message: impl Into<String>) -> Self {
        Exit {
            code: EXIT_FAILED,
            message: message.into(),
        }
    }
}

impl From<config::ConfigError> for Exit {
    fn from(e: config::ConfigError) -> Self {
        Exit::usage(e.0)
    }
}

/// Run one command. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "omld: {}", e.message);
            e.code
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ToolkitConfig, Exit> {
    match path {
        Some(p) if !p.is_file() => Err(Exit::usage(format!("{}: config file not found", p.display()))),
        Some(p) => Ok(ToolkitConfig::load(p)?),
        None => Ok(ToolkitConfig::default()),
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Exit> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Verify {
            dataset,
            tolerance,
            max_depth,
            out,
        } => {
            if let Some(t) = tolerance {
                cfg.tolerance = t;
            }
            override_depth(&mut cfg, max_depth);
            cfg.validate()?;
            cmd_verify(&cfg, &dataset, out.as_deref(), stdout)
        }
        Command::Recompute { dataset, out, max_depth } => {
            override_depth(&mut cfg, max_depth);
            cfg.validate()?;
            cmd_recompute(&cfg, &dataset, out.as_deref(), stdout)
        }
        Command::Expand { object, cds, max_depth } => {
            override_depth(&mut cfg, max_depth);
            cfg.validate()?;
            cmd_expand(&cfg, &object, &cds, stdout, stderr)
        }
        Command::Fetch { uri, accept } => cmd_fetch(&cfg, &uri, &accept, stdout),
        Command::Serve { dir, port, base_iri } => {
            if dir.is_some() {
                cfg.server.dir = dir;
            }
            if let Some(p) = port {
                cfg.server.port = p;
            }
            if base_iri.is_some() {
                cfg.server.base_iri = base_iri;
            }
            cfg.validate()?;
            cmd_serve(&cfg, stderr)
        }
        Command::QueryMax {
            dataset,
            metric,
            t1,
            t2,
            region_class,
            max_depth,
        } => {
            if region_class.is_some() {
                cfg.region_class = region_class;
            }
            override_depth(&mut cfg, max_depth);
            cfg.validate()?;
            cmd_query_max(&cfg, &dataset, &metric, &t1, &t2, stdout)
        }
    }
}

fn override_depth(cfg: &mut ToolkitConfig, max_depth: Option<usize>) {
    if let Some(d) = max_depth {
        cfg.max_depth = d;
    }
}

fn read_file(path: &Path) -> Result<String, Exit> {
    std::fs::read_to_string(path).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))
}

fn file_iri(path: &Path) -> Result<Iri, Exit> {
    let abs = std::path::absolute(path).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))?;
    Iri::new(format!("file://{}", abs.display())).map_err(|e| Exit::usage(e.to_string()))
}

/// Parse a dataset with the configured prefixes predeclared.
pub fn read_dataset(cfg: &ToolkitConfig, path: &Path) -> Result<Graph, Exit> {
    let text = read_file(path)?;
    TurtleParser::new(file_iri(path)?)
        .with_prefixes(&cfg.prefix_iris())
        .parse(&text)
        .map_err(|e| Exit::failed(format!("{}: {e}", path.display())))
}

/// A store holding the configured CD directories that fetches anything
/// else over HTTP.
pub fn dataset_store(cfg: &ToolkitConfig) -> Result<CdStore, Exit> {
    let store = CdStore::with_source(Arc::new(Resolver::http(cfg.resolver_config())));
    for dir in &cfg.cd_dirs {
        load_into(&store, dir)?;
    }
    Ok(store)
}

fn load_into(store: &CdStore, dir: &Path) -> Result<(), Exit> {
    let snapshot = load_dir(dir).map_err(|e| Exit::usage(e.to_string()))?;
    for (_, p) in snapshot.cds {
        store
            .insert(p.cd)
            .map_err(|e| Exit::usage(format!("{}: {e}", p.path.display())))?;
    }
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Exit> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Exit::usage(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Exit::failed(format!("writing output: {e}"))),
    }
}

fn cmd_verify(cfg: &ToolkitConfig, dataset: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let g = read_dataset(cfg, dataset)?;
    let store = dataset_store(cfg)?;
    let report = verify_dataset(&g, &cfg.vocabulary(), &store, &cfg.base_env()?, cfg.tolerance, cfg.limits());
    write_output(None, &report.to_text(), stdout)?;
    if let Some(p) = out {
        write_output(Some(p), &report.to_json(), stdout)?;
    }
    Ok(if report.has_uncomputable() {
        EXIT_FAILED
    } else if report.has_mismatch() {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    })
}

fn cmd_recompute(cfg: &ToolkitConfig, dataset: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let g = read_dataset(cfg, dataset)?;
    let store = dataset_store(cfg)?;
    let result = recompute(&g, &cfg.vocabulary(), &store, &cfg.base_env()?, cfg.limits())
        .map_err(|e| Exit::failed(e.to_string()))?;
    write_output(out, &serialize_turtle(&result), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_expand(
    cfg: &ToolkitConfig,
    object: &Path,
    cds: &[String],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Exit> {
    let obj = parse_om_xml(&read_file(object)?).map_err(|e| Exit::failed(format!("{}: {e}", object.display())))?;
    let store = CdStore::new();
    let resolver = Resolver::http(cfg.resolver_config());
    for source in cds {
        if source.starts_with("http://") || source.starts_with("https://") {
            let cd = resolver.fetch_cd(source).map_err(|e| Exit::failed(e.to_string()))?;
            store.insert((*cd).clone()).map_err(|e| Exit::usage(format!("{source}: {e}")))?;
            continue;
        }
        let path = Path::new(source);
        if path.is_dir() {
            load_into(&store, path)?;
        } else {
            let cd = parse_cd_xml(&read_file(path)?, None).map_err(|e| Exit::usage(format!("{source}: {e}")))?;
            store.insert(cd).map_err(|e| Exit::usage(format!("{source}: {e}")))?;
        }
    }
    let expansion = expand(&obj, &store, &cfg.base_env()?, cfg.max_depth).map_err(|e| Exit::failed(e.to_string()))?;
    info!("expanded in {} passes", expansion.passes);
    let mut text = serialize_om_xml(&expansion.object);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_output(None, &text, stdout)?;
    if !expansion.residual.is_empty() {
        let _ = writeln!(stderr, "residual symbols:");
        for s in &expansion.residual {
            let _ = writeln!(stderr, "  {}", s.uri());
        }
    }
    Ok(EXIT_OK)
}

fn cmd_fetch(cfg: &ToolkitConfig, uri: &str, accept: &str, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let resolver = Resolver::http(cfg.resolver_config());
    let result = resolver
        .negotiate_fetch(uri, &[accept])
        .map_err(|e| Exit::failed(e.to_string()))?;
    info!("{} -> {} ({})", uri, result.final_url, result.content_type);
    stdout
        .write_all(&result.body)
        .map_err(|e| Exit::failed(format!("writing output: {e}")))?;
    Ok(EXIT_OK)
}

/// Bind the server described by `cfg` without blocking.
pub fn start_server(cfg: &ToolkitConfig) -> Result<RunningServer, Exit> {
    let dir = cfg
        .server
        .dir
        .clone()
        .ok_or_else(|| Exit::usage("no CD directory: pass --dir or set server.dir"))?;
    if !dir.is_dir() {
        return Err(Exit::usage(format!("{}: not a directory", dir.display())));
    }
    let mut sc = ServerConfig::new(dir);
    sc.bind = cfg.server.bind.parse().map_err(|_| Exit::usage("bad bind address"))?;
    sc.port = cfg.server.port;
    sc.base_iri = match &cfg.server.base_iri {
        Some(b) => Some(Iri::new(b.as_str()).map_err(|e| Exit::usage(e.to_string()))?),
        None => None,
    };
    sc.default_representation = cfg.server.default_representation.clone();
    sc.link_predicates = cfg.link_predicate_iris();
    start(sc).map_err(|e| match e {
        omld_net::server::ServeError::Bind { .. } => Exit::failed(e.to_string()),
        other => Exit::usage(other.to_string()),
    })
}

fn cmd_serve(cfg: &ToolkitConfig, stderr: &mut dyn Write) -> Result<i32, Exit> {
    use signal_hook::consts::{SIGHUP, SIGINT, SIGTERM};
    use signal_hook::iterator::Signals;

    let mut signals = Signals::new([SIGHUP, SIGINT, SIGTERM]).map_err(|e| Exit::failed(e.to_string()))?;
    let server = start_server(cfg)?;
    let state = server.state();
    let _ = writeln!(
        stderr,
        "serving {} dictionaries on {}",
        state.snapshot().cds.len(),
        server.url()
    );
    let _ = stderr.flush();
    for sig in signals.forever() {
        if sig == SIGHUP {
            match state.reload() {
                Ok(n) => {
                    let _ = writeln!(stderr, "reloaded {n} dictionaries");
                }
                Err(e) => {
                    let _ = writeln!(stderr, "reload failed, keeping previous dictionaries: {e}");
                }
            }
            let _ = stderr.flush();
        } else {
            break;
        }
    }
    server.shutdown();
    Ok(EXIT_OK)
}

fn cmd_query_max(
    cfg: &ToolkitConfig,
    dataset: &Path,
    metric: &str,
    t1: &str,
    t2: &str,
    stdout: &mut dyn Write,
) -> Result<i32, Exit> {
    let region_class = cfg
        .region_class
        .as_deref()
        .ok_or_else(|| Exit::usage("no region class: pass --region-class or set region_class"))?;
    let q = RegionQuery {
        metric: cfg.expand_iri(metric)?,
        region_class: cfg.expand_iri(region_class)?,
        t1: cfg.expand_iri(t1)?,
        t2: cfg.expand_iri(t2)?,
    };
    let g = read_dataset(cfg, dataset)?;
    let store = dataset_store(cfg)?;
    let (region, increase) = query_max_increase(&g, &cfg.vocabulary(), &q, &store, &cfg.base_env()?, cfg.limits())
        .map_err(|e| Exit::failed(e.to_string()))?;
    write_output(None, &format!("{region} {increase}\n"), stdout)?;
    Ok(EXIT_OK)
}
