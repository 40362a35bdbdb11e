//! The toolkit configuration file.

use std::collections::BTreeMap;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use omld_core::annotations::{Vocabulary, DEFAULT_SL_NS, SCOVO_NS};
use omld_core::cd::RDFS_SEE_ALSO;
use omld_core::eval::BaseEnv;
use omld_core::om::OPENMATH_MIME;
use omld_core::pipeline::Limits;
use omld_core::rdf::{Iri, RDF_NS, XSD_NS};
use omld_net::resolver::ResolverConfig;
use omld_net::server::OFFERED;
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub dir: Option<PathBuf>,
    pub port: u16,
    pub bind: String,
    pub base_iri: Option<String>,
    pub default_representation: String,
}

impl Default for ServerSection {
    fn default() -> Self {
        ServerSection {
            dir: None,
            port: 8080,
            bind: "127.0.0.1".into(),
            base_iri: None,
            default_representation: OPENMATH_MIME.into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    /// Prefixes predeclared when reading datasets. `sl` and `scv` also
    /// select the annotation vocabulary.
    pub prefixes: BTreeMap<String, String>,
    pub base_env: String,
    pub max_depth: usize,
    pub max_chain: usize,
    pub tolerance: f64,
    pub cache_ttl_secs: u64,
    pub max_redirects: usize,
    pub link_predicates: Vec<String>,
    /// Directories of CDs loaded before anything is fetched.
    pub cd_dirs: Vec<PathBuf>,
    /// URL prefix rewrites applied to every HTTP request.
    pub mirrors: BTreeMap<String, String>,
    /// Class of the dimension values that name regions (for query-max).
    pub region_class: Option<String>,
    pub server: ServerSection,
}

fn default_prefixes() -> BTreeMap<String, String> {
    [
        ("rdf", RDF_NS),
        ("xsd", XSD_NS),
        ("scv", SCOVO_NS),
        ("sl", DEFAULT_SL_NS),
        ("env", "http://example.org/data/env/"),
        ("ahs", "http://example.org/data/ahs/"),
        ("ahs2", "http://example.org/data/ahs2/"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        ToolkitConfig {
            prefixes: default_prefixes(),
            base_env: "arith1".into(),
            max_depth: 32,
            max_chain: omld_core::annotations::DEFAULT_MAX_CHAIN,
            tolerance: 1e-9,
            cache_ttl_secs: 300,
            max_redirects: 5,
            link_predicates: vec![RDFS_SEE_ALSO.into()],
            cd_dirs: Vec::new(),
            mirrors: BTreeMap::new(),
            region_class: None,
            server: ServerSection::default(),
        }
    }
}

impl ToolkitConfig {
    /// Read and check a config file. Relative paths in it are taken
    /// relative to the file's directory. Prefixes not mentioned in the file
    /// keep their defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg: ToolkitConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut prefixes = default_prefixes();
        prefixes.append(&mut cfg.prefixes);
        cfg.prefixes = prefixes;
        let dir = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.cd_dirs {
            if d.is_relative() {
                *d = dir.join(&*d);
            }
        }
        if let Some(d) = &mut cfg.server.dir {
            if d.is_relative() {
                *d = dir.join(&*d);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (p, ns) in &self.prefixes {
            Iri::new(ns.as_str()).map_err(|_| ConfigError(format!("prefix `{p}`: `{ns}` is not an absolute IRI")))?;
        }
        for l in &self.link_predicates {
            self.expand_iri(l)?;
        }
        if let Some(r) = &self.region_class {
            self.expand_iri(r)?;
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(ConfigError(format!("tolerance must be a finite number >= 0, got {}", self.tolerance)));
        }
        if self.max_depth == 0 {
            return Err(ConfigError("max_depth must be at least 1".into()));
        }
        self.base_env()?;
        if !OFFERED.contains(&self.server.default_representation.as_str()) {
            return Err(ConfigError(format!(
                "server.default_representation must be one of {}",
                OFFERED.join(", ")
            )));
        }
        self.server
            .bind
            .parse::<IpAddr>()
            .map_err(|_| ConfigError(format!("server.bind: `{}` is not an IP address", self.server.bind)))?;
        if let Some(b) = &self.server.base_iri {
            let iri = Iri::new(b.as_str()).map_err(|_| ConfigError(format!("server.base_iri: `{b}` is not absolute")))?;
            if iri.as_str().ends_with('#') {
                return Err(ConfigError("server.base_iri must not end with `#`".into()));
            }
        }
        Ok(())
    }

    pub fn prefix_iris(&self) -> BTreeMap<String, Iri> {
        self.prefixes
            .iter()
            .filter_map(|(k, v)| Iri::new(v.as_str()).ok().map(|i| (k.clone(), i)))
            .collect()
    }

    /// A full IRI, `<iri>`, or a prefixed name using the configured prefixes.
    pub fn expand_iri(&self, text: &str) -> Result<Iri, ConfigError> {
        let t = text.trim();
        let t = t.strip_prefix('<').and_then(|s| s.strip_suffix('>')).unwrap_or(t);
        if let Some((p, local)) = t.split_once(':') {
            if !local.starts_with("//") {
                if let Some(ns) = self.prefixes.get(p) {
                    return Iri::new(format!("{ns}{local}")).map_err(|e| ConfigError(format!("`{text}`: {e}")));
                }
            }
        }
        Iri::new(t).map_err(|_| ConfigError(format!("`{text}` is neither an absolute IRI nor a known prefixed name")))
    }

    pub fn vocabulary(&self) -> Vocabulary {
        let sl = self.prefixes.get("sl").map_or(DEFAULT_SL_NS, String::as_str);
        let scv = self.prefixes.get("scv").map_or(SCOVO_NS, String::as_str);
        Vocabulary::new(sl, scv).expect("prefixes validated")
    }

    pub fn base_env(&self) -> Result<BaseEnv, ConfigError> {
        match self.base_env.as_str() {
            "arith1" => Ok(BaseEnv::arith1()),
            other => Err(ConfigError(format!("unknown base_env `{other}` (supported: arith1)"))),
        }
    }

    pub fn limits(&self) -> Limits {
        Limits {
            max_depth: self.max_depth,
            max_chain: self.max_chain,
        }
    }

    pub fn link_predicate_iris(&self) -> Vec<Iri> {
        self.link_predicates.iter().filter_map(|l| self.expand_iri(l).ok()).collect()
    }

    pub fn resolver_config(&self) -> ResolverConfig {
        ResolverConfig {
            max_redirects: self.max_redirects,
            cache_ttl: Duration::from_secs(self.cache_ttl_secs),
            mirrors: self.mirrors.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("toolkit.toml");
        std::fs::write(&p, text).unwrap();
        p
    }

    fn scratch(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("omld-config-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn defaults_fill_gaps() {
        let d = scratch("defaults");
        let cfg = ToolkitConfig::load(&write(&d, "tolerance = 0.5\ncd_dirs = [\"cds\"]\n[prefixes]\nex = \"http://ex.org/\"\n")).unwrap();
        assert_eq!(cfg.tolerance, 0.5);
        assert_eq!(cfg.max_depth, 32);
        assert_eq!(cfg.prefixes["ex"], "http://ex.org/");
        assert_eq!(cfg.prefixes["sl"], DEFAULT_SL_NS);
        assert_eq!(cfg.cd_dirs, vec![d.join("cds")]);
        assert_eq!(cfg.expand_iri("ex:thing").unwrap().as_str(), "http://ex.org/thing");
        assert_eq!(cfg.expand_iri("<http://a.org/b>").unwrap().as_str(), "http://a.org/b");
        assert_eq!(cfg.expand_iri("http://a.org/b").unwrap().as_str(), "http://a.org/b");
        assert_eq!(cfg.expand_iri("urn:x").unwrap().as_str(), "urn:x");
        assert!(cfg.expand_iri("no scheme").is_err());
    }

    #[test]
    fn invalid_values_are_refused() {
        let d = scratch("invalid");
        for bad in [
            "tolerance = -1.0",
            "max_depth = 0",
            "base_env = \"transc1\"",
            "[prefixes]\nex = \"relative/\"",
            "unknown_key = 1",
            "[server]\ndefault_representation = \"image/png\"",
            "[server]\nbase_iri = \"http://x.org/#\"",
        ] {
            assert!(ToolkitConfig::load(&write(&d, bad)).is_err(), "{bad}");
        }
    }
}
