//! Expansion of dictionary-defined symbols into base operations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use log::{debug, warn};
use thiserror::Error;

use crate::cd::{find_definition, ContentDictionary, DefinitionLookup, DefinitionalFmp};
use crate::eval::BaseEnv;
use crate::om::{OmObject, OmSymbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("expansion did not finish within {limit} passes: {}", .chain.join(" -> "))]
    DepthExceeded { limit: usize, chain: Vec<String> },
    #[error("{symbol} takes {expected} argument(s), got {got}")]
    ArityMismatch { symbol: String, expected: usize, got: usize },
    #[error("cannot fetch dictionary {cd}: {message}")]
    Fetch { cd: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("a different dictionary {cdbase}/{name} is already loaded")]
    Conflict { cdbase: String, name: String },
}

/// Where dictionaries missing from a [`CdStore`] come from.
pub trait CdSource: Send + Sync {
    /// `Ok(None)` means the dictionary does not exist there; any symbol of
    /// it is then left unexpanded.
    fn fetch_cd(&self, cdbase: &str, cd: &str) -> Result<Option<ContentDictionary>, String>;
}

type CdKey = (String, String);

fn key(cdbase: &str, cd: &str) -> CdKey {
    (cdbase.trim_end_matches('/').to_string(), cd.to_string())
}

enum Miss {
    Absent,
    Failed(String),
}

/// Dictionaries available to the rewriter, keyed by (cdbase, name).
/// Readers share a lock; fetches for misses are serialized.
#[derive(Default)]
pub struct CdStore {
    cds: RwLock<BTreeMap<CdKey, Arc<ContentDictionary>>>,
    misses: RwLock<HashMap<CdKey, Miss>>,
    source: Option<Arc<dyn CdSource>>,
    fetch_lock: Mutex<()>,
}

impl std::fmt::Debug for CdStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CdStore")
            .field("cds", &self.cds.read().expect("store lock").keys().collect::<Vec<_>>())
            .field("has_source", &self.source.is_some())
            .finish()
    }
}

impl CdStore {
    pub fn new() -> Self {
        CdStore::default()
    }

    pub fn with_source(source: Arc<dyn CdSource>) -> Self {
        CdStore {
            source: Some(source),
            ..CdStore::default()
        }
    }

    /// Adding the same dictionary twice is fine; a different one under an
    /// existing key is refused.
    pub fn insert(&self, cd: ContentDictionary) -> Result<Arc<ContentDictionary>, StoreError> {
        let k = key(&cd.cdbase, &cd.name);
        self.insert_at(k, cd)
    }

    fn insert_at(&self, k: CdKey, cd: ContentDictionary) -> Result<Arc<ContentDictionary>, StoreError> {
        let mut cds = self.cds.write().expect("store lock");
        if let Some(existing) = cds.get(&k) {
            if **existing == cd || same_content(existing, &cd) {
                return Ok(existing.clone());
            }
            return Err(StoreError::Conflict {
                cdbase: k.0,
                name: k.1,
            });
        }
        let cd = Arc::new(cd);
        cds.insert(k, cd.clone());
        Ok(cd)
    }

    pub fn get(&self, cdbase: &str, cd: &str) -> Option<Arc<ContentDictionary>> {
        self.cds.read().expect("store lock").get(&key(cdbase, cd)).cloned()
    }

    pub fn len(&self) -> usize {
        self.cds.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The dictionary of `symbol`, fetching it through the source on a miss.
    pub fn lookup(&self, symbol: &OmSymbol) -> Result<Option<Arc<ContentDictionary>>, RewriteError> {
        let k = key(&symbol.cdbase, &symbol.cd);
        if let Some(cd) = self.cds.read().expect("store lock").get(&k) {
            return Ok(Some(cd.clone()));
        }
        let Some(source) = &self.source else {
            return Ok(None);
        };
        let _guard = self.fetch_lock.lock().expect("fetch lock");
        if let Some(cd) = self.cds.read().expect("store lock").get(&k) {
            return Ok(Some(cd.clone()));
        }
        let cd_label = format!("{}/{}", k.0, k.1);
        match self.misses.read().expect("store lock").get(&k) {
            Some(Miss::Absent) => return Ok(None),
            Some(Miss::Failed(message)) => {
                return Err(RewriteError::Fetch {
                    cd: cd_label,
                    message: message.clone(),
                })
            }
            None => {}
        }
        debug!("fetching dictionary {cd_label}");
        match source.fetch_cd(&k.0, &k.1) {
            Ok(Some(cd)) => {
                if key(&cd.cdbase, &cd.name) != k {
                    warn!("dictionary fetched for {cd_label} declares {}/{}", cd.cdbase, cd.name);
                }
                self.insert_at(k, cd).map(Some).map_err(|e| RewriteError::Fetch {
                    cd: cd_label,
                    message: e.to_string(),
                })
            }
            Ok(None) => {
                self.misses.write().expect("store lock").insert(k, Miss::Absent);
                Ok(None)
            }
            Err(message) => {
                self.misses
                    .write()
                    .expect("store lock")
                    .insert(k, Miss::Failed(message.clone()));
                Err(RewriteError::Fetch { cd: cd_label, message })
            }
        }
    }

    /// The definitional FMP of `symbol`, if its dictionary has one.
    pub fn definition(&self, symbol: &OmSymbol) -> Result<Option<DefinitionalFmp>, RewriteError> {
        let Some(cd) = self.lookup(symbol)? else {
            return Ok(None);
        };
        match find_definition(&cd, &symbol.name) {
            DefinitionLookup::Definitional(d) => Ok(Some(d)),
            DefinitionLookup::NotDefinitional | DefinitionLookup::NoSuchSymbol => Ok(None),
        }
    }
}

/// The source location does not count when deciding whether two loaded
/// copies are the same dictionary.
fn same_content(a: &ContentDictionary, b: &ContentDictionary) -> bool {
    a.cdbase.trim_end_matches('/') == b.cdbase.trim_end_matches('/')
        && a.name == b.name
        && a.description == b.description
        && a.definitions == b.definitions
}

/// Replace free variables of `body` by their bindings. Variables bound
/// inside `body` shadow the bindings, and are renamed when a substituted
/// value would otherwise be captured.
pub fn substitute(body: &OmObject, bindings: &BTreeMap<String, OmObject>) -> Result<OmObject, RewriteError> {
    if let Some(v) = body.free_variables().into_iter().find(|v| !bindings.contains_key(v)) {
        return Err(RewriteError::UnboundVariable(v));
    }
    Ok(subst(body, bindings))
}

fn subst(obj: &OmObject, bindings: &BTreeMap<String, OmObject>) -> OmObject {
    match obj {
        OmObject::Variable(v) => bindings.get(v).cloned().unwrap_or_else(|| obj.clone()),
        OmObject::Application { head, args } => OmObject::Application {
            head: Box::new(subst(head, bindings)),
            args: args.iter().map(|a| subst(a, bindings)).collect(),
        },
        OmObject::Binding { binder, vars, body } => {
            let mut inner: BTreeMap<String, OmObject> = bindings
                .iter()
                .filter(|(k, _)| !vars.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            let body_free = body.free_variables();
            inner.retain(|k, _| body_free.contains(k));
            let incoming: BTreeSet<String> = inner.values().flat_map(|v| v.free_variables()).collect();

            let mut new_vars = Vec::with_capacity(vars.len());
            for v in vars {
                if incoming.contains(v) {
                    let taken = |c: &String| {
                        incoming.contains(c) || body_free.contains(c) || vars.contains(c) || new_vars.contains(c)
                    };
                    let fresh = (1..)
                        .map(|i| format!("{v}_{i}"))
                        .find(|c| !taken(c))
                        .expect("unbounded candidates");
                    inner.insert(v.clone(), OmObject::Variable(fresh.clone()));
                    new_vars.push(fresh);
                } else {
                    new_vars.push(v.clone());
                }
            }
            OmObject::Binding {
                binder: Box::new(subst(binder, bindings)),
                vars: new_vars,
                body: Box::new(subst(body, &inner)),
            }
        }
        _ => obj.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub object: OmObject,
    /// Non-base symbols left in the result because no definition was found.
    pub residual: BTreeSet<OmSymbol>,
    pub passes: usize,
}

struct Rewriter<'a> {
    store: &'a CdStore,
    base: &'a BaseEnv,
    defs: HashMap<OmSymbol, Option<DefinitionalFmp>>,
}

impl Rewriter<'_> {
    fn definition(&mut self, s: &OmSymbol) -> Result<Option<DefinitionalFmp>, RewriteError> {
        if self.base.contains(s) {
            return Ok(None);
        }
        if let Some(d) = self.defs.get(s) {
            return Ok(d.clone());
        }
        let d = self.store.definition(s)?;
        self.defs.insert(s.clone(), d.clone());
        Ok(d)
    }

    /// The definition to apply at this node, if it is a redex.
    fn redex(&mut self, obj: &OmObject) -> Result<Option<(DefinitionalFmp, Vec<OmObject>)>, RewriteError> {
        let (symbol, args) = match obj {
            OmObject::Symbol(s) => (s, &[][..]),
            OmObject::Application { head, args } => match head.as_ref() {
                OmObject::Symbol(s) => (s, args.as_slice()),
                _ => return Ok(None),
            },
            _ => return Ok(None),
        };
        let Some(def) = self.definition(symbol)? else {
            return Ok(None);
        };
        if matches!(obj, OmObject::Symbol(_)) && def.arity() > 0 {
            // A function symbol used as a value; only its applications expand.
            return Ok(None);
        }
        if def.arity() != args.len() {
            return Err(RewriteError::ArityMismatch {
                symbol: symbol.uri(),
                expected: def.arity(),
                got: args.len(),
            });
        }
        Ok(Some((def, args.to_vec())))
    }

    fn instantiate(def: &DefinitionalFmp, args: Vec<OmObject>) -> Result<OmObject, RewriteError> {
        let bindings: BTreeMap<String, OmObject> = def.params.iter().cloned().zip(args).collect();
        substitute(&def.body, &bindings)
    }

    /// One innermost pass: children first, then this node. Each redex
    /// present at the start of the pass is rewritten once.
    fn pass(&mut self, obj: &OmObject, fired: &mut Vec<OmSymbol>) -> Result<OmObject, RewriteError> {
        let rebuilt = match obj {
            OmObject::Application { head, args } => {
                let new_head = match head.as_ref() {
                    OmObject::Symbol(_) => head.as_ref().clone(),
                    other => self.pass(other, fired)?,
                };
                let new_args = args.iter().map(|a| self.pass(a, fired)).collect::<Result<Vec<_>, _>>()?;
                OmObject::Application {
                    head: Box::new(new_head),
                    args: new_args,
                }
            }
            OmObject::Binding { binder, vars, body } => OmObject::Binding {
                binder: binder.clone(),
                vars: vars.clone(),
                body: Box::new(self.pass(body, fired)?),
            },
            _ => obj.clone(),
        };
        match self.redex(&rebuilt)? {
            Some((def, args)) => {
                fired.push(def.symbol.clone());
                Self::instantiate(&def, args)
            }
            None => Ok(rebuilt),
        }
    }

    fn has_redex(&mut self, obj: &OmObject) -> Result<bool, RewriteError> {
        if self.redex(obj)?.is_some() {
            return Ok(true);
        }
        match obj {
            OmObject::Application { head, args } => {
                if !matches!(head.as_ref(), OmObject::Symbol(_)) && self.has_redex(head)? {
                    return Ok(true);
                }
                for a in args {
                    if self.has_redex(a)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            OmObject::Binding { body, .. } => self.has_redex(body),
            _ => Ok(false),
        }
    }
}

/// Rewrite innermost-first until no defined symbol is left, performing at
/// most `max_depth` passes.
pub fn expand(obj: &OmObject, store: &CdStore, base: &BaseEnv, max_depth: usize) -> Result<Expansion, RewriteError> {
    let mut rw = Rewriter {
        store,
        base,
        defs: HashMap::new(),
    };
    let mut current = obj.clone();
    let mut chain = Vec::new();
    let mut passes = 0;
    loop {
        if !rw.has_redex(&current)? {
            break;
        }
        if passes == max_depth {
            return Err(RewriteError::DepthExceeded {
                limit: max_depth,
                chain: compress_chain(&chain),
            });
        }
        let mut fired = Vec::new();
        current = rw.pass(&current, &mut fired)?;
        passes += 1;
        if let Some(first) = fired.first() {
            chain.push(first.uri());
        }
    }
    let residual = current.symbols().into_iter().filter(|s| !base.contains(s)).collect();
    Ok(Expansion {
        object: current,
        residual,
        passes,
    })
}

/// Shorten a long chain to its head and tail for error messages.
fn compress_chain(chain: &[String]) -> Vec<String> {
    if chain.len() <= 8 {
        return chain.to_vec();
    }
    let mut out = chain[..4].to_vec();
    out.push(format!("... {} more", chain.len() - 8));
    out.extend_from_slice(&chain[chain.len() - 4..]);
    out
}
