//! Content dictionaries: reading and writing the CD XML format, picking out
//! definitional FMPs, and reading typed links that are encoded as FMPs.

use std::collections::BTreeSet;
use std::fmt::Write;

use log::warn;
use thiserror::Error;

use crate::om::{is_ncname, OmError, OmObject, OmSymbol, ParseContext, DEFAULT_CDBASE};
use crate::rdf::Iri;
use crate::xml::{escape_text, parse_document, Element, XmlError};

pub const OPENMATH_CD_NS: &str = "http://www.openmath.org/OpenMathCD";
pub const RDFS_SEE_ALSO: &str = "http://www.w3.org/2000/01/rdf-schema#seeAlso";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CdError {
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("missing element {0}")]
    MissingElement(String),
    #[error("symbol `{0}` is defined more than once")]
    DuplicateSymbol(String),
    #[error("`{0}` is not a valid name")]
    InvalidName(String),
    #[error("in FMP of `{symbol}`: {source}")]
    Fmp { symbol: String, source: OmError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentDictionary {
    pub cdbase: String,
    pub name: String,
    pub description: String,
    pub definitions: Vec<SymbolDefinition>,
    pub source_url: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDefinition {
    pub name: String,
    pub description: String,
    /// Commented properties, kept verbatim.
    pub cmps: Vec<String>,
    pub fmps: Vec<OmObject>,
}

impl ContentDictionary {
    pub fn definition(&self, name: &str) -> Option<&SymbolDefinition> {
        self.definitions.iter().find(|d| d.name == name)
    }

    pub fn symbol(&self, name: &str) -> OmSymbol {
        OmSymbol::new(&self.cdbase, &self.name, name)
    }

    /// A copy holding only the named definition, used for per-symbol documents.
    pub fn restricted_to(&self, name: &str) -> Option<ContentDictionary> {
        let def = self.definition(name)?.clone();
        Some(ContentDictionary {
            definitions: vec![def],
            ..self.clone()
        })
    }
}

/// Parse a CD document. FMP symbols naming this CD without an explicit
/// `cdbase` are resolved against the CD's own base.
pub fn parse_cd_xml(text: &str, source_url: Option<&Iri>) -> Result<ContentDictionary, CdError> {
    let root = parse_document(text)?;
    if root.name != "CD" {
        return Err(CdError::MissingElement("/CD".into()));
    }
    let name = root
        .child("CDName")
        .ok_or_else(|| CdError::MissingElement("/CD/CDName".into()))?
        .text()
        .trim()
        .to_string();
    if !is_ncname(&name) {
        return Err(CdError::InvalidName(name));
    }
    let cdbase = root
        .child("CDBase")
        .map(|e| e.text().trim().trim_end_matches('/').to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| DEFAULT_CDBASE.to_string());
    let description = root
        .child("Description")
        .ok_or_else(|| CdError::MissingElement("/CD/Description".into()))?
        .text()
        .trim()
        .to_string();

    let ctx = ParseContext {
        home_cd: Some((name.clone(), cdbase.clone())),
        ..ParseContext::default()
    };
    let mut definitions = Vec::new();
    let mut seen = BTreeSet::new();
    for def in root.elements().filter(|e| e.name == "CDDefinition") {
        let parsed = read_definition(def, &ctx)?;
        if !seen.insert(parsed.name.clone()) {
            return Err(CdError::DuplicateSymbol(parsed.name));
        }
        definitions.push(parsed);
    }
    Ok(ContentDictionary {
        cdbase,
        name,
        description,
        definitions,
        source_url: source_url.cloned(),
    })
}

fn read_definition(el: &Element, ctx: &ParseContext) -> Result<SymbolDefinition, CdError> {
    let name = el
        .child("Name")
        .ok_or_else(|| CdError::MissingElement("/CD/CDDefinition/Name".into()))?
        .text()
        .trim()
        .to_string();
    if !is_ncname(&name) {
        return Err(CdError::InvalidName(name));
    }
    let description = el
        .child("Description")
        .map(|d| d.text().trim().to_string())
        .unwrap_or_default();
    let cmps = el.elements().filter(|e| e.name == "CMP").map(Element::text).collect();
    let mut fmps = Vec::new();
    for fmp in el.elements().filter(|e| e.name == "FMP") {
        let obj = fmp
            .child("OMOBJ")
            .ok_or_else(|| CdError::MissingElement("/CD/CDDefinition/FMP/OMOBJ".into()))?;
        let parsed = ctx.read_omobj(obj).map_err(|source| CdError::Fmp {
            symbol: name.clone(),
            source,
        })?;
        fmps.push(parsed);
    }
    Ok(SymbolDefinition {
        name,
        description,
        cmps,
        fmps,
    })
}

pub fn serialize_cd_xml(cd: &ContentDictionary) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<CD xmlns=\"{OPENMATH_CD_NS}\">");
    let _ = writeln!(out, "  <CDName>{}</CDName>", escape_text(&cd.name));
    let _ = writeln!(out, "  <CDBase>{}</CDBase>", escape_text(&cd.cdbase));
    let _ = writeln!(out, "  <Description>{}</Description>", escape_text(&cd.description));
    for def in &cd.definitions {
        out.push_str("  <CDDefinition>\n");
        let _ = writeln!(out, "    <Name>{}</Name>", escape_text(&def.name));
        if !def.description.is_empty() {
            let _ = writeln!(out, "    <Description>{}</Description>", escape_text(&def.description));
        }
        for cmp in &def.cmps {
            let _ = writeln!(out, "    <CMP>{}</CMP>", escape_text(cmp));
        }
        for fmp in &def.fmps {
            let _ = writeln!(out, "    <FMP>{}</FMP>", crate::om::serialize_om_xml(fmp));
        }
        out.push_str("  </CDDefinition>\n");
    }
    out.push_str("</CD>\n");
    out
}

/// A definitional FMP read as `symbol(params...) := body`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefinitionalFmp {
    pub symbol: OmSymbol,
    pub params: Vec<String>,
    pub body: OmObject,
}

impl DefinitionalFmp {
    /// Zero for constants.
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DefinitionLookup {
    Definitional(DefinitionalFmp),
    NotDefinitional,
    NoSuchSymbol,
}

fn relation1_eq() -> OmSymbol {
    OmSymbol::standard("relation1", "eq")
}

/// Look for an FMP of the form `eq(name(x1..xn), body)` or `eq(name, body)`
/// with distinct variables `xi` and no other free variables in `body`.
/// The first such FMP in document order is the definition.
pub fn find_definition(cd: &ContentDictionary, name: &str) -> DefinitionLookup {
    let Some(def) = cd.definition(name) else {
        return DefinitionLookup::NoSuchSymbol;
    };
    let symbol = cd.symbol(name);
    let mut found = def.fmps.iter().filter_map(|fmp| definitional(fmp, &symbol));
    match found.next() {
        Some(first) => {
            let extra = found.count();
            if extra > 0 {
                warn!("{symbol}: {extra} further definitional FMP(s) ignored, first in document order wins");
            }
            DefinitionLookup::Definitional(first)
        }
        None => DefinitionLookup::NotDefinitional,
    }
}

fn definitional(fmp: &OmObject, symbol: &OmSymbol) -> Option<DefinitionalFmp> {
    let (eq, sides) = fmp.as_symbol_application()?;
    if *eq != relation1_eq() {
        return None;
    }
    let [lhs, rhs] = sides else {
        return None;
    };
    let params = match lhs {
        OmObject::Symbol(s) if s == symbol => Vec::new(),
        OmObject::Application { head, args } if head.as_symbol() == Some(symbol) => {
            let mut params = Vec::with_capacity(args.len());
            for a in args {
                match a {
                    OmObject::Variable(v) if !params.contains(v) => params.push(v.clone()),
                    _ => return None,
                }
            }
            params
        }
        _ => return None,
    };
    if !rhs.free_variables().iter().all(|v| params.contains(v)) {
        return None;
    }
    Some(DefinitionalFmp {
        symbol: symbol.clone(),
        params,
        body: rhs.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypedLink {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Iri,
}

/// Links written as FMPs `pred(subject, object)` where `pred` is one of
/// `link_predicates` and both sides are symbols or IRI strings.
pub fn extract_links(cd: &ContentDictionary, link_predicates: &[Iri]) -> Vec<TypedLink> {
    let mut out = Vec::new();
    for def in &cd.definitions {
        for fmp in &def.fmps {
            let Some((pred, args)) = fmp.as_symbol_application() else {
                continue;
            };
            let Ok(predicate) = Iri::new(pred.uri()) else {
                continue;
            };
            if !link_predicates.contains(&predicate) {
                continue;
            }
            let [s, o] = args else {
                continue;
            };
            if let (Some(subject), Some(object)) = (link_end(s), link_end(o)) {
                out.push(TypedLink {
                    subject,
                    predicate,
                    object,
                });
            }
        }
    }
    out
}

fn link_end(obj: &OmObject) -> Option<Iri> {
    match obj {
        OmObject::Symbol(s) => Iri::new(s.uri()).ok(),
        OmObject::String(s) => Iri::new(s.trim()).ok(),
        _ => None,
    }
}
