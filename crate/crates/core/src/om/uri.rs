use std::fmt;

use thiserror::Error;

use super::{is_ncname, OmSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UriScheme {
    /// `cdbase/cd#name`: the whole dictionary has to be fetched.
    Hash,
    /// `cdbase/cd/name`: each symbol has its own document.
    Slash,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolUri {
    pub scheme: UriScheme,
    pub cdbase: String,
    pub cd: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolUriError {
    #[error("`{0}` is not a symbol URI")]
    Malformed(String),
}

impl SymbolUri {
    pub fn hash(cdbase: &str, cd: &str, name: &str) -> Self {
        SymbolUri {
            scheme: UriScheme::Hash,
            cdbase: cdbase.to_string(),
            cd: cd.to_string(),
            name: name.to_string(),
        }
    }

    pub fn slash(cdbase: &str, cd: &str, name: &str) -> Self {
        SymbolUri {
            scheme: UriScheme::Slash,
            ..SymbolUri::hash(cdbase, cd, name)
        }
    }

    /// URL of the dictionary document, without fragment.
    pub fn cd_url(&self) -> String {
        format!("{}/{}", self.cdbase.trim_end_matches('/'), self.cd)
    }

    pub fn symbol(&self) -> OmSymbol {
        OmSymbol::new(self.cdbase.trim_end_matches('/'), &self.cd, &self.name)
    }
}

impl From<&OmSymbol> for SymbolUri {
    fn from(s: &OmSymbol) -> Self {
        SymbolUri::hash(&s.cdbase, &s.cd, &s.name)
    }
}

impl fmt::Display for SymbolUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_symbol_uri(self))
    }
}

pub fn render_symbol_uri(u: &SymbolUri) -> String {
    let sep = match u.scheme {
        UriScheme::Hash => '#',
        UriScheme::Slash => '/',
    };
    format!("{}{sep}{}", u.cd_url(), u.name)
}

/// Split a symbol URI into its parts. A fragment selects the hash scheme;
/// otherwise the last two path segments are taken as `cd/name` and
/// everything before them is the cdbase.
pub fn parse_symbol_uri(iri: &str) -> Result<SymbolUri, SymbolUriError> {
    let malformed = || SymbolUriError::Malformed(iri.to_string());
    let scheme_end = iri.find("://").ok_or_else(malformed)?;
    if !crate::rdf::is_absolute_iri(iri) || iri.contains('?') {
        return Err(malformed());
    }
    let authority_end = iri[scheme_end + 3..]
        .find(['/', '#'])
        .map(|i| i + scheme_end + 3)
        .unwrap_or(iri.len());
    if authority_end == scheme_end + 3 {
        return Err(malformed());
    }

    let (path_part, fragment) = match iri.find('#') {
        Some(i) => (&iri[..i], Some(&iri[i + 1..])),
        None => (iri, None),
    };
    if path_part.len() <= authority_end {
        return Err(malformed());
    }
    let (prefix, last) = path_part.rsplit_once('/').ok_or_else(malformed)?;
    let uri = match fragment {
        Some(name) => SymbolUri::hash(prefix, last, name),
        None => {
            if prefix.len() <= authority_end {
                return Err(malformed());
            }
            let (cdbase, cd) = prefix.rsplit_once('/').ok_or_else(malformed)?;
            SymbolUri::slash(cdbase, cd, last)
        }
    };
    // `cd_url` joins with a single slash, so an empty segment before the CD
    // could never be rendered back.
    if uri.cdbase.len() < authority_end || uri.cdbase.ends_with('/') || !is_ncname(&uri.cd) || !is_ncname(&uri.name) {
        return Err(malformed());
    }
    Ok(uri)
}
