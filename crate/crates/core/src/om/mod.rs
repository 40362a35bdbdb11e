//! OpenMath objects: the tree model, its XML encoding and symbol URIs.

mod uri;
mod xml;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use thiserror::Error;

pub use uri::{parse_symbol_uri, render_symbol_uri, SymbolUri, SymbolUriError, UriScheme};
pub use xml::{parse_om_xml, serialize_om_xml, ParseContext};

/// Default base of the official content dictionaries.
pub const DEFAULT_CDBASE: &str = "http://www.openmath.org/cd";
/// XML namespace of the object encoding.
pub const OPENMATH_NS: &str = "http://www.openmath.org/OpenMath";
/// Media type used for both objects and content dictionaries.
pub const OPENMATH_MIME: &str = "application/openmath+xml";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OmError {
    #[error(transparent)]
    Xml(#[from] crate::xml::XmlError),
    #[error("bad <{element}>: {reason}")]
    Encoding { element: String, reason: String },
}

impl OmError {
    pub(crate) fn encoding(element: &str, reason: impl Into<String>) -> Self {
        OmError::Encoding {
            element: element.to_string(),
            reason: reason.into(),
        }
    }
}

/// Letters, digits, `.`, `-` and `_`, not starting with a digit, `.` or `-`.
pub fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '.' | '-' | '_'))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OmSymbol {
    pub cdbase: String,
    pub cd: String,
    pub name: String,
}

impl OmSymbol {
    pub fn new(cdbase: impl Into<String>, cd: impl Into<String>, name: impl Into<String>) -> Self {
        OmSymbol {
            cdbase: cdbase.into(),
            cd: cd.into(),
            name: name.into(),
        }
    }

    /// A symbol from one of the official dictionaries.
    pub fn standard(cd: &str, name: &str) -> Self {
        OmSymbol::new(DEFAULT_CDBASE, cd, name)
    }

    /// The `cdbase/cd#name` form.
    pub fn uri(&self) -> String {
        render_symbol_uri(&SymbolUri::hash(&self.cdbase, &self.cd, &self.name))
    }
}

impl fmt::Display for OmSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.uri())
    }
}

#[derive(Debug, Clone)]
pub enum OmObject {
    Symbol(OmSymbol),
    Integer(BigInt),
    Float(f64),
    Variable(String),
    Application {
        head: Box<OmObject>,
        args: Vec<OmObject>,
    },
    Binding {
        binder: Box<OmObject>,
        vars: Vec<String>,
        body: Box<OmObject>,
    },
    String(String),
}

/// Structural equality; floats compare bit-for-bit and never equal integers.
impl PartialEq for OmObject {
    fn eq(&self, other: &Self) -> bool {
        use OmObject::*;
        match (self, other) {
            (Symbol(a), Symbol(b)) => a == b,
            (Integer(a), Integer(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Variable(a), Variable(b)) => a == b,
            (String(a), String(b)) => a == b,
            (Application { head: h1, args: a1 }, Application { head: h2, args: a2 }) => h1 == h2 && a1 == a2,
            (
                Binding { binder: b1, vars: v1, body: x1 },
                Binding { binder: b2, vars: v2, body: x2 },
            ) => b1 == b2 && v1 == v2 && x1 == x2,
            _ => false,
        }
    }
}

impl Eq for OmObject {}

impl Hash for OmObject {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            OmObject::Symbol(s) => s.hash(state),
            OmObject::Integer(i) => i.hash(state),
            OmObject::Float(f) => f.to_bits().hash(state),
            OmObject::Variable(v) | OmObject::String(v) => v.hash(state),
            OmObject::Application { head, args } => {
                head.hash(state);
                args.hash(state);
            }
            OmObject::Binding { binder, vars, body } => {
                binder.hash(state);
                vars.hash(state);
                body.hash(state);
            }
        }
    }
}

impl OmObject {
    pub fn symbol(cdbase: &str, cd: &str, name: &str) -> Self {
        OmObject::Symbol(OmSymbol::new(cdbase, cd, name))
    }

    pub fn int(i: i64) -> Self {
        OmObject::Integer(BigInt::from(i))
    }

    pub fn var(name: &str) -> Self {
        OmObject::Variable(name.to_string())
    }

    pub fn apply(head: OmObject, args: Vec<OmObject>) -> Self {
        OmObject::Application {
            head: Box::new(head),
            args,
        }
    }

    /// `apply` with a symbol head.
    pub fn call(head: OmSymbol, args: Vec<OmObject>) -> Self {
        OmObject::apply(OmObject::Symbol(head), args)
    }

    pub fn as_symbol(&self) -> Option<&OmSymbol> {
        match self {
            OmObject::Symbol(s) => Some(s),
            _ => None,
        }
    }

    /// Head symbol and arguments of an application whose head is a symbol.
    pub fn as_symbol_application(&self) -> Option<(&OmSymbol, &[OmObject])> {
        match self {
            OmObject::Application { head, args } => head.as_symbol().map(|s| (s, args.as_slice())),
            _ => None,
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            OmObject::Variable(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            OmObject::Application { head, args } => {
                head.collect_free(bound, out);
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            OmObject::Binding { binder, vars, body } => {
                binder.collect_free(bound, out);
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(n);
            }
            _ => {}
        }
    }

    /// Every symbol occurring anywhere in the object.
    pub fn symbols(&self) -> BTreeSet<OmSymbol> {
        let mut out = BTreeSet::new();
        self.walk(&mut |o| {
            if let OmObject::Symbol(s) = o {
                out.insert(s.clone());
            }
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&OmObject)) {
        f(self);
        match self {
            OmObject::Application { head, args } => {
                head.walk(f);
                for a in args {
                    a.walk(f);
                }
            }
            OmObject::Binding { binder, body, .. } => {
                binder.walk(f);
                body.walk(f);
            }
            _ => {}
        }
    }

    /// Check the structural invariants the XML reader enforces.
    pub fn validate(&self) -> Result<(), OmError> {
        match self {
            OmObject::Symbol(s) => {
                if s.cdbase.is_empty() {
                    return Err(OmError::encoding("OMS", "empty cdbase"));
                }
                if !is_ncname(&s.cd) || !is_ncname(&s.name) {
                    return Err(OmError::encoding("OMS", format!("`{}#{}` is not a valid cd/name pair", s.cd, s.name)));
                }
                Ok(())
            }
            OmObject::Variable(v) if !is_ncname(v) => Err(OmError::encoding("OMV", format!("invalid name `{v}`"))),
            OmObject::Application { head, args } => {
                if args.is_empty() {
                    return Err(OmError::encoding("OMA", "application needs at least one argument"));
                }
                head.validate()?;
                args.iter().try_for_each(OmObject::validate)
            }
            OmObject::Binding { binder, vars, body } => {
                if vars.is_empty() {
                    return Err(OmError::encoding("OMBVAR", "no bound variables"));
                }
                let distinct: BTreeSet<&String> = vars.iter().collect();
                if distinct.len() != vars.len() {
                    return Err(OmError::encoding("OMBVAR", "bound variables are not distinct"));
                }
                if let Some(v) = vars.iter().find(|v| !is_ncname(v)) {
                    return Err(OmError::encoding("OMV", format!("invalid name `{v}`")));
                }
                binder.validate()?;
                body.validate()
            }
            _ => Ok(()),
        }
    }
}

impl From<OmSymbol> for OmObject {
    fn from(s: OmSymbol) -> Self {
        OmObject::Symbol(s)
    }
}

/// Compact infix-ish rendering for diagnostics.
impl fmt::Display for OmObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmObject::Symbol(s) => write!(f, "{}#{}", s.cd, s.name),
            OmObject::Integer(i) => write!(f, "{i}"),
            OmObject::Float(x) => write!(f, "{x:?}"),
            OmObject::Variable(v) => write!(f, "${v}"),
            OmObject::String(s) => write!(f, "{s:?}"),
            OmObject::Application { head, args } => {
                write!(f, "{head}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            OmObject::Binding { binder, vars, body } => {
                write!(f, "{binder}[")?;
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "${v}")?;
                }
                write!(f, "]. {body}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_and_float_are_distinct() {
        assert_ne!(OmObject::int(2), OmObject::Float(2.0));
        assert_eq!(OmObject::Float(f64::NAN), OmObject::Float(f64::NAN));
    }

    #[test]
    fn ncnames() {
        assert!(is_ncname("arith1"));
        assert!(is_ncname("unary_minus"));
        assert!(is_ncname("_x.y-z"));
        assert!(!is_ncname(""));
        assert!(!is_ncname("1abc"));
        assert!(!is_ncname("a:b"));
        assert!(!is_ncname("a b"));
    }

    #[test]
    fn free_variables_respect_binders() {
        let lambda = OmObject::symbol(DEFAULT_CDBASE, "fns1", "lambda");
        let body = OmObject::call(OmSymbol::standard("arith1", "plus"), vec![OmObject::var("x"), OmObject::var("y")]);
        let bound = OmObject::Binding {
            binder: Box::new(lambda),
            vars: vec!["x".into()],
            body: Box::new(body),
        };
        assert_eq!(bound.free_variables(), BTreeSet::from(["y".to_string()]));
    }

    #[test]
    fn validate_catches_invariant_breaks() {
        let plus = OmSymbol::standard("arith1", "plus");
        assert!(OmObject::call(plus.clone(), vec![]).validate().is_err());
        let dup = OmObject::Binding {
            binder: Box::new(plus.clone().into()),
            vars: vec!["x".into(), "x".into()],
            body: Box::new(OmObject::var("x")),
        };
        assert!(dup.validate().is_err());
        assert!(OmObject::symbol("", "arith1", "plus").validate().is_err());
        assert!(OmObject::call(plus, vec![OmObject::int(1)]).validate().is_ok());
    }

    #[test]
    fn symbol_uri_uses_hash_form() {
        assert_eq!(
            OmSymbol::standard("arith1", "divide").uri(),
            "http://www.openmath.org/cd/arith1#divide"
        );
    }
}
