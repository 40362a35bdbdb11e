//! In-memory RDF graph with a pragmatic Turtle reader and writer.
//!
//! Terms are kept fully expanded: prefixed names are resolved while parsing
//! and the prefix table is only retained so the writer can abbreviate again.

mod iso;
mod turtle;
mod writer;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use turtle::{parse_turtle, TurtleParser};
pub use writer::serialize_turtle;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_VALUE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#value";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_INT: &str = "http://www.w3.org/2001/XMLSchema#int";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfError {
    #[error("syntax error at {line}:{column}: expected {expected}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
    },
    #[error("unknown prefix `{0}:`")]
    UnknownPrefix(String),
    #[error("invalid IRI <{0}>")]
    InvalidIri(String),
    #[error("literal cannot carry both a datatype and a language tag")]
    DatatypeAndLanguage,
}

/// An absolute IRI. The fragment, if any, is kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        if is_absolute_iri(&value) {
            Ok(Iri(value))
        } else {
            Err(RdfError::InvalidIri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// The IRI with any `#fragment` removed.
    pub fn without_fragment(&self) -> &str {
        match self.0.find('#') {
            Some(i) => &self.0[..i],
            None => &self.0,
        }
    }

    pub fn fragment(&self) -> Option<&str> {
        self.0.find('#').map(|i| &self.0[i + 1..])
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_absolute_iri(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let mut chars = scheme.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')) {
        return false;
    }
    !s.chars().any(|c| {
        c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Option<Iri>,
    language: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Some(datatype),
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language.into()),
        }
    }

    pub fn new(
        lexical: impl Into<String>,
        datatype: Option<Iri>,
        language: Option<String>,
    ) -> Result<Self, RdfError> {
        if datatype.is_some() && language.is_some() {
            return Err(RdfError::DatatypeAndLanguage);
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype,
            language,
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&Iri> {
        self.datatype.as_ref()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Self {
        BlankNode(label.into())
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Blank(BlankNode),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&BlankNode> {
        match self {
            Term::Blank(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::Blank(b)
    }
}

/// N-Triples form.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{}>", i.0),
            Term::Blank(b) => write!(f, "_:{}", b.0),
            Term::Literal(l) => {
                write!(f, "\"{}\"", escape_string(&l.lexical))?;
                if let Some(lang) = &l.language {
                    write!(f, "@{lang}")
                } else if let Some(dt) = &l.datatype {
                    write!(f, "^^<{}>", dt.0)
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Literals, then IRIs, then blank nodes; field by field within each kind.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(t: &Term) -> u8 {
            match t {
                Term::Literal(_) => 0,
                Term::Iri(_) => 1,
                Term::Blank(_) => 2,
            }
        }
        match (self, other) {
            (Term::Literal(a), Term::Literal(b)) => (&a.lexical, &a.language, &a.datatype).cmp(&(&b.lexical, &b.language, &b.datatype)),
            (Term::Iri(a), Term::Iri(b)) => a.cmp(b),
            (Term::Blank(a), Term::Blank(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// A triple; construction rejects literal subjects.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Term>, predicate: Iri, object: impl Into<Term>) -> Self {
        let subject = subject.into();
        assert!(
            !matches!(subject, Term::Literal(_)),
            "literal in subject position"
        );
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    /// The smallest triple with this subject (and predicate, if given).
    fn lower_bound(subject: &Term, predicate: Option<&Iri>) -> Triple {
        Triple {
            subject: subject.clone(),
            predicate: predicate.cloned().unwrap_or(Iri(String::new())),
            object: Term::Literal(Literal::plain("")),
        }
    }
}

impl Ord for Triple {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.subject, &self.predicate, &self.object).cmp(&(&other.subject, &other.predicate, &other.object))
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

/// A set of triples plus the prefix table used to abbreviate them.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, Iri>,
    next_blank: usize,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if let Term::Blank(b) = &triple.subject {
            self.note_blank(b);
        }
        if let Term::Blank(b) = &triple.object {
            self.note_blank(b);
        }
        self.triples.insert(triple)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, Iri> {
        &self.prefixes
    }

    pub fn set_prefix(&mut self, prefix: impl Into<String>, namespace: Iri) {
        self.prefixes.insert(prefix.into(), namespace);
    }

    /// A blank node whose `bN` label is not used anywhere in the graph yet.
    pub fn fresh_blank(&mut self) -> BlankNode {
        let b = BlankNode(format!("b{}", self.next_blank));
        self.next_blank += 1;
        b
    }

    fn note_blank(&mut self, b: &BlankNode) {
        if let Some(n) = b.0.strip_prefix('b').and_then(|d| d.parse::<usize>().ok()) {
            self.next_blank = self.next_blank.max(n + 1);
        }
    }

    /// Triples with subject `s`, and predicate `p` when given, in order.
    fn with_subject<'a>(&'a self, s: &'a Term, p: Option<&'a Iri>) -> impl Iterator<Item = &'a Triple> + 'a {
        self.triples
            .range(Triple::lower_bound(s, p)..)
            .take_while(move |t| &t.subject == s && p.is_none_or(|p| &t.predicate == p))
    }

    /// Triples matching every bound position, in sorted order.
    pub fn matching(&self, s: Option<&Term>, p: Option<&Iri>, o: Option<&Term>) -> Vec<Triple> {
        let candidates: Box<dyn Iterator<Item = &Triple>> = match s {
            Some(s) => Box::new(self.with_subject(s, p)),
            None => Box::new(self.triples.iter()),
        };
        candidates
            .filter(|t| p.is_none_or(|p| &t.predicate == p))
            .filter(|t| o.is_none_or(|o| &t.object == o))
            .cloned()
            .collect()
    }

    /// Objects of `(s, p, ?)` in sorted order.
    pub fn objects(&self, s: &Term, p: &Iri) -> Vec<Term> {
        self.with_subject(s, Some(p)).map(|t| t.object.clone()).collect()
    }

    pub fn blank_nodes(&self) -> BTreeSet<BlankNode> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            if let Term::Blank(b) = &t.subject {
                out.insert(b.clone());
            }
            if let Term::Blank(b) = &t.object {
                out.insert(b.clone());
            }
        }
        out
    }

    /// True when some bijection between blank nodes maps `self` onto `other`.
    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        iso::isomorphic(self, other)
    }
}

/// Free-function form of [`Graph::matching`].
pub fn match_triples(g: &Graph, s: Option<&Term>, p: Option<&Iri>, o: Option<&Term>) -> Vec<Triple> {
    g.matching(s, p, o)
}

impl Extend<Triple> for Graph {
    fn extend<T: IntoIterator<Item = Triple>>(&mut self, iter: T) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<T: IntoIterator<Item = Triple>>(iter: T) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}
