use std::collections::{BTreeMap, HashMap};

use super::{BlankNode, Graph, Iri, Literal, RdfError, Term, Triple};
use super::{RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};

/// Parse a Turtle document with no predeclared prefixes.
pub fn parse_turtle(text: &str, base: &Iri) -> Result<Graph, RdfError> {
    TurtleParser::new(base.clone()).parse(text)
}

/// Turtle reader for the subset used by statistical datasets:
/// `@prefix`/`PREFIX`, a leading `@base`, prefixed names, `a`, `;` and `,`
/// lists, `[ ... ]` blank nodes, labelled blank nodes, single-line strings,
/// numeric and boolean shorthand. Collections and long strings are rejected.
#[derive(Debug, Clone)]
pub struct TurtleParser {
    base: Iri,
    prefixes: BTreeMap<String, Iri>,
}

impl TurtleParser {
    pub fn new(base: Iri) -> Self {
        TurtleParser {
            base,
            prefixes: BTreeMap::new(),
        }
    }

    /// Prefixes that resolve even when the document does not declare them.
    pub fn with_prefixes<'a>(mut self, prefixes: impl IntoIterator<Item = (&'a String, &'a Iri)>) -> Self {
        for (p, ns) in prefixes {
            self.prefixes.insert(p.clone(), ns.clone());
        }
        self
    }

    pub fn parse(&self, text: &str) -> Result<Graph, RdfError> {
        let mut st = State {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            base: self.base.clone(),
            prefixes: self.prefixes.clone(),
            labels: HashMap::new(),
            graph: Graph::new(),
            seen_triple: false,
        };
        st.document()?;
        let mut graph = st.graph;
        for (p, ns) in st.prefixes {
            graph.set_prefix(p, ns);
        }
        Ok(graph)
    }
}

struct State {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    base: Iri,
    prefixes: BTreeMap<String, Iri>,
    labels: HashMap<String, BlankNode>,
    graph: Graph,
    seen_triple: bool,
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_alphabetic() && c != '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_base(c) || c == '_' || c == '-' || c.is_ascii_digit() || c == '\u{B7}'
}

impl State {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err<T>(&self, expected: impl Into<String>) -> Result<T, RdfError> {
        Err(RdfError::Syntax {
            line: self.line,
            column: self.col,
            expected: expected.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), RdfError> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("`{c}`"))
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn starts_with_keyword(&self, kw: &str, case_insensitive: bool) -> bool {
        let n = kw.chars().count();
        let got: String = self.chars[self.pos..].iter().take(n).collect();
        let same = if case_insensitive {
            got.eq_ignore_ascii_case(kw)
        } else {
            got == kw
        };
        same && self.peek_at(n).is_none_or(|c| c.is_whitespace() || c == '<')
    }

    fn document(&mut self) -> Result<(), RdfError> {
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else {
                return Ok(());
            };
            if c == '@' {
                self.at_directive()?;
            } else if self.starts_with_keyword("PREFIX", true) {
                self.advance(6);
                self.prefix_body()?;
            } else if self.starts_with_keyword("BASE", true) {
                self.advance(4);
                self.base_body()?;
            } else {
                self.triples()?;
                self.skip_ws();
                self.expect('.')?;
            }
        }
    }

    fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn at_directive(&mut self) -> Result<(), RdfError> {
        if self.starts_with_keyword("@prefix", false) {
            self.advance(7);
            self.prefix_body()?;
        } else if self.starts_with_keyword("@base", false) {
            self.advance(5);
            self.base_body()?;
        } else {
            return self.err("`@prefix` or `@base`");
        }
        self.skip_ws();
        self.expect('.')
    }

    fn prefix_body(&mut self) -> Result<(), RdfError> {
        self.skip_ws();
        let prefix = self.pn_prefix();
        self.expect(':')?;
        self.skip_ws();
        let ns = self.iriref()?;
        self.prefixes.insert(prefix, ns);
        Ok(())
    }

    fn base_body(&mut self) -> Result<(), RdfError> {
        if self.seen_triple {
            return self.err("triples (`@base` is only allowed before the first triple)");
        }
        self.skip_ws();
        self.base = self.iriref()?;
        Ok(())
    }

    fn pn_prefix(&mut self) -> String {
        let mut out = String::new();
        if !self.peek().is_some_and(is_pn_chars_base) {
            return out;
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || (c == '.' && self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == '.')) {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }

    fn iriref(&mut self) -> Result<Iri, RdfError> {
        self.expect('<')?;
        let mut raw = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => raw.push(self.unicode_escape()?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return self.err("`>` closing IRI");
                }
                Some(c) => raw.push(c),
                None => return self.err("`>` closing IRI"),
            }
        }
        self.resolve(&raw)
    }

    fn resolve(&self, raw: &str) -> Result<Iri, RdfError> {
        if super::is_absolute_iri(raw) {
            return Iri::new(raw);
        }
        let base = url::Url::parse(self.base.as_str()).map_err(|_| RdfError::InvalidIri(self.base.to_string()))?;
        let joined = base.join(raw).map_err(|_| RdfError::InvalidIri(raw.to_string()))?;
        Iri::new(joined.to_string())
    }

    fn unicode_escape(&mut self) -> Result<char, RdfError> {
        let n = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return self.err("`\\u` or `\\U` escape"),
        };
        let mut hex = String::new();
        for _ in 0..n {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => hex.push(c),
                _ => return self.err("hex digit"),
            }
        }
        match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
            Some(c) => Ok(c),
            None => self.err("valid code point"),
        }
    }

    fn triples(&mut self) -> Result<(), RdfError> {
        self.seen_triple = true;
        if self.peek() == Some('[') {
            let subject = self.blank_node_property_list()?;
            self.skip_ws();
            if self.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.skip_ws();
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Term, RdfError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(Term::Blank(self.blank_label()?)),
            Some('(') => self.err("subject (collections are not supported)"),
            Some(c) if is_pn_chars_base(c) || c == ':' => Ok(Term::Iri(self.prefixed_name()?)),
            _ => self.err("subject"),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), RdfError> {
        loop {
            self.skip_ws();
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Iri, RdfError> {
        if self.peek() == Some('a') && self.peek_at(1).is_none_or(|c| c.is_whitespace() || c == '<' || c == '[' || c == '"') {
            self.bump();
            return Iri::new(RDF_TYPE);
        }
        match self.peek() {
            Some('<') => self.iriref(),
            Some(c) if is_pn_chars_base(c) || c == ':' => self.prefixed_name(),
            _ => self.err("predicate"),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Iri) -> Result<(), RdfError> {
        loop {
            self.skip_ws();
            let object = self.object()?;
            self.graph.insert(Triple::new(subject.clone(), predicate.clone(), object));
            self.skip_ws();
            if self.peek() == Some(',') {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, RdfError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(Term::Blank(self.blank_label()?)),
            Some('[') => self.blank_node_property_list(),
            Some('"') | Some('\'') => Ok(Term::Literal(self.rdf_literal()?)),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => Ok(Term::Literal(self.numeric()?)),
            Some('(') => self.err("object (collections are not supported)"),
            Some(_) if self.starts_with_bool("true") => {
                self.advance(4);
                Ok(Term::Literal(Literal::typed("true", Iri::new(XSD_BOOLEAN)?)))
            }
            Some(_) if self.starts_with_bool("false") => {
                self.advance(5);
                Ok(Term::Literal(Literal::typed("false", Iri::new(XSD_BOOLEAN)?)))
            }
            Some(c) if is_pn_chars_base(c) || c == ':' => Ok(Term::Iri(self.prefixed_name()?)),
            _ => self.err("object"),
        }
    }

    fn starts_with_bool(&self, kw: &str) -> bool {
        let n = kw.len();
        let got: String = self.chars[self.pos..].iter().take(n).collect();
        got == kw && self.peek_at(n).is_none_or(|c| !is_pn_chars(c) && c != ':')
    }

    fn blank_node_property_list(&mut self) -> Result<Term, RdfError> {
        self.expect('[')?;
        let node = Term::Blank(self.graph.fresh_blank());
        self.skip_ws();
        if self.peek() != Some(']') {
            self.predicate_object_list(&node)?;
            self.skip_ws();
        }
        self.expect(']')?;
        Ok(node)
    }

    fn blank_label(&mut self) -> Result<BlankNode, RdfError> {
        self.advance(2);
        let mut label = String::new();
        match self.peek() {
            Some(c) if is_pn_chars_base(c) || c == '_' || c.is_ascii_digit() => {}
            _ => return self.err("blank node label"),
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || (c == '.' && self.peek_at(1).is_some_and(is_pn_chars)) {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if let Some(b) = self.labels.get(&label) {
            return Ok(b.clone());
        }
        let b = self.graph.fresh_blank();
        self.labels.insert(label, b.clone());
        Ok(b)
    }

    fn prefixed_name(&mut self) -> Result<Iri, RdfError> {
        let prefix = self.pn_prefix();
        if self.peek() != Some(':') {
            return self.err("`:` in prefixed name");
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            let continues = is_pn_chars(c)
                || c == ':'
                || c == '%'
                || (c == '.' && self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == ':' || n == '%'));
            if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => local.push(e),
                    _ => return self.err("escaped local-name character"),
                }
            } else if continues {
                local.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let Some(ns) = self.prefixes.get(&prefix) else {
            return Err(RdfError::UnknownPrefix(prefix));
        };
        Iri::new(format!("{}{}", ns.as_str(), local))
    }

    fn rdf_literal(&mut self) -> Result<Literal, RdfError> {
        let quote = self.bump().unwrap_or('"');
        if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
            return self.err("single-line string (long strings are not supported)");
        }
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some(c) if c == quote => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{C}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') | Some('U') => {
                            lexical.push(self.unicode_escape()?);
                            continue;
                        }
                        _ => return self.err("string escape"),
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some('\n') | Some('\r') | None => return self.err(format!("`{quote}` closing string")),
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let mut tag = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || (c == '-' && !tag.is_empty()) {
                        tag.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if tag.is_empty() || !tag.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                    return self.err("language tag");
                }
                Ok(Literal::lang(lexical, tag))
            }
            Some('^') => {
                self.bump();
                self.expect('^')?;
                let dt = match self.peek() {
                    Some('<') => self.iriref()?,
                    _ => self.prefixed_name()?,
                };
                Ok(Literal::typed(lexical, dt))
            }
            _ => Ok(Literal::plain(lexical)),
        }
    }

    fn numeric(&mut self) -> Result<Literal, RdfError> {
        let mut lex = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            lex.push(c);
            self.bump();
        }
        let mut int_digits = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            lex.push(c);
            self.bump();
            int_digits += 1;
        }
        let mut frac_digits = 0;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            lex.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                lex.push(c);
                self.bump();
                frac_digits += 1;
            }
        }
        if int_digits + frac_digits == 0 {
            return self.err("number");
        }
        let mut exponent = false;
        if let Some('e' | 'E') = self.peek() {
            exponent = true;
            lex.push('e');
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                lex.push(c);
                self.bump();
            }
            let mut exp_digits = 0;
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                lex.push(c);
                self.bump();
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return self.err("exponent digits");
            }
        }
        let dt = if exponent {
            XSD_DOUBLE
        } else if frac_digits > 0 {
            XSD_DECIMAL
        } else {
            XSD_INTEGER
        };
        Ok(Literal::typed(lex, Iri::new(dt)?))
    }
}
