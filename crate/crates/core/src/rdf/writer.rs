use std::fmt::Write;

use super::{escape_string, Graph, Iri, Literal, Term, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_INTEGER};

/// Serialize `g` as Turtle. Output is deterministic: prefixes sorted by name,
/// subjects and predicate/object pairs in term order.
pub fn serialize_turtle(g: &Graph) -> String {
    let mut out = String::new();
    for (p, ns) in g.prefixes() {
        let _ = writeln!(out, "@prefix {p}: <{ns}> .");
    }
    if !g.prefixes().is_empty() && !g.is_empty() {
        out.push('\n');
    }

    let mut current_subject: Option<&Term> = None;
    let mut current_predicate: Option<&Iri> = None;
    for t in g.iter() {
        if current_subject == Some(t.subject()) {
            if current_predicate == Some(t.predicate()) {
                out.push_str(" ,\n        ");
            } else {
                out.push_str(" ;\n    ");
                out.push_str(&predicate(g, t.predicate()));
                out.push(' ');
            }
        } else {
            if current_subject.is_some() {
                out.push_str(" .\n");
            }
            out.push_str(&term(g, t.subject()));
            out.push_str("\n    ");
            out.push_str(&predicate(g, t.predicate()));
            out.push(' ');
        }
        out.push_str(&term(g, t.object()));
        current_subject = Some(t.subject());
        current_predicate = Some(t.predicate());
    }
    if current_subject.is_some() {
        out.push_str(" .\n");
    }
    out
}

fn predicate(g: &Graph, p: &Iri) -> String {
    if p.as_str() == RDF_TYPE {
        "a".to_string()
    } else {
        iri(g, p)
    }
}

fn term(g: &Graph, t: &Term) -> String {
    match t {
        Term::Iri(i) => iri(g, i),
        Term::Blank(b) => format!("_:{}", b.label()),
        Term::Literal(l) => literal(g, l),
    }
}

fn iri(g: &Graph, i: &Iri) -> String {
    let best = g
        .prefixes()
        .iter()
        .filter(|(_, ns)| i.as_str().starts_with(ns.as_str()))
        .filter(|(_, ns)| is_safe_local(&i.as_str()[ns.as_str().len()..]))
        .max_by_key(|(_, ns)| ns.as_str().len());
    match best {
        Some((p, ns)) => format!("{p}:{}", &i.as_str()[ns.as_str().len()..]),
        None => format!("<{i}>"),
    }
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => return true,
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        Some(_) => return false,
    }
    local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn literal(g: &Graph, l: &Literal) -> String {
    if let Some(lang) = l.language() {
        return format!("\"{}\"@{lang}", escape_string(l.lexical()));
    }
    let Some(dt) = l.datatype() else {
        return format!("\"{}\"", escape_string(l.lexical()));
    };
    let lex = l.lexical();
    let bare = match dt.as_str() {
        XSD_INTEGER => is_integer_lexical(lex),
        XSD_DECIMAL => is_decimal_lexical(lex),
        XSD_BOOLEAN => lex == "true" || lex == "false",
        _ => false,
    };
    if bare {
        lex.to_string()
    } else {
        format!("\"{}\"^^{}", escape_string(lex), iri(g, dt))
    }
}

fn is_integer_lexical(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

fn is_decimal_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            int.chars().all(|c| c.is_ascii_digit())
                && !frac.is_empty()
                && frac.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_turtle, BlankNode, Triple, XSD_DOUBLE};

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn empty_graph_writes_nothing() {
        assert_eq!(serialize_turtle(&Graph::new()), "");
    }

    #[test]
    fn empty_graph_with_prefixes_writes_only_declarations() {
        let mut g = Graph::new();
        g.set_prefix("ex", iri("http://ex.org/"));
        assert_eq!(serialize_turtle(&g), "@prefix ex: <http://ex.org/> .\n");
    }

    #[test]
    fn abbreviates_and_groups() {
        let mut g = Graph::new();
        g.set_prefix("ex", iri("http://ex.org/"));
        let s = iri("http://ex.org/s");
        g.insert(Triple::new(s.clone(), iri(RDF_TYPE), iri("http://ex.org/T")));
        g.insert(Triple::new(s.clone(), iri("http://ex.org/v"), Literal::typed("693", iri(XSD_DECIMAL))));
        g.insert(Triple::new(s.clone(), iri("http://ex.org/v"), Literal::typed("1.5", iri(XSD_DECIMAL))));
        g.insert(Triple::new(s, iri("http://ex.org/w"), Literal::typed("1e3", iri(XSD_DOUBLE))));
        let text = serialize_turtle(&g);
        assert!(text.starts_with("@prefix ex: <http://ex.org/> .\n\nex:s\n"), "{text}");
        assert!(text.contains("    a ex:T .\n"), "{text}");
        assert!(text.contains("\"693\"^^<http://www.w3.org/2001/XMLSchema#decimal>"), "{text}");
        assert!(text.contains("1.5"), "{text}");
        let back = parse_turtle(&text, &iri("http://base/")).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn unsafe_locals_stay_bracketed() {
        let mut g = Graph::new();
        g.set_prefix("ex", iri("http://ex.org/"));
        g.insert(Triple::new(iri("http://ex.org/a.b"), iri("http://ex.org/p"), iri("http://ex.org/x/y")));
        let text = serialize_turtle(&g);
        assert!(text.contains("<http://ex.org/a.b>"));
        assert!(text.contains("<http://ex.org/x/y>"));
    }

    #[test]
    fn blank_node_round_trip_is_isomorphic() {
        let mut g = Graph::new();
        g.insert(Triple::new(BlankNode::new("b7"), iri("http://a/p"), Literal::plain("x\"y")));
        let back = parse_turtle(&serialize_turtle(&g), &iri("http://base/")).unwrap();
        assert!(back.is_isomorphic(&g));
    }
}
