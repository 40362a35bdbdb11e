//! proptest strategies for graphs, OpenMath objects and derivations.

use proptest::collection::vec;
use proptest::prelude::*;

use crate::annotations::{ArgSource, Derivation, DerivationArg};
use crate::decimal::{canonical_decimal, Decimal};
use crate::om::{OmObject, OmSymbol, DEFAULT_CDBASE};
use crate::rdf::{BlankNode, Graph, Iri, Literal, Term, Triple, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, XSD_STRING};

const NAMESPACES: [&str; 4] = [
    "http://ex.org/",
    "http://example.org/data/ahs/",
    "http://purl.org/NET/scovo#",
    "https://other.example/a/b?q=",
];

/// Local parts that are sometimes, but not always, valid prefixed-name locals.
fn local_part() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-zA-Z0-9_]{0,8}",
        "[0-9]{1,4}",
        "[a-z]{1,4}[.-][a-z0-9]{1,3}",
        "[a-z]{1,3}/[a-z]{1,3}",
        "[a-z]{1,3}%2[0-9A-F]",
        Just(String::new()),
    ]
}

pub fn iri() -> impl Strategy<Value = Iri> {
    (prop::sample::select(NAMESPACES.to_vec()), local_part())
        .prop_map(|(ns, local)| Iri::new(format!("{ns}{local}")).expect("generated IRI is absolute"))
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z0-9 ]{0,12}",
        "[ -~]{0,16}",
        "[\\\\\"'\n\t\r a]{0,6}",
        "[αβγ€😀中文 ]{0,6}",
    ]
}

pub fn literal() -> impl Strategy<Value = Literal> {
    let typed = |dt: &'static str| move |lex: String| Literal::typed(lex, Iri::new(dt).expect("datatype"));
    prop_oneof![
        text().prop_map(Literal::plain),
        (text(), prop::sample::select(vec!["en", "en-GB", "de", "x-private1"])).prop_map(|(t, l)| Literal::lang(t, l)),
        "-?[0-9]{1,12}".prop_map(typed(XSD_INTEGER)),
        "-?[0-9]{0,6}\\.[0-9]{1,6}".prop_map(typed(XSD_DECIMAL)),
        "-?[0-9]\\.[0-9]{1,4}[eE]-?[0-9]{1,2}".prop_map(typed(XSD_DOUBLE)),
        "(true|false)".prop_map(typed(XSD_BOOLEAN)),
        text().prop_map(typed(XSD_STRING)),
        (text(), iri()).prop_map(|(t, dt)| Literal::typed(t, dt)),
    ]
}

fn blank() -> impl Strategy<Value = BlankNode> {
    (0u8..6).prop_map(|n| BlankNode::new(format!("b{n}")))
}

fn subject() -> impl Strategy<Value = Term> {
    prop_oneof![3 => iri().prop_map(Term::Iri), 1 => blank().prop_map(Term::Blank)]
}

fn object() -> impl Strategy<Value = Term> {
    prop_oneof![
        2 => iri().prop_map(Term::Iri),
        1 => blank().prop_map(Term::Blank),
        3 => literal().prop_map(Term::Literal),
    ]
}

/// Graphs of up to 24 triples over a few namespaces, with blank nodes
/// (including cycles through them) and literals of every shape.
pub fn graph() -> impl Strategy<Value = Graph> {
    let triple = (subject(), iri(), object()).prop_map(|(s, p, o)| Triple::new(s, p, o));
    (vec(triple, 0..24), prop::bool::ANY).prop_map(|(triples, with_prefixes)| {
        let mut g = Graph::new();
        if with_prefixes {
            g.set_prefix("ex", Iri::new(NAMESPACES[0]).expect("ns"));
            g.set_prefix("ahs", Iri::new(NAMESPACES[1]).expect("ns"));
            g.set_prefix("scv", Iri::new(NAMESPACES[2]).expect("ns"));
        }
        for t in triples {
            g.insert(t);
        }
        g
    })
}

fn ncname() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_.-]{0,7}"
}

pub fn symbol() -> impl Strategy<Value = OmSymbol> {
    let cdbase = prop::sample::select(vec![DEFAULT_CDBASE, "http://example.org", "http://localhost:8080/cds"]);
    (cdbase, ncname(), ncname()).prop_map(|(b, cd, name)| OmSymbol::new(b, cd, name))
}

fn finite_float() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        (-1_000_000i64..1_000_000, 0u32..6).prop_map(|(m, e)| m as f64 / 10f64.powi(e as i32)),
    ]
}

fn om_leaf() -> impl Strategy<Value = OmObject> {
    prop_oneof![
        symbol().prop_map(OmObject::Symbol),
        any::<i64>().prop_map(OmObject::int),
        "-?[1-9][0-9]{18,40}".prop_map(|s| OmObject::Integer(s.parse().expect("digits"))),
        finite_float().prop_map(OmObject::Float),
        ncname().prop_map(OmObject::Variable),
        "[ -~\n\tαβ€😀]{0,12}".prop_map(OmObject::String),
    ]
}

/// Well-formed OpenMath objects: applications have at least one argument
/// and bound variables are distinct.
pub fn om_object() -> impl Strategy<Value = OmObject> {
    om_leaf().prop_recursive(4, 48, 5, |inner| {
        prop_oneof![
            (inner.clone(), vec(inner.clone(), 1..5)).prop_map(|(head, args)| OmObject::apply(head, args)),
            (symbol(), vec(inner.clone(), 1..5)).prop_map(|(head, args)| OmObject::call(head, args)),
            (symbol(), prop::collection::btree_set(ncname(), 1..4), inner).prop_map(|(b, vars, body)| {
                OmObject::Binding {
                    binder: Box::new(OmObject::Symbol(b)),
                    vars: vars.into_iter().collect(),
                    body: Box::new(body),
                }
            }),
        ]
    })
}

/// Constants as a derivation writes them: canonical decimal text.
pub fn constant() -> impl Strategy<Value = Decimal> {
    prop_oneof![
        any::<i32>().prop_map(|i| Decimal::parse(&i.to_string()).expect("integer")),
        finite_float().prop_map(|x| Decimal::parse(&canonical_decimal(x)).expect("canonical")),
    ]
}

/// Derivations whose function is a hash-style symbol URI and whose point
/// arguments name other points.
pub fn derivation() -> impl Strategy<Value = Derivation> {
    let source = prop_oneof![
        2 => "[a-z]{1,6}[0-9]{0,3}".prop_map(|l| ArgSource::Point(Iri::new(format!("http://ex.org/in/{l}")).expect("iri"))),
        1 => constant().prop_map(ArgSource::Constant),
    ];
    ("[A-Z]{2}[0-9]{1,4}", symbol(), vec(source, 0..6)).prop_map(|(point, f, sources)| Derivation {
        point: Iri::new(format!("http://ex.org/out/{point}")).expect("iri"),
        function: Iri::new(f.uri()).expect("symbol uri"),
        args: sources
            .into_iter()
            .enumerate()
            .map(|(i, source)| DerivationArg {
                position: i as u32 + 1,
                source,
            })
            .collect(),
    })
}
