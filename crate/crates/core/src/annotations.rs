//! SCOVO-style data points and their `computedFrom` derivations.
//!
//! A derivation in the graph looks like
//!
//! ```text
//! point  sl:computedFrom  _:d .
//! _:d    sl:function      <cdbase/cd#name> ;
//!        sl:arguments     _:a1 , _:a2 .
//! _:a1   sl:argPosition   "1"^^xsd:int ;  sl:argValue  <source point> .
//! ```
//!
//! `argValue` may also be a numeric literal.

use std::collections::BTreeMap;

use log::warn;
use thiserror::Error;

use crate::decimal::{canonical_decimal, Decimal};
use crate::om::{parse_symbol_uri, OmObject};
use crate::rdf::{Graph, Iri, Literal, Term, Triple, RDF_VALUE, XSD_DECIMAL, XSD_INT};

pub const SCOVO_NS: &str = "http://purl.org/NET/scovo#";
/// Namespace of the `sl:` annotation terms used when none is configured.
pub const DEFAULT_SL_NS: &str = "http://example.org/ns/sl#";
/// Default recursion cap for derived-of-derived translation.
pub const DEFAULT_MAX_CHAIN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("{0}: rdf:value is not a number")]
    BadValueLiteral(Iri),
    #[error("{0}: derivation has no sl:function")]
    MissingFunction(Iri),
    #[error("{0}: argument positions are not 1..n")]
    BadArgPositions(Iri),
    #[error("{point}: argument {position} has no usable sl:argValue")]
    BadArgument { point: Iri, position: u32 },
    #[error("{point}: function <{function}> is not a symbol URI")]
    BadFunction { point: Iri, function: Iri },
    #[error("argument {0} has no value and no derivation")]
    UnresolvedArgument(Iri),
    #[error("cyclic derivation: {}", display_chain(.0))]
    CyclicDerivation(Vec<Iri>),
    #[error("derivation chain deeper than {limit}: {}", display_chain(.chain))]
    ChainTooDeep { limit: usize, chain: Vec<Iri> },
    #[error("object is not an application of a symbol")]
    NotAnApplication,
    #[error("argument {0} cannot be written as a data point reference or number")]
    UntranslatableArgument(usize),
}

pub(crate) fn display_chain(chain: &[Iri]) -> String {
    chain.iter().map(Iri::as_str).collect::<Vec<_>>().join(" -> ")
}

/// IRIs of the vocabulary terms read and written here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub computed_from: Iri,
    pub function: Iri,
    pub arguments: Iri,
    pub arg_position: Iri,
    pub arg_value: Iri,
    pub dimension: Iri,
    pub dataset: Iri,
    pub value: Iri,
}

impl Vocabulary {
    pub fn new(sl_ns: &str, scovo_ns: &str) -> Result<Self, crate::rdf::RdfError> {
        let sl = |local: &str| Iri::new(format!("{sl_ns}{local}"));
        let scv = |local: &str| Iri::new(format!("{scovo_ns}{local}"));
        Ok(Vocabulary {
            computed_from: sl("computedFrom")?,
            function: sl("function")?,
            arguments: sl("arguments")?,
            arg_position: sl("argPosition")?,
            arg_value: sl("argValue")?,
            dimension: scv("dimension")?,
            dataset: scv("dataset")?,
            value: Iri::new(RDF_VALUE)?,
        })
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new(DEFAULT_SL_NS, SCOVO_NS).expect("default namespaces are absolute")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPoint {
    pub id: Iri,
    /// Sorted by IRI.
    pub dimensions: Vec<Iri>,
    pub value: Option<Decimal>,
    pub dataset: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgSource {
    Point(Iri),
    Constant(Decimal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationArg {
    pub position: u32,
    pub source: ArgSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub point: Iri,
    pub function: Iri,
    /// Ordered by position; positions are exactly `1..=args.len()`.
    pub args: Vec<DerivationArg>,
}

fn numeric_value(g: &Graph, vocab: &Vocabulary, subject: &Iri) -> Result<Option<Decimal>, AnnotationError> {
    let values = g.objects(&Term::Iri(subject.clone()), &vocab.value);
    let Some(first) = values.first() else {
        return Ok(None);
    };
    if values.len() > 1 {
        warn!("{subject}: {} rdf:value triples, using {first}", values.len());
    }
    match first {
        Term::Literal(l) if l.language().is_none() => Decimal::parse(l.lexical())
            .map(Some)
            .ok_or_else(|| AnnotationError::BadValueLiteral(subject.clone())),
        _ => Err(AnnotationError::BadValueLiteral(subject.clone())),
    }
}

/// One data point per IRI subject that has at least one dimension.
pub fn extract_data_points(g: &Graph, vocab: &Vocabulary) -> Result<Vec<DataPoint>, AnnotationError> {
    let mut dims: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for t in g.matching(None, Some(&vocab.dimension), None) {
        let (Term::Iri(s), Term::Iri(d)) = (t.subject(), t.object()) else {
            continue;
        };
        dims.entry(s.clone()).or_default().push(d.clone());
    }
    let mut out = Vec::with_capacity(dims.len());
    for (id, mut dimensions) in dims {
        dimensions.sort();
        let value = numeric_value(g, vocab, &id)?;
        let dataset = g
            .objects(&Term::Iri(id.clone()), &vocab.dataset)
            .into_iter()
            .find_map(|t| t.as_iri().cloned());
        out.push(DataPoint {
            id,
            dimensions,
            value,
            dataset,
        });
    }
    Ok(out)
}

/// All derivations, failing on the first malformed one.
pub fn extract_derivations(g: &Graph, vocab: &Vocabulary) -> Result<Vec<Derivation>, AnnotationError> {
    let scan = scan_derivations(g, vocab);
    match scan.errors.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(scan.derivations),
    }
}

/// Well-formed derivations plus per-point errors for the malformed ones.
#[derive(Debug, Clone, Default)]
pub struct DerivationScan {
    pub derivations: Vec<Derivation>,
    pub errors: Vec<(Iri, AnnotationError)>,
}

pub fn scan_derivations(g: &Graph, vocab: &Vocabulary) -> DerivationScan {
    let mut nodes: BTreeMap<Iri, Vec<Term>> = BTreeMap::new();
    for t in g.matching(None, Some(&vocab.computed_from), None) {
        if let Term::Iri(point) = t.subject() {
            nodes.entry(point.clone()).or_default().push(t.object().clone());
        }
    }
    let mut scan = DerivationScan::default();
    for (point, candidates) in nodes {
        if candidates.len() > 1 {
            warn!("{point}: {} computedFrom annotations, using the first", candidates.len());
        }
        match read_derivation(g, vocab, &point, &candidates[0]) {
            Ok(d) => scan.derivations.push(d),
            Err(e) => scan.errors.push((point, e)),
        }
    }
    scan
}

fn read_derivation(g: &Graph, vocab: &Vocabulary, point: &Iri, node: &Term) -> Result<Derivation, AnnotationError> {
    let functions: Vec<Iri> = g
        .objects(node, &vocab.function)
        .into_iter()
        .filter_map(|t| t.as_iri().cloned())
        .collect();
    let function = functions
        .first()
        .cloned()
        .ok_or_else(|| AnnotationError::MissingFunction(point.clone()))?;
    if functions.len() > 1 {
        warn!("{point}: several sl:function values, using <{function}>");
    }

    let mut args = Vec::new();
    for arg in g.objects(node, &vocab.arguments) {
        let positions = g.objects(&arg, &vocab.arg_position);
        let [Term::Literal(pos)] = positions.as_slice() else {
            return Err(AnnotationError::BadArgPositions(point.clone()));
        };
        let position: u32 = match pos.lexical().trim().trim_start_matches('+').parse() {
            Ok(p) if p >= 1 => p,
            _ => return Err(AnnotationError::BadArgPositions(point.clone())),
        };
        let bad = || AnnotationError::BadArgument {
            point: point.clone(),
            position,
        };
        let values = g.objects(&arg, &vocab.arg_value);
        let source = match values.as_slice() {
            [Term::Iri(src)] => ArgSource::Point(src.clone()),
            [Term::Literal(l)] if l.language().is_none() => ArgSource::Constant(Decimal::parse(l.lexical()).ok_or_else(bad)?),
            _ => return Err(bad()),
        };
        args.push(DerivationArg { position, source });
    }
    args.sort_by_key(|a| a.position);
    if args.iter().enumerate().any(|(i, a)| a.position as usize != i + 1) {
        return Err(AnnotationError::BadArgPositions(point.clone()));
    }
    Ok(Derivation {
        point: point.clone(),
        function,
        args,
    })
}

/// Stored values and derivations of a graph, indexed by point.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub values: BTreeMap<Iri, Decimal>,
    pub derivations: BTreeMap<Iri, Derivation>,
    /// Points whose rdf:value or derivation could not be read.
    pub errors: BTreeMap<Iri, AnnotationError>,
}

impl Dataset {
    pub fn from_graph(g: &Graph, vocab: &Vocabulary) -> Self {
        let mut ds = Dataset::default();
        let mut subjects: Vec<Iri> = g
            .matching(None, Some(&vocab.value), None)
            .into_iter()
            .filter_map(|t| t.subject().as_iri().cloned())
            .collect();
        subjects.dedup();
        for s in subjects {
            match numeric_value(g, vocab, &s) {
                Ok(Some(v)) => {
                    ds.values.insert(s, v);
                }
                Ok(None) => {}
                Err(e) => {
                    ds.errors.insert(s, e);
                }
            }
        }
        let scan = scan_derivations(g, vocab);
        for d in scan.derivations {
            ds.derivations.insert(d.point.clone(), d);
        }
        for (p, e) in scan.errors {
            ds.errors.entry(p).or_insert(e);
        }
        ds
    }
}

/// Translate a derivation into an OpenMath application. Arguments with a
/// stored value become numbers; arguments without one are translated from
/// their own derivation, up to `max_chain` levels.
pub fn derivation_to_om(d: &Derivation, ds: &Dataset, max_chain: usize) -> Result<OmObject, AnnotationError> {
    let mut chain = Vec::new();
    translate(d, ds, &mut chain, max_chain)
}

fn translate(d: &Derivation, ds: &Dataset, chain: &mut Vec<Iri>, max_chain: usize) -> Result<OmObject, AnnotationError> {
    if chain.contains(&d.point) {
        let mut c = chain.clone();
        c.push(d.point.clone());
        return Err(AnnotationError::CyclicDerivation(c));
    }
    if chain.len() >= max_chain {
        let mut c = chain.clone();
        c.push(d.point.clone());
        return Err(AnnotationError::ChainTooDeep { limit: max_chain, chain: c });
    }
    let head = parse_symbol_uri(d.function.as_str())
        .map_err(|_| AnnotationError::BadFunction {
            point: d.point.clone(),
            function: d.function.clone(),
        })?
        .symbol();
    chain.push(d.point.clone());
    let mut args = Vec::with_capacity(d.args.len());
    for a in &d.args {
        let obj = match &a.source {
            ArgSource::Constant(c) => c.to_om(),
            ArgSource::Point(src) => {
                if chain.contains(src) {
                    let mut c = chain.clone();
                    c.push(src.clone());
                    return Err(AnnotationError::CyclicDerivation(c));
                }
                if let Some(v) = ds.values.get(src) {
                    v.to_om()
                } else if let Some(inner) = ds.derivations.get(src) {
                    translate(inner, ds, chain, max_chain)?
                } else {
                    return Err(AnnotationError::UnresolvedArgument(src.clone()));
                }
            }
        };
        args.push(obj);
    }
    chain.pop();
    if args.is_empty() {
        Ok(OmObject::Symbol(head))
    } else {
        Ok(OmObject::call(head, args))
    }
}

/// Write `obj` into `g` as the `computedFrom` annotation of `point`. A bare
/// symbol is a derivation without arguments.
/// `source_of(position, arg)` names the data point an argument came from;
/// arguments it does not claim must be numbers and are written as literals.
/// Returns the triples added.
pub fn om_to_derivation(
    g: &mut Graph,
    vocab: &Vocabulary,
    point: &Iri,
    obj: &OmObject,
    source_of: impl Fn(usize, &OmObject) -> Option<Iri>,
) -> Result<Vec<Triple>, AnnotationError> {
    let (head, args) = match obj {
        OmObject::Symbol(s) => (s, &[][..]),
        _ => obj.as_symbol_application().ok_or(AnnotationError::NotAnApplication)?,
    };
    let function = Iri::new(head.uri()).map_err(|_| AnnotationError::NotAnApplication)?;

    let mut values = Vec::with_capacity(args.len());
    for (i, a) in args.iter().enumerate() {
        let position = i + 1;
        let term = match (source_of(position, a), a) {
            (Some(src), _) => Term::Iri(src),
            (None, OmObject::Integer(n)) => Term::Literal(Literal::typed(n.to_string(), Iri::new(XSD_DECIMAL).expect("xsd"))),
            (None, OmObject::Float(x)) if x.is_finite() => {
                Term::Literal(Literal::typed(canonical_decimal(*x), Iri::new(XSD_DECIMAL).expect("xsd")))
            }
            _ => return Err(AnnotationError::UntranslatableArgument(position)),
        };
        values.push(term);
    }

    let mut added = Vec::new();
    let node = g.fresh_blank();
    added.push(Triple::new(point.clone(), vocab.computed_from.clone(), node.clone()));
    added.push(Triple::new(node.clone(), vocab.function.clone(), function));
    for (i, value) in values.into_iter().enumerate() {
        let arg = g.fresh_blank();
        let pos = Literal::typed((i + 1).to_string(), Iri::new(XSD_INT).expect("xsd"));
        added.push(Triple::new(node.clone(), vocab.arguments.clone(), arg.clone()));
        added.push(Triple::new(arg.clone(), vocab.arg_position.clone(), pos));
        added.push(Triple::new(arg, vocab.arg_value.clone(), value));
    }
    for t in &added {
        g.insert(t.clone());
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::om::OmSymbol;
    use crate::rdf::parse_turtle;

    const PREFIXES: &str = "@prefix sl: <http://example.org/ns/sl#> .\n@prefix scv: <http://purl.org/NET/scovo#> .\n@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n@prefix ex: <http://ex.org/> .\n";

    fn graph(body: &str) -> Graph {
        parse_turtle(&format!("{PREFIXES}{body}"), &Iri::new("http://ex.org/").unwrap()).unwrap()
    }

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn vocab() -> Vocabulary {
        Vocabulary::default()
    }

    #[test]
    fn point_without_value() {
        let g = graph("ex:p scv:dimension ex:b , ex:a .");
        let points = extract_data_points(&g, &vocab()).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].value, None);
        assert_eq!(points[0].dimensions, vec![iri("http://ex.org/a"), iri("http://ex.org/b")]);
    }

    #[test]
    fn non_numeric_value() {
        let g = graph("ex:p scv:dimension ex:a ; rdf:value \"many\" .");
        assert_eq!(
            extract_data_points(&g, &vocab()),
            Err(AnnotationError::BadValueLiteral(iri("http://ex.org/p")))
        );
    }

    #[test]
    fn empty_graph_has_nothing() {
        assert!(extract_data_points(&Graph::new(), &vocab()).unwrap().is_empty());
        assert!(extract_derivations(&Graph::new(), &vocab()).unwrap().is_empty());
    }

    #[test]
    fn position_gap() {
        let g = graph(
            "ex:d sl:computedFrom [ sl:function <http://www.openmath.org/cd/arith1#plus> ;
               sl:arguments [ sl:argPosition \"1\"^^xsd:int ; sl:argValue ex:a ] ,
                            [ sl:argPosition \"3\"^^xsd:int ; sl:argValue ex:b ] ] .",
        );
        assert_eq!(
            extract_derivations(&g, &vocab()),
            Err(AnnotationError::BadArgPositions(iri("http://ex.org/d")))
        );
    }

    #[test]
    fn duplicate_positions_and_missing_function() {
        let dup = graph(
            "ex:d sl:computedFrom [ sl:function <http://www.openmath.org/cd/arith1#plus> ;
               sl:arguments [ sl:argPosition 1 ; sl:argValue ex:a ] , [ sl:argPosition 1 ; sl:argValue ex:b ] ] .",
        );
        assert!(matches!(extract_derivations(&dup, &vocab()), Err(AnnotationError::BadArgPositions(_))));
        let nofn = graph("ex:d sl:computedFrom [ sl:arguments [ sl:argPosition 1 ; sl:argValue ex:a ] ] .");
        assert_eq!(
            extract_derivations(&nofn, &vocab()),
            Err(AnnotationError::MissingFunction(iri("http://ex.org/d")))
        );
    }

    #[test]
    fn order_follows_positions_not_graph_order() {
        let g = graph(
            "ex:d sl:computedFrom [ sl:function <http://www.openmath.org/cd/arith1#minus> ;
               sl:arguments [ sl:argPosition 2 ; sl:argValue ex:a ] , [ sl:argPosition 1 ; sl:argValue ex:z ] ] .
             ex:a rdf:value 1 . ex:z rdf:value 10 .",
        );
        let ds = Dataset::from_graph(&g, &vocab());
        let d = &ds.derivations[&iri("http://ex.org/d")];
        let om = derivation_to_om(d, &ds, DEFAULT_MAX_CHAIN).unwrap();
        let minus = OmSymbol::standard("arith1", "minus");
        assert_eq!(om, OmObject::call(minus, vec![OmObject::int(10), OmObject::int(1)]));
    }

    #[test]
    fn self_reference_is_cyclic() {
        let g = graph(
            "ex:d rdf:value 3 ; sl:computedFrom [ sl:function <http://www.openmath.org/cd/arith1#abs> ;
               sl:arguments [ sl:argPosition 1 ; sl:argValue ex:d ] ] .",
        );
        let ds = Dataset::from_graph(&g, &vocab());
        let err = derivation_to_om(&ds.derivations[&iri("http://ex.org/d")], &ds, DEFAULT_MAX_CHAIN).unwrap_err();
        assert!(matches!(err, AnnotationError::CyclicDerivation(c) if c.len() == 2));
    }

    #[test]
    fn nested_derivation_and_constants() {
        let g = graph(
            "ex:x rdf:value 4 .
             ex:y sl:computedFrom [ sl:function <http://www.openmath.org/cd/arith1#times> ;
               sl:arguments [ sl:argPosition 1 ; sl:argValue ex:x ] , [ sl:argPosition 2 ; sl:argValue 0.5 ] ] .
             ex:z sl:computedFrom [ sl:function <http://www.openmath.org/cd/arith1#plus> ;
               sl:arguments [ sl:argPosition 1 ; sl:argValue ex:y ] , [ sl:argPosition 2 ; sl:argValue ex:w ] ] .",
        );
        let ds = Dataset::from_graph(&g, &vocab());
        let y = derivation_to_om(&ds.derivations[&iri("http://ex.org/y")], &ds, 32).unwrap();
        assert_eq!(
            y,
            OmObject::call(OmSymbol::standard("arith1", "times"), vec![OmObject::int(4), OmObject::Float(0.5)])
        );
        assert_eq!(
            derivation_to_om(&ds.derivations[&iri("http://ex.org/z")], &ds, 32),
            Err(AnnotationError::UnresolvedArgument(iri("http://ex.org/w")))
        );
        assert!(matches!(
            derivation_to_om(&ds.derivations[&iri("http://ex.org/y")], &ds, 0),
            Err(AnnotationError::ChainTooDeep { .. })
        ));
    }

    #[test]
    fn non_application_is_rejected() {
        let mut g = Graph::new();
        assert_eq!(
            om_to_derivation(&mut g, &vocab(), &iri("http://ex.org/p"), &OmObject::int(5), |_, _| None),
            Err(AnnotationError::NotAnApplication)
        );
        let nested = OmObject::call(
            OmSymbol::standard("arith1", "abs"),
            vec![OmObject::call(OmSymbol::standard("arith1", "abs"), vec![OmObject::int(1)])],
        );
        assert_eq!(
            om_to_derivation(&mut g, &vocab(), &iri("http://ex.org/p"), &nested, |_, _| None),
            Err(AnnotationError::UntranslatableArgument(1))
        );
        assert!(g.is_empty());
    }

    #[test]
    fn emitted_triples_extract_back() {
        let mut g = Graph::new();
        let obj = OmObject::call(OmSymbol::standard("arith1", "divide"), vec![OmObject::int(693), OmObject::Float(0.25)]);
        let point = iri("http://ex.org/pd");
        let added = om_to_derivation(&mut g, &vocab(), &point, &obj, |pos, _| {
            (pos == 1).then(|| iri("http://ex.org/eh"))
        })
        .unwrap();
        assert_eq!(added.len(), 2 + 3 * 2);
        let d = extract_derivations(&g, &vocab()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].function.as_str(), "http://www.openmath.org/cd/arith1#divide");
        assert_eq!(d[0].args[0].source, ArgSource::Point(iri("http://ex.org/eh")));
        assert_eq!(d[0].args[1].source, ArgSource::Constant(Decimal::parse("0.25").unwrap()));
    }
}
