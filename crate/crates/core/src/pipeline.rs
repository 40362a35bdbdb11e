//! Dataset-level operations: verifying stored derived values, recomputing
//! them, and comparing a derived metric across regions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use log::warn;
use serde::Serialize;
use thiserror::Error;

use crate::annotations::{derivation_to_om, display_chain, AnnotationError, ArgSource, Dataset, Derivation, Vocabulary};
use crate::decimal::{canonical_decimal, Decimal};
use crate::eval::{evaluate, BaseEnv, EvalError};
use crate::om::parse_symbol_uri;
use crate::rdf::{Graph, Iri, Literal, Term, Triple, RDF_TYPE, XSD_DECIMAL};
use crate::rewrite::{expand, CdStore, RewriteError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Rewrite passes allowed per expansion.
    pub max_depth: usize,
    /// Levels of derived-of-derived translation.
    pub max_chain: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_depth: 32,
            max_chain: crate::annotations::DEFAULT_MAX_CHAIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComputeError {
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Translate, expand and evaluate the derivation of one point against the
/// values currently in `ds`.
pub fn compute_point(
    d: &Derivation,
    ds: &Dataset,
    store: &CdStore,
    base: &BaseEnv,
    limits: Limits,
) -> Result<f64, ComputeError> {
    let obj = derivation_to_om(d, ds, limits.max_chain)?;
    let expanded = expand(&obj, store, base, limits.max_depth)?;
    Ok(evaluate(&expanded.object, base)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Match { stored: f64, computed: f64, delta: f64 },
    Mismatch { stored: f64, computed: f64, delta: f64 },
    Uncomputable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub point: Iri,
    pub status: Status,
}

/// One entry per derived point, in IRI order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub entries: Vec<ReportEntry>,
}

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    status: &'static str,
    stored: Option<f64>,
    computed: Option<f64>,
    delta: Option<f64>,
    reason: Option<&'a str>,
}

impl VerificationReport {
    pub fn all_match(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.status, Status::Match { .. }))
    }

    pub fn count(&self, pred: impl Fn(&Status) -> bool) -> usize {
        self.entries.iter().filter(|e| pred(&e.status)).count()
    }

    pub fn has_uncomputable(&self) -> bool {
        self.count(|s| matches!(s, Status::Uncomputable(_))) > 0
    }

    pub fn has_mismatch(&self) -> bool {
        self.count(|s| matches!(s, Status::Mismatch { .. })) > 0
    }

    /// `MATCH <id> stored=... computed=... delta=...`, one line per point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = match &e.status {
                Status::Match { stored, computed, delta } => {
                    writeln!(out, "MATCH {} stored={stored} computed={computed} delta={delta:e}", e.point)
                }
                Status::Mismatch { stored, computed, delta } => {
                    writeln!(out, "MISMATCH {} stored={stored} computed={computed} delta={delta:e}", e.point)
                }
                Status::Uncomputable(reason) => writeln!(out, "UNCOMPUTABLE {} {reason}", e.point),
            };
        }
        out
    }

    /// A JSON array with one record per point.
    pub fn to_json(&self) -> String {
        let records: Vec<Record> = self
            .entries
            .iter()
            .map(|e| {
                let id = e.point.as_str();
                match &e.status {
                    Status::Match { stored, computed, delta } | Status::Mismatch { stored, computed, delta } => Record {
                        id,
                        status: if matches!(e.status, Status::Match { .. }) { "match" } else { "mismatch" },
                        stored: Some(*stored),
                        computed: Some(*computed),
                        delta: Some(*delta),
                        reason: None,
                    },
                    Status::Uncomputable(reason) => Record {
                        id,
                        status: "uncomputable",
                        stored: None,
                        computed: None,
                        delta: None,
                        reason: Some(reason),
                    },
                }
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("report records serialize")
    }
}

/// Recompute every derived point that has a stored value and compare.
/// A point matches when `|stored - computed| <= tolerance * max(1, |stored|)`.
pub fn verify_dataset(
    g: &Graph,
    vocab: &Vocabulary,
    store: &CdStore,
    base: &BaseEnv,
    tolerance: f64,
    limits: Limits,
) -> VerificationReport {
    let ds = Dataset::from_graph(g, vocab);
    let mut derived: BTreeSet<Iri> = ds.derivations.keys().cloned().collect();
    derived.extend(
        ds.errors
            .iter()
            .filter(|(_, e)| !matches!(e, AnnotationError::BadValueLiteral(_)))
            .map(|(p, _)| p.clone()),
    );

    let mut report = VerificationReport::default();
    for point in derived {
        let cycle = ds.derivations.contains_key(&point).then(|| cycle_through(&point, &ds)).flatten();
        let status = match (ds.errors.get(&point), ds.derivations.get(&point), ds.values.get(&point)) {
            (Some(e), _, _) => Status::Uncomputable(e.to_string()),
            _ if cycle.is_some() => {
                Status::Uncomputable(AnnotationError::CyclicDerivation(cycle.unwrap_or_default()).to_string())
            }
            (None, Some(_), None) => Status::Uncomputable("no stored value to verify".into()),
            (None, Some(d), Some(stored)) => match compute_point(d, &ds, store, base, limits) {
                Ok(computed) => {
                    let stored = stored.to_f64();
                    let delta = (stored - computed).abs();
                    if delta <= tolerance * stored.abs().max(1.0) {
                        Status::Match { stored, computed, delta }
                    } else {
                        Status::Mismatch { stored, computed, delta }
                    }
                }
                Err(e) => Status::Uncomputable(e.to_string()),
            },
            (None, None, _) => unreachable!("derived points come from derivations or their errors"),
        };
        report.entries.push(ReportEntry { point, status });
    }
    report
}

/// A path of derived points from `p` back to itself, if there is one.
/// Stored values do not break a cycle: such points can never be confirmed
/// from the data they are computed from.
fn cycle_through(p: &Iri, ds: &Dataset) -> Option<Vec<Iri>> {
    fn inputs<'a>(q: &Iri, ds: &'a Dataset) -> impl Iterator<Item = &'a Iri> + use<'a> {
        ds.derivations.get(q).into_iter().flat_map(|d| {
            d.args.iter().filter_map(|a| match &a.source {
                ArgSource::Point(src) if ds.derivations.contains_key(src) => Some(src),
                _ => None,
            })
        })
    }
    let mut seen = BTreeSet::new();
    let mut stack: Vec<(Vec<Iri>, &Iri)> = inputs(p, ds).map(|s| (vec![p.clone()], s)).collect();
    while let Some((path, q)) = stack.pop() {
        if q == p {
            let mut c = path;
            c.push(p.clone());
            return Some(c);
        }
        if !seen.insert(q.clone()) {
            continue;
        }
        for next in inputs(q, ds) {
            let mut np = path.clone();
            np.push(q.clone());
            stack.push((np, next));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecomputeError {
    #[error("cyclic derivation: {}", display_chain(.0))]
    CyclicDerivation(Vec<Iri>),
    #[error("{0}: {1}")]
    Malformed(Iri, AnnotationError),
    #[error("{point}: {reason}")]
    Uncomputable { point: Iri, reason: String },
}

/// Derived points ordered so that every point comes after the derived
/// points it reads.
pub fn derivation_order(ds: &Dataset) -> Result<Vec<Iri>, RecomputeError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit(
        p: &Iri,
        ds: &Dataset,
        marks: &mut BTreeMap<Iri, Mark>,
        stack: &mut Vec<Iri>,
        out: &mut Vec<Iri>,
    ) -> Result<(), RecomputeError> {
        match marks.get(p) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Active) => {
                let start = stack.iter().position(|s| s == p).unwrap_or(0);
                let mut cycle = stack[start..].to_vec();
                cycle.push(p.clone());
                return Err(RecomputeError::CyclicDerivation(cycle));
            }
            None => {}
        }
        let Some(d) = ds.derivations.get(p) else {
            return Ok(());
        };
        marks.insert(p.clone(), Mark::Active);
        stack.push(p.clone());
        for a in &d.args {
            if let ArgSource::Point(src) = &a.source {
                if ds.derivations.contains_key(src) {
                    visit(src, ds, marks, stack, out)?;
                }
            }
        }
        stack.pop();
        marks.insert(p.clone(), Mark::Done);
        out.push(p.clone());
        Ok(())
    }

    let mut marks = BTreeMap::new();
    let mut out = Vec::with_capacity(ds.derivations.len());
    for p in ds.derivations.keys() {
        visit(p, ds, &mut marks, &mut Vec::new(), &mut out)?;
    }
    Ok(out)
}

/// A copy of `g` in which every derived point's `rdf:value` holds the value
/// computed from its derivation, written as a canonical `xsd:decimal`.
pub fn recompute(
    g: &Graph,
    vocab: &Vocabulary,
    store: &CdStore,
    base: &BaseEnv,
    limits: Limits,
) -> Result<Graph, RecomputeError> {
    let mut ds = Dataset::from_graph(g, vocab);
    // A bad stored value on a derived point is about to be overwritten anyway.
    let blocking = ds
        .errors
        .iter()
        .find(|(p, e)| !(matches!(e, AnnotationError::BadValueLiteral(_)) && ds.derivations.contains_key(*p)));
    if let Some((p, e)) = blocking {
        return Err(RecomputeError::Malformed(p.clone(), e.clone()));
    }
    let order = derivation_order(&ds)?;
    let mut out = g.clone();
    let decimal = Iri::new(XSD_DECIMAL).expect("xsd");
    for p in order {
        let d = &ds.derivations[&p];
        let value = compute_point(d, &ds, store, base, limits).map_err(|e| RecomputeError::Uncomputable {
            point: p.clone(),
            reason: e.to_string(),
        })?;
        let text = canonical_decimal(value);
        let subject = Term::Iri(p.clone());
        for old in out.matching(Some(&subject), Some(&vocab.value), None) {
            out.remove(&old);
        }
        out.insert(Triple::new(p.clone(), vocab.value.clone(), Literal::typed(text.clone(), decimal.clone())));
        let exact = Decimal::parse(&text).expect("canonical decimal text parses");
        ds.values.insert(p, exact);
    }
    Ok(out)
}

/// Which points count as the metric for one region at one time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionQuery {
    /// Function IRI of the derivations that compute the metric.
    pub metric: Iri,
    /// Class whose instances, used as a dimension, name the region.
    pub region_class: Iri,
    pub t1: Iri,
    pub t2: Iri,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("no region has the metric computable at both times")]
    NoComputableRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionValues {
    pub region: Iri,
    pub at_t1: f64,
    pub at_t2: f64,
}

impl RegionValues {
    pub fn increase(&self) -> f64 {
        self.at_t2 - self.at_t1
    }
}

fn same_function(a: &Iri, b: &Iri) -> bool {
    if a == b {
        return true;
    }
    match (parse_symbol_uri(a.as_str()), parse_symbol_uri(b.as_str())) {
        (Ok(x), Ok(y)) => x.symbol() == y.symbol(),
        _ => false,
    }
}

/// Metric values per region at `t1` and `t2`, for regions where both are
/// computable. Values are computed from the derivations, not read from
/// stored `rdf:value`s.
pub fn region_values(
    g: &Graph,
    vocab: &Vocabulary,
    q: &RegionQuery,
    store: &CdStore,
    base: &BaseEnv,
    limits: Limits,
) -> Vec<RegionValues> {
    let ds = Dataset::from_graph(g, vocab);
    let rdf_type = Iri::new(RDF_TYPE).expect("rdf:type");
    let region_term = Term::Iri(q.region_class.clone());
    let is_region = |d: &Iri| g.contains(&Triple::new(d.clone(), rdf_type.clone(), region_term.clone()));

    let mut table: BTreeMap<Iri, [Option<f64>; 2]> = BTreeMap::new();
    for d in ds.derivations.values() {
        if !same_function(&d.function, &q.metric) {
            continue;
        }
        let dims: Vec<Iri> = g
            .objects(&Term::Iri(d.point.clone()), &vocab.dimension)
            .into_iter()
            .filter_map(|t| t.as_iri().cloned())
            .collect();
        let regions: Vec<&Iri> = dims.iter().filter(|d| is_region(d)).collect();
        let [region] = regions.as_slice() else {
            if !regions.is_empty() {
                warn!("{}: several region dimensions, skipped", d.point);
            }
            continue;
        };
        let slot = match (dims.contains(&q.t1), dims.contains(&q.t2)) {
            (true, false) => 0,
            (false, true) => 1,
            _ => continue,
        };
        match compute_point(d, &ds, store, base, limits) {
            Ok(v) => {
                let entry = table.entry((*region).clone()).or_default();
                if entry[slot].is_some() {
                    warn!("{}: second metric point for {region}, ignored", d.point);
                } else {
                    entry[slot] = Some(v);
                }
            }
            Err(e) => warn!("{}: {e}", d.point),
        }
    }
    table
        .into_iter()
        .filter_map(|(region, vals)| match vals {
            [Some(at_t1), Some(at_t2)] => Some(RegionValues { region, at_t1, at_t2 }),
            _ => None,
        })
        .collect()
}

/// The region whose metric grew most from `t1` to `t2`; ties go to the
/// lexicographically smallest region IRI.
pub fn argmax_increase(rows: &[RegionValues]) -> Result<(Iri, f64), QueryError> {
    let mut best: Option<&RegionValues> = None;
    for r in rows {
        best = match best {
            None => Some(r),
            Some(b) if r.increase() > b.increase() || (r.increase() == b.increase() && r.region < b.region) => Some(r),
            keep => keep,
        };
    }
    best.map(|b| (b.region.clone(), b.increase())).ok_or(QueryError::NoComputableRegion)
}

pub fn query_max_increase(
    g: &Graph,
    vocab: &Vocabulary,
    q: &RegionQuery,
    store: &CdStore,
    base: &BaseEnv,
    limits: Limits,
) -> Result<(Iri, f64), QueryError> {
    argmax_increase(&region_values(g, vocab, q, store, base, limits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    const PREFIXES: &str = "@prefix sl: <http://example.org/ns/sl#> .\n@prefix scv: <http://purl.org/NET/scovo#> .\n@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n@prefix ex: <http://ex.org/> .\n@prefix arith1: <http://www.openmath.org/cd/arith1#> .\n";

    fn graph(body: &str) -> Graph {
        parse_turtle(&format!("{PREFIXES}{body}"), &Iri::new("http://ex.org/").unwrap()).unwrap()
    }

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn density(point: &str, eh: &str, ar: &str) -> String {
        format!(
            "ex:{point} sl:computedFrom [ sl:function arith1:divide ;
                sl:arguments [ sl:argPosition 1 ; sl:argValue ex:{eh} ] , [ sl:argPosition 2 ; sl:argValue ex:{ar} ] ] .\n"
        )
    }

    fn geese(pd: &str) -> Graph {
        graph(&format!(
            "ex:EH100 rdf:value \"693\"^^xsd:decimal . ex:AR100 rdf:value \"380\"^^xsd:decimal .
             ex:PD100 rdf:value \"{pd}\"^^xsd:decimal .\n{}",
            density("PD100", "EH100", "AR100")
        ))
    }

    fn verify(g: &Graph, tol: f64) -> VerificationReport {
        verify_dataset(g, &Vocabulary::default(), &CdStore::new(), &BaseEnv::arith1(), tol, Limits::default())
    }

    #[test]
    fn geese_density_matches() {
        let r = verify(&geese("1.8236842105263158"), 1e-9);
        assert!(r.all_match(), "{}", r.to_text());
        assert_eq!(r.entries.len(), 1);
    }

    #[test]
    fn tampered_density_mismatches() {
        let r = verify(&geese("2.0"), 1e-9);
        match &r.entries[0].status {
            Status::Mismatch { stored, computed, delta } => {
                assert_eq!(*stored, 2.0);
                assert_eq!(*computed, 693.0 / 380.0);
                assert_eq!(*delta, 2.0 - 693.0 / 380.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(r.to_text().starts_with("MISMATCH http://ex.org/PD100 stored=2 "));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json[0]["status"], "mismatch");
        assert_eq!(json[0]["id"], "http://ex.org/PD100");
    }

    #[test]
    fn tolerance_is_relative_above_one() {
        let g = graph(&format!(
            "ex:EH100 rdf:value 1000000 . ex:AR100 rdf:value 1 . ex:PD100 rdf:value 1000001 .\n{}",
            density("PD100", "EH100", "AR100")
        ));
        assert!(verify(&g, 1e-6).all_match());
        assert!(!verify(&g, 1e-7).all_match());
    }

    #[test]
    fn unfetchable_cd_is_uncomputable() {
        struct Down;
        impl crate::rewrite::CdSource for Down {
            fn fetch_cd(&self, _: &str, _: &str) -> Result<Option<crate::cd::ContentDictionary>, String> {
                Err("no route to host".into())
            }
        }
        let g = graph(
            "ex:x rdf:value 1 . ex:y rdf:value 5 ; sl:computedFrom [ sl:function <http://unreachable.invalid/stats#f> ;
               sl:arguments [ sl:argPosition 1 ; sl:argValue ex:x ] ] .",
        );
        let store = CdStore::with_source(std::sync::Arc::new(Down));
        let r = verify_dataset(&g, &Vocabulary::default(), &store, &BaseEnv::arith1(), 1e-9, Limits::default());
        match &r.entries[0].status {
            Status::Uncomputable(reason) => assert!(reason.contains("no route to host"), "{reason}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn recompute_follows_new_base_values() {
        let mut g = geese("1.8236842105263158");
        let eh = Triple::new(iri("http://ex.org/EH100"), iri(crate::rdf::RDF_VALUE), Literal::typed("693", iri(XSD_DECIMAL)));
        assert!(g.remove(&eh));
        g.insert(Triple::new(iri("http://ex.org/EH100"), iri(crate::rdf::RDF_VALUE), Literal::typed("700", iri(XSD_DECIMAL))));
        let out = recompute(&g, &Vocabulary::default(), &CdStore::new(), &BaseEnv::arith1(), Limits::default()).unwrap();
        let values = out.objects(&Term::Iri(iri("http://ex.org/PD100")), &iri(crate::rdf::RDF_VALUE));
        assert_eq!(values.len(), 1);
        let lit = values[0].as_literal().unwrap();
        assert_eq!(lit.lexical(), canonical_decimal(700.0 / 380.0));
        assert_eq!(lit.lexical().parse::<f64>().unwrap(), 700.0 / 380.0);
    }

    #[test]
    fn no_derivations_no_change() {
        let g = graph("ex:a rdf:value 1 ; scv:dimension ex:d .");
        let out = recompute(&g, &Vocabulary::default(), &CdStore::new(), &BaseEnv::arith1(), Limits::default()).unwrap();
        assert_eq!(out, g);
    }

    fn two_level() -> Graph {
        graph(&format!(
            "ex:a rdf:value 6 . ex:b rdf:value 3 . ex:c rdf:value 4 .
             ex:top sl:computedFrom [ sl:function arith1:plus ;
               sl:arguments [ sl:argPosition 1 ; sl:argValue ex:mid ] , [ sl:argPosition 2 ; sl:argValue ex:c ] ] .
             {}",
            density("mid", "a", "b")
        ))
    }

    #[test]
    fn chains_recompute_in_order_and_are_idempotent() {
        let vocab = Vocabulary::default();
        let (store, base) = (CdStore::new(), BaseEnv::arith1());
        let once = recompute(&two_level(), &vocab, &store, &base, Limits::default()).unwrap();
        let value = |g: &Graph, p: &str| {
            g.objects(&Term::Iri(iri(p)), &vocab.value)[0].as_literal().unwrap().lexical().to_string()
        };
        assert_eq!(value(&once, "http://ex.org/mid"), "2.0");
        assert_eq!(value(&once, "http://ex.org/top"), "6.0");
        let twice = recompute(&once, &vocab, &store, &base, Limits::default()).unwrap();
        assert_eq!(once, twice);
        let r = verify_dataset(&once, &vocab, &store, &base, 1e-9, Limits::default());
        assert_eq!(r.entries.len(), 2);
        assert!(r.all_match());
    }

    #[test]
    fn derived_without_stored_value_is_reported() {
        let r = verify(&two_level(), 1e-9);
        assert_eq!(r.count(|s| matches!(s, Status::Uncomputable(_))), 2);
    }

    #[test]
    fn cycles_are_refused() {
        let g = graph(&format!("{}{}", density("p", "q", "q"), density("q", "p", "p")));
        let err = recompute(&g, &Vocabulary::default(), &CdStore::new(), &BaseEnv::arith1(), Limits::default()).unwrap_err();
        match err {
            RecomputeError::CyclicDerivation(c) => {
                assert_eq!(c.first(), c.last());
                assert_eq!(c.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verify_flags_cycles_even_with_stored_values() {
        let body = format!(
            "{}{}{}ex:p rdf:value 1 . ex:q rdf:value 1 . ex:a rdf:value 2 . ex:b rdf:value 2 . ex:r rdf:value 1 .\n",
            density("p", "q", "q"),
            density("q", "p", "p"),
            density("r", "a", "b")
        );
        let r = verify(&graph(&body), 1e-9);
        let uncomputable: Vec<&str> = r
            .entries
            .iter()
            .filter(|e| matches!(&e.status, Status::Uncomputable(m) if m.contains("cyclic")))
            .map(|e| e.point.as_str())
            .collect();
        assert_eq!(uncomputable, ["http://ex.org/p", "http://ex.org/q"]);
        assert_eq!(r.count(|s| matches!(s, Status::Match { .. })), 1);
    }

    fn regions(rows: &[(&str, [(u32, u32); 2])]) -> Graph {
        let mut ttl = String::from("ex:t1 a ex:Year . ex:t2 a ex:Year .\n");
        for (r, years) in rows {
            ttl.push_str(&format!("ex:{r} a ex:Region .\n"));
            for (i, (pop, area)) in years.iter().enumerate() {
                let t = i + 1;
                ttl.push_str(&format!(
                    "ex:pop_{r}_{t} scv:dimension ex:{r} , ex:t{t} ; rdf:value {pop} .
                     ex:area_{r}_{t} scv:dimension ex:{r} , ex:t{t} ; rdf:value {area} .
                     ex:pd_{r}_{t} scv:dimension ex:{r} , ex:t{t} .\n"
                ));
                ttl.push_str(&density(&format!("pd_{r}_{t}"), &format!("pop_{r}_{t}"), &format!("area_{r}_{t}")));
            }
        }
        graph(&ttl)
    }

    fn query() -> RegionQuery {
        RegionQuery {
            metric: iri("http://www.openmath.org/cd/arith1#divide"),
            region_class: iri("http://ex.org/Region"),
            t1: iri("http://ex.org/t1"),
            t2: iri("http://ex.org/t2"),
        }
    }

    fn run(g: &Graph) -> Result<(Iri, f64), QueryError> {
        query_max_increase(g, &Vocabulary::default(), &query(), &CdStore::new(), &BaseEnv::arith1(), Limits::default())
    }

    #[test]
    fn three_regions() {
        let g = regions(&[
            ("r1", [(100, 100), (150, 100)]),
            ("r2", [(200, 100), (220, 100)]),
            ("r3", [(50, 100), (140, 100)]),
        ]);
        let (region, inc) = run(&g).unwrap();
        assert_eq!(region, iri("http://ex.org/r3"));
        assert!((inc - 0.9).abs() < 1e-12);
    }

    #[test]
    fn single_and_tied_regions() {
        let one = regions(&[("only", [(1, 1), (2, 1)])]);
        assert_eq!(run(&one).unwrap().0, iri("http://ex.org/only"));
        let tie = regions(&[("zeta", [(1, 1), (3, 1)]), ("alpha", [(5, 1), (7, 1)])]);
        assert_eq!(run(&tie).unwrap().0, iri("http://ex.org/alpha"));
        assert_eq!(run(&graph("ex:a rdf:value 1 .")), Err(QueryError::NoComputableRegion));
    }
}
