use std::collections::BTreeMap;

use omld_core::annotations::{derivation_to_om, extract_derivations, om_to_derivation, ArgSource, Dataset, Vocabulary};
use omld_core::arbitrary;
use omld_core::decimal::Decimal;
use omld_core::om::{parse_om_xml, serialize_om_xml};
use omld_core::rdf::{serialize_turtle, Graph, Iri, Term, Triple, TurtleParser};
use proptest::prelude::*;

fn reparse(g: &Graph) -> Graph {
    let text = serialize_turtle(g);
    TurtleParser::new(Iri::new("http://base.example/").unwrap())
        .parse(&text)
        .unwrap_or_else(|e| panic!("{e}\n{text}"))
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(300)
    })]

    #[test]
    fn turtle_round_trip(g in arbitrary::graph()) {
        let back = reparse(&g);
        prop_assert!(back.is_isomorphic(&g), "{}", serialize_turtle(&g));
    }

    #[test]
    fn indexed_lookups_agree_with_a_scan(g in arbitrary::graph()) {
        for t in g.iter() {
            for p in [None, Some(t.predicate())] {
                let scan: Vec<Triple> = g
                    .iter()
                    .filter(|u| u.subject() == t.subject() && p.is_none_or(|p| u.predicate() == p))
                    .cloned()
                    .collect();
                prop_assert_eq!(g.matching(Some(t.subject()), p, None), scan);
            }
            let objects: Vec<Term> = g
                .iter()
                .filter(|u| u.subject() == t.subject() && u.predicate() == t.predicate())
                .map(|u| u.object().clone())
                .collect();
            prop_assert_eq!(g.objects(t.subject(), t.predicate()), objects);
        }
    }

    #[test]
    fn om_xml_round_trip(obj in arbitrary::om_object()) {
        prop_assert!(obj.validate().is_ok());
        let xml = serialize_om_xml(&obj);
        let back = parse_om_xml(&xml).unwrap_or_else(|e| panic!("{e}\n{xml}"));
        prop_assert_eq!(&back, &obj, "{}", xml);
    }

    #[test]
    fn derivation_round_trip(d in arbitrary::derivation(), values in prop::collection::vec(arbitrary::constant(), 6)) {
        let vocab = Vocabulary::default();
        let mut ds = Dataset::default();
        for (a, v) in d.args.iter().zip(&values) {
            if let ArgSource::Point(p) = &a.source {
                ds.values.entry(p.clone()).or_insert_with(|| v.clone());
            }
        }
        let obj = derivation_to_om(&d, &ds, 32).unwrap();

        let sources: BTreeMap<usize, Iri> = d.args.iter().filter_map(|a| match &a.source {
            ArgSource::Point(p) => Some((a.position as usize, p.clone())),
            ArgSource::Constant(_) => None,
        }).collect();
        let mut g = Graph::new();
        om_to_derivation(&mut g, &vocab, &d.point, &obj, |pos, _| sources.get(&pos).cloned()).unwrap();
        let g = reparse(&g);
        let back = extract_derivations(&g, &vocab).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0], &d);
        prop_assert_eq!(derivation_to_om(&back[0], &ds, 32).unwrap(), obj);
    }
}

#[test]
fn integral_constants_compare_by_value() {
    let d = Decimal::parse("5.0").unwrap();
    assert_eq!(Decimal::from_f64(d.to_f64()), Some(d.clone()));
    assert_eq!(d, Decimal::parse("5").unwrap());
    assert_eq!(d.lexical(), "5.0");
}
