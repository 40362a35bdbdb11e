#![no_main]

use libfuzzer_sys::fuzz_target;
use omld_core::rdf::{serialize_turtle, Iri, TurtleParser};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let parser = TurtleParser::new(Iri::new("http://fuzz.example/").unwrap());
    let Ok(g) = parser.parse(text) else {
        return;
    };
    let written = serialize_turtle(&g);
    let back = parser
        .parse(&written)
        .unwrap_or_else(|e| panic!("serializer output does not parse: {e}\n{written}"));
    // Isomorphism search is exponential in the worst case; keep it to small graphs.
    if g.blank_nodes().len() <= 8 {
        assert!(back.is_isomorphic(&g), "round trip changed the graph\n{written}");
    } else {
        assert_eq!(back.len(), g.len());
    }
});
