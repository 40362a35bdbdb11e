#![no_main]

use libfuzzer_sys::fuzz_target;
use omld_core::cd::{extract_links, find_definition, parse_cd_xml, serialize_cd_xml, RDFS_SEE_ALSO};
use omld_core::rdf::Iri;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cd) = parse_cd_xml(text, None) else {
        return;
    };
    for def in &cd.definitions {
        let _ = find_definition(&cd, &def.name);
    }
    let _ = extract_links(&cd, &[Iri::new(RDFS_SEE_ALSO).unwrap()]);
    let xml = serialize_cd_xml(&cd);
    let back = parse_cd_xml(&xml, None).unwrap_or_else(|e| panic!("{e}\n{xml}"));
    assert_eq!(back, cd, "{xml}");
});
