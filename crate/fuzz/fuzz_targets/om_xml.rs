#![no_main]

use libfuzzer_sys::fuzz_target;
use omld_core::om::{parse_om_xml, serialize_om_xml};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(obj) = parse_om_xml(text) else {
        return;
    };
    obj.validate().expect("parsed objects are well formed");
    let xml = serialize_om_xml(&obj);
    let back = parse_om_xml(&xml).unwrap_or_else(|e| panic!("{e}\n{xml}"));
    assert_eq!(back, obj, "{xml}");
});
