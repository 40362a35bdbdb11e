#![no_main]

use libfuzzer_sys::fuzz_target;
use omld_net::conneg::{negotiate, parse_accept};
use omld_net::server::OFFERED;

fuzz_target!(|data: &[u8]| {
    let Ok(header) = std::str::from_utf8(data) else {
        return;
    };
    for r in parse_accept(header) {
        assert!((0.0..=1.0).contains(&r.q));
    }
    if let Some(m) = negotiate(Some(header), &OFFERED, OFFERED[0]) {
        assert!(OFFERED.contains(&m));
    }
});
