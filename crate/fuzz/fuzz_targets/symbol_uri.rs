#![no_main]

use libfuzzer_sys::fuzz_target;
use omld_core::om::{parse_symbol_uri, render_symbol_uri};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(uri) = parse_symbol_uri(text) else {
        return;
    };
    let rendered = render_symbol_uri(&uri);
    assert_eq!(parse_symbol_uri(&rendered).as_ref(), Ok(&uri), "{rendered}");
    let _ = uri.cd_url();
});
