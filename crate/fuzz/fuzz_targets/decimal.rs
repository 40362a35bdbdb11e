#![no_main]

use libfuzzer_sys::fuzz_target;
use omld_core::decimal::{canonical_decimal, Decimal};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Some(d) = Decimal::parse(text) else {
        return;
    };
    let x = d.to_f64();
    if x.is_finite() {
        let canonical = canonical_decimal(x);
        let back = Decimal::parse(&canonical).expect("canonical text parses");
        assert_eq!(back.to_f64().to_bits(), x.to_bits(), "{canonical}");
    }
});
