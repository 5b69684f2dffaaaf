#![no_main]

use gamma_ultra::formula::parse_term;
use libfuzzer_sys::fuzz_target;

#[path = "common.rs"]
mod common;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for sig in common::signatures() {
        if let Ok(t) = parse_term(text, &sig) {
            let printed = t.to_string();
            assert_eq!(parse_term(&printed, &sig).expect("printed terms parse"), t);
        }
    }
});
