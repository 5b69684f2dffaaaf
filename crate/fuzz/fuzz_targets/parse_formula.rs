#![no_main]

use gamma_ultra::formula::{classify_quantifier, parse_formula, InvCondition};
use libfuzzer_sys::fuzz_target;

#[path = "common.rs"]
mod common;

// Parsing never panics; accepted formulas print to text that parses back to
// the same formula, and classification is total.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for sig in common::signatures() {
        let Ok(f) = parse_formula(text, &sig) else { continue };
        let printed = f.to_string();
        let again = parse_formula(&printed, &sig).expect("printed formulas parse");
        assert_eq!(again, f, "round trip through `{printed}`");
        let _ = classify_quantifier(&f);
        if let Some(cond) = InvCondition::from_formula(&f) {
            assert_eq!(InvCondition::from_formula(&cond.to_formula()), Some(cond));
        }
    }
});
