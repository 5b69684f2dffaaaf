#![no_main]

use gamma_ultra::formula::UnaryPP;
use gamma_ultra::structures::{compute_inv_presentation, TorsionGroup};
use libfuzzer_sys::fuzz_target;
use num_bigint::BigUint;

// Accepted p.p. formulas normalize stably and evaluate on a small
// presentation without panicking.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pp) = UnaryPP::parse(text) else { return };
    let again = UnaryPP::parse(&pp.to_string()).expect("printed p.p. formulas parse");
    assert_eq!(again, pp);
    let g = TorsionGroup::finite(&[(2, 1), (2, 3), (3, 2)]).expect("valid group");
    let _ = compute_inv_presentation(&g, &pp, &UnaryPP::trivial(), &BigUint::from(64u32));
});
