#![no_main]

use gamma_ultra::catalog;
use gamma_ultra::io::parse_sequence;
use gamma_ultra::ultraproduct::{Family, GammaContext, UltrafilterDescriptor};
use gamma_ultra::structures::{FiniteStructure, StructureHandle};
use libfuzzer_sys::fuzz_target;

fn contexts() -> Vec<GammaContext> {
    let z6 = StructureHandle::Finite(FiniteStructure::cyclic_group(6).expect("valid group"));
    vec![
        catalog::two_adic_context(4),
        catalog::two_power_family(4),
        GammaContext::allowing_realizations(
            Family::Finite(vec![z6.clone(), z6]),
            UltrafilterDescriptor::Principal { size: 2, atom: 0 },
            vec![],
        )
        .expect("valid context"),
    ]
}

// Sequences that parse are validated against their family without panics,
// and print.
fuzz_target!(|data: &[u8]| {
    let Ok(json) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    for ctx in contexts() {
        if let Ok(f) = parse_sequence(&json, &ctx.family) {
            let _ = f.to_string();
            let _ = ctx.check_sequence(&f);
            let _ = f.canonical();
        }
    }
});
