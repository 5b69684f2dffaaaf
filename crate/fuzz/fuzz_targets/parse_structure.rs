#![no_main]

use gamma_ultra::io::{parse_structure, StructureDoc};
use gamma_ultra::structures::StructureHandle;
use libfuzzer_sys::fuzz_target;

// Finite structures that load survive a round trip through their document.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = parse_structure(text) else { return };
    match &m {
        StructureHandle::Finite(s) => {
            let doc = serde_json::to_string(&StructureDoc::from_finite(s)).expect("documents serialize");
            assert_eq!(parse_structure(&doc).expect("round trip"), m);
        }
        StructureHandle::Torsion(g) => {
            let _ = g.is_finite();
            let _ = g.realize_finite(256);
        }
        StructureHandle::Naturals(_) => {}
    }
});
