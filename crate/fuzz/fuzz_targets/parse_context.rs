#![no_main]

use gamma_ultra::io::parse_context;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ctx) = parse_context(text) {
        let _ = ctx.realizations();
    }
});
