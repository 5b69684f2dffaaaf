#![no_main]

use gamma_ultra::catalog;
use gamma_ultra::io::parse_value;
use gamma_ultra::structures::{FiniteStructure, NatModel, StructureHandle, Summand, TorsionGroup, Value};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(json) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    let mut summands = catalog::tail_sum(2).summands;
    summands.extend(catalog::prufer(3).summands);
    summands.push(Summand::Cyclic {
        p: 5,
        k: 2,
        mult: gamma_ultra::structures::Multiplicity::Finite(2),
    });
    let g = TorsionGroup::new(summands).expect("valid group");
    let members = [
        StructureHandle::Finite(FiniteStructure::abelian_group(&[2, 4]).expect("valid group")),
        StructureHandle::Naturals(NatModel),
        StructureHandle::Torsion(g.clone()),
    ];
    for m in &members {
        if let Ok(Value::Tor(t)) = parse_value(&json, m) {
            let _ = g.order_of(&t);
        }
    }
});
