#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = redcal::instances::parse_cnf(text) {
            let round = redcal::instances::parse_cnf(&redcal::instances::serialize_cnf(&f))
                .expect("serialized formula reparses");
            assert_eq!(round, f);
            // Inversion may reject, but must never panic, and a successful
            // inversion must survive its own translation.
            if let Ok(inst) = redcal::xorsat::invert(&f) {
                let back = redcal::xorsat::invert(&redcal::xorsat::translate(&inst))
                    .expect("translation inverts");
                assert_eq!(back, inst);
            }
        }
    }
});
