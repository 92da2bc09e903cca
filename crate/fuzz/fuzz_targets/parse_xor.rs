#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(inst) = redcal::instances::parse_xor(text) {
            let round = redcal::instances::parse_xor(&redcal::instances::serialize_xor(&inst))
                .expect("serialized instance reparses");
            assert_eq!(round, inst);
        }
    }
});
