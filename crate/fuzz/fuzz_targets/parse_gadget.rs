#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = redcal::gadgets::parse_gadget(text) {
            let round = redcal::gadgets::parse_gadget(&redcal::gadgets::serialize_gadget(&g))
                .expect("serialized gadget reparses");
            assert_eq!(round, g);
        }
    }
});
