#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(d) = redcal::measure::parse_distribution(text) {
            let text2 = redcal::measure::serialize_distribution(&d);
            let round = redcal::measure::parse_distribution(&text2)
                .expect("serialized distribution reparses");
            assert_eq!(round.support(), d.support());
        }
    }
});
