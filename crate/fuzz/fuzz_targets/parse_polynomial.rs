#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = redcal::lowdeg::parse_polynomial(text) {
            let round = redcal::lowdeg::parse_polynomial(&redcal::lowdeg::serialize_polynomial(&p))
                .expect("serialized polynomial reparses");
            assert_eq!(round.coeffs().len(), p.coeffs().len());
        }
    }
});
