#![no_main]
use libfuzzer_sys::fuzz_target;
use redcal::coding::{elias_delta_decode, elias_delta_encode, BitCode, MetaRecord};

fuzz_target!(|data: &[u8]| {
    if let Ok(code) = BitCode::from_bytes(data) {
        assert_eq!(BitCode::from_bytes(&code.to_bytes()).unwrap(), code);
        if let Ok((value, used)) = elias_delta_decode(code.bits(), 0) {
            assert!(used <= code.len());
            let canon = elias_delta_encode(value).unwrap();
            assert_eq!(canon.bits(), &code.bits()[..used]);
        }
        let _ = MetaRecord::decode_values(code.bits(), 0);
    }
});
