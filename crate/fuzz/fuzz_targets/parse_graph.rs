#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = redcal::instances::parse_graph(text) {
            let round = redcal::instances::parse_graph(&redcal::instances::serialize_graph(&g))
                .expect("serialized graph reparses");
            assert_eq!(round.labels, g.labels);
            assert_eq!(round.edges, g.edges);
        }
    }
});
