#![no_main]

use geoscatter::dataset::parse_edge_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(g) = parse_edge_list(s, None) {
            assert_eq!(g.degree().len(), g.n());
        }
    }
});
