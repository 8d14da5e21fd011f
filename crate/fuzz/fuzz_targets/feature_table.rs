#![no_main]

use geoscatter::dataset::{read_features, write_features};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = read_features(data) {
        // anything accepted must survive a write/read round trip
        let mut out = Vec::new();
        write_features(&mut out, &table).expect("accepted table writes");
        let again = read_features(out.as_slice()).expect("written table reads");
        assert_eq!(again.schema, table.schema);
        assert_eq!(again.rows.len(), table.rows.len());
    }
});
