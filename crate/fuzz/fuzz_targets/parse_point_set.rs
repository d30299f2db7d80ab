#![no_main]

use libfuzzer_sys::fuzz_target;
use pfreg::io::{parse_point_set, point_set_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_point_set(text) {
        // Anything accepted must survive its own writer.
        let again = parse_point_set(&point_set_to_json(&doc.set, doc.unit)).expect("emitted document reloads");
        assert_eq!(again.set.len(), doc.set.len());
    }
});
