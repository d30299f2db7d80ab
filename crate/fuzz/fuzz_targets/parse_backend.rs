#![no_main]

use libfuzzer_sys::fuzz_target;
use pfreg::Backend;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(b) = text.parse::<Backend>() {
        assert_eq!(b.to_string().parse::<Backend>().unwrap(), b);
    }
});
