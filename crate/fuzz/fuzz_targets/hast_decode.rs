#![no_main]

use has_core::hast;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = hast::decode(data) {
        // Accepted files are canonical: re-encoding gives the same bytes.
        assert_eq!(hast::encode(&t).unwrap(), data);
    }
});
