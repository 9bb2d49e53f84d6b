#![no_main]

use has_core::stats::MeanFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = MeanFile::parse(text) {
            assert_eq!(MeanFile::parse(&m.to_json()).unwrap(), m);
        }
    }
});
