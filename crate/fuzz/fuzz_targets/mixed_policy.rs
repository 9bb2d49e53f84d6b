#![no_main]

use has_core::hide_image::MixedHidePolicy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = text.parse::<MixedHidePolicy>() {
            assert!(!p.choices().is_empty());
        }
    }
});
