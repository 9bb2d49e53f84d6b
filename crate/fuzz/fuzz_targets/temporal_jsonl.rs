#![no_main]

use has_core::formats::{build_temporal_set, parse_temporal_predictions, parse_temporal_truth};
use has_core::metrics::{mean_ap, EvalConfig};
use libfuzzer_sys::fuzz_target;

// Input: ground truth, a NUL byte, then predictions.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (gt, pred) = text.split_once('\0').unwrap_or((text, ""));
    let (Ok(gt), Ok(pred)) = (parse_temporal_truth(gt), parse_temporal_predictions(pred)) else { return };
    let set = build_temporal_set(gt, pred);
    if let Some(m) = mean_ap(&set, &EvalConfig::default()) {
        assert!((0.0..=1.0).contains(&m));
    }
});
