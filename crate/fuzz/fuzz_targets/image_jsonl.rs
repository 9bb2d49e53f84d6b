#![no_main]

use has_core::formats::{join_image_records, parse_image_predictions, parse_image_truth};
use has_core::metrics::{gt_known_loc, top1_loc, EvalConfig};
use libfuzzer_sys::fuzz_target;

// Input: ground truth, a NUL byte, then predictions.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (gt, pred) = text.split_once('\0').unwrap_or((text, ""));
    let (Ok(gt), Ok(pred)) = (parse_image_truth(gt), parse_image_predictions(pred)) else { return };
    if let Ok(records) = join_image_records(gt, pred) {
        let cfg = EvalConfig::default();
        if let (Ok(a), Ok(b)) = (gt_known_loc(&records, &cfg), top1_loc(&records, &cfg)) {
            assert!((0.0..=1.0).contains(&a) && b <= a);
        }
    }
});
