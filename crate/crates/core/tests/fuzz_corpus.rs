//! Replays the checked-in fuzz corpus through the same entry points and
//! assertions as the fuzz targets, so the seeds stay meaningful on stable.

use std::fs;
use std::path::Path;

use has_core::formats::*;
use has_core::hast;
use has_core::hide_image::MixedHidePolicy;
use has_core::metrics::{gt_known_loc, mean_ap, top1_loc, EvalConfig};
use has_core::stats::MeanFile;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn split(data: &[u8]) -> (&str, &str) {
    let text = std::str::from_utf8(data).unwrap();
    text.split_once('\0').unwrap_or((text, ""))
}

#[test]
fn hast_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("hast_decode") {
        if let Ok(t) = hast::decode(&data) {
            assert_eq!(hast::encode(&t).unwrap(), data, "{name}");
            accepted += 1;
        }
    }
    assert_eq!(accepted, 3);
}

#[test]
fn image_jsonl_seeds() {
    for (name, data) in seeds("image_jsonl") {
        let (gt, pred) = split(&data);
        let (Ok(gt), Ok(pred)) = (parse_image_truth(gt), parse_image_predictions(pred)) else {
            assert_eq!(name, "empty_box");
            continue;
        };
        let records = join_image_records(gt, pred).unwrap();
        let cfg = EvalConfig::default();
        let (a, b) = (gt_known_loc(&records, &cfg).unwrap(), top1_loc(&records, &cfg).unwrap());
        assert!((0.0..=1.0).contains(&a) && b <= a, "{name}");
    }
}

#[test]
fn temporal_jsonl_seeds() {
    for (name, data) in seeds("temporal_jsonl") {
        let (gt, pred) = split(&data);
        let (Ok(gt), Ok(pred)) = (parse_temporal_truth(gt), parse_temporal_predictions(pred)) else {
            assert_eq!(name, "bad_interval");
            continue;
        };
        let m = mean_ap(&build_temporal_set(gt, pred), &EvalConfig::default()).unwrap();
        assert!((0.0..=1.0).contains(&m), "{name}");
    }
}

#[test]
fn mean_json_seeds() {
    for (name, data) in seeds("mean_json") {
        match MeanFile::parse(std::str::from_utf8(&data).unwrap()) {
            Ok(m) => assert_eq!(MeanFile::parse(&m.to_json()).unwrap(), m),
            Err(_) => assert_eq!(name, "count_mismatch"),
        }
    }
}

#[test]
fn mixed_policy_seeds() {
    for (name, data) in seeds("mixed_policy") {
        let parsed = std::str::from_utf8(&data).unwrap().parse::<MixedHidePolicy>();
        assert_eq!(parsed.is_ok(), name == "default" || name == "single", "{name}");
    }
}
