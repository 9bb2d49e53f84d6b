use std::fs;
use std::path::Path;

use has_core::activation::{case2_exactness, expectation_match, ConvFilter, ExpectationConfig, UniformPixels};
use has_core::cam::{
    compute_cam, compute_cam_1d, largest_component_bbox, localize_segments, upscale_nearest, CamInputs, ClassWeights,
    Connectivity, LocalizeConfig,
};
use has_core::formats::{
    build_temporal_set, join_image_records, parse_image_predictions, parse_image_truth, parse_temporal_predictions,
    parse_temporal_truth,
};
use has_core::hide_image::{hide_mixed, hide_patches, HideConfig, MixedHidePolicy};
use has_core::hide_temporal::{hide_segments, resample_uniform, TemporalHideConfig};
use has_core::metrics::{gt_known_loc, mean_ap_report, top1_loc, EvalConfig, TEMPORAL_THRESHOLDS};
use has_core::stats::{DatasetMean, MeanFile};
use has_core::toy::{self, Arm, DemoConfig, Pooling, ToyModel};
use has_core::{derive_stream, AnyTensor, Error, RngKey, Tensor3};
use serde_json::{json, Value};

use crate::imageio::{self, FileKind};
use crate::{
    CheckArgs, DemoArgs, EvalArgs, FillChoice, FillSource, Failure, HideArgs, HideTemporalArgs, LocalizeArgs, Mode,
    Pool,
};

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Pretty JSON to `out` or stdout.
fn emit(value: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes") + "\n";
    match out {
        Some(p) => imageio::write_bytes(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fill_values(src: &FillSource, channels: usize) -> Result<Vec<f32>, Failure> {
    let fill = match (&src.mean_file, &src.fill) {
        (Some(p), _) => MeanFile::parse(&read_text(p)?)?.mean,
        (None, Some(v)) => v.clone(),
        (None, None) => unreachable!("clap requires one fill source"),
    };
    if fill.len() != channels {
        return Err(Error::ChannelMismatch {
            expected: channels,
            got: fill.len(),
        }
        .into());
    }
    Ok(fill)
}

pub fn mean(inputs: &[std::path::PathBuf], out: Option<&Path>) -> Result<(), Failure> {
    let mut acc: Option<DatasetMean> = None;
    for path in inputs {
        let tensor = imageio::read_any(path)?;
        let acc = acc.get_or_insert_with(|| DatasetMean::new(tensor.channels()));
        let r = match &tensor {
            AnyTensor::Image(t) => acc.accumulate(t),
            AnyTensor::Sequence(t) => acc.accumulate(t),
        };
        r.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let file = acc.expect("at least one input").to_file()?;
    let text = file.to_json() + "\n";
    match out {
        Some(p) => imageio::write_bytes(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn hide(a: &HideArgs) -> Result<(), Failure> {
    let kind = imageio::output_kind(&a.output, "--output")?;
    let mixed = match &a.patch.mixed {
        Some(spec) => {
            let mut policy: MixedHidePolicy = spec.parse().map_err(|e: Error| Failure::Usage(format!("--mixed: {e}")))?;
            policy.allow_partial_edge = a.partial_edges;
            Some(policy)
        }
        None => None,
    };
    let img = imageio::read_image(&a.input)?;
    let fill = fill_values(&a.fill, img.channels())?;
    let key = derive_stream(a.seeding.seed, a.seeding.sample_index, a.seeding.epoch);
    let hidden = match (mixed, a.patch.patch_size) {
        (Some(policy), _) => hide_mixed(&img, &policy, a.p_hide, &fill, key)?,
        (None, Some(size)) => {
            let cfg = HideConfig::new(size, a.p_hide, fill).with_partial_edges(a.partial_edges);
            hide_patches(&img, &cfg, key)?
        }
        (None, None) => unreachable!("clap requires a patch choice"),
    };
    imageio::write_bytes(&a.output, &imageio::encode(&hidden.into(), kind)?)
}

pub fn hide_temporal(a: &HideTemporalArgs) -> Result<(), Failure> {
    if imageio::output_kind(&a.output, "--output")? != FileKind::Hast {
        return Err(Failure::Usage("--output: sequences are written as .hast".into()));
    }
    let seq = imageio::read_sequence(&a.input)?;
    let cfg = TemporalHideConfig {
        total: a.f_total,
        segment: a.f_segment,
        p_hide: a.p_hide,
        fill: fill_values(&a.fill, seq.channels())?,
    };
    let resampled = resample_uniform(&seq, cfg.total)?;
    let key = derive_stream(a.seeding.seed, a.seeding.sample_index, a.seeding.epoch);
    let hidden = hide_segments(&resampled, &cfg, key)?;
    imageio::write_bytes(&a.output, &imageio::encode(&hidden.into(), FileKind::Hast)?)
}

/// A CAM with nothing above zero has no box; report `null` rather than fail.
fn no_box(e: &Error) -> bool {
    matches!(e, Error::DegenerateCam | Error::EmptyForeground)
}

pub fn localize(a: &LocalizeArgs) -> Result<(), Failure> {
    let cam_kind = match &a.cam_out {
        Some(p) => Some(imageio::output_kind(p, "--cam-out")?),
        None => None,
    };
    let weights = match imageio::read_any(&a.weights)? {
        AnyTensor::Sequence(t) => ClassWeights::from_tensor(&t),
        AnyTensor::Image(_) => {
            return Err(Failure::Data(format!("{}: weights must be a rank-2 tensor", a.weights.display())))
        }
    };
    let (result, cam) = match imageio::read_any(&a.features)? {
        AnyTensor::Image(fm) => {
            let cam = compute_cam(
                &CamInputs {
                    feature_maps: fm,
                    class_weights: weights,
                },
                a.class,
            )?;
            let mut cfg = LocalizeConfig::new(a.tau)?;
            cfg.connectivity = Connectivity::from_neighbours(a.connectivity)?;
            let bbox = match largest_component_bbox(&cam, &cfg) {
                Ok(b) => json!(b.to_array()),
                Err(e) if no_box(&e) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            (json!({ "bbox": bbox }), AnyTensor::Image(cam))
        }
        AnyTensor::Sequence(seq) => {
            let cam = compute_cam_1d(&seq, &weights, a.class)?;
            let segments: Vec<Value> = match localize_segments(&cam, a.tau) {
                Ok(s) => s
                    .iter()
                    .map(|s| json!([s.interval.t0(), s.interval.t1(), s.score]))
                    .collect(),
                Err(e) if no_box(&e) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            (json!({ "segments": segments }), AnyTensor::Sequence(cam))
        }
    };
    if let (Some(path), Some(kind)) = (&a.cam_out, cam_kind) {
        imageio::write_bytes(path, &imageio::encode(&cam, kind)?)?;
    }
    emit(&result, a.out.as_deref())
}

pub fn eval(a: &EvalArgs) -> Result<(), Failure> {
    let strict = !a.inclusive;
    let gt = read_text(&a.gt)?;
    let pred = read_text(&a.pred)?;
    let report = if a.temporal {
        let thresholds = if a.iou.is_empty() { TEMPORAL_THRESHOLDS.to_vec() } else { a.iou.clone() };
        let set = build_temporal_set(parse_temporal_truth(&gt)?, parse_temporal_predictions(&pred)?);
        let mut results = Vec::new();
        for &t in &thresholds {
            results.push(mean_ap_report(&set, &EvalConfig::new(t, strict)?));
        }
        let maps: Vec<f64> = results.iter().filter_map(|r| r.map).collect();
        let average = (maps.len() == results.len()).then(|| maps.iter().sum::<f64>() / maps.len() as f64);
        json!({ "strict": strict, "results": results, "average_map": average })
    } else {
        let thresholds = if a.iou.is_empty() { vec![0.5] } else { a.iou.clone() };
        let records = join_image_records(parse_image_truth(&gt)?, parse_image_predictions(&pred)?)?;
        let mut results = Vec::new();
        for &t in &thresholds {
            let cfg = EvalConfig::new(t, strict)?;
            results.push(json!({
                "iou_threshold": t,
                "top1_loc": top1_loc(&records, &cfg)?,
                "gt_known_loc": gt_known_loc(&records, &cfg)?,
            }));
        }
        json!({ "strict": strict, "records": records.len(), "results": results })
    };
    emit(&report, a.out.as_deref())
}

/// Tag for the random filter weights, apart from the image streams.
const FILTER_TAG: u64 = 0x4649_4C54;

pub fn check_activations(a: &CheckArgs) -> Result<(), Failure> {
    let side = a.image_side.unwrap_or(4 * a.s);
    if side % a.s != 0 || side < a.k {
        return Err(Failure::Usage(format!(
            "--image-side {side} must be a multiple of --s {} and at least --k {}",
            a.s, a.k
        )));
    }
    let dist = UniformPixels {
        lo: 0.0,
        hi: 2.0,
        channels: 1,
    };
    let fill = match a.fill {
        FillChoice::Mean => 1.0,
        FillChoice::Zero => 0.0,
        FillChoice::Value(v) => v,
    };
    let filter = if a.random_weights {
        let mut s = RngKey::new(a.seed, 0).substream(FILTER_TAG).stream();
        ConvFilter::new(a.k, 1, (0..a.k * a.k).map(|_| s.uniform(-1.0, 1.0) as f32).collect())?
    } else {
        ConvFilter::ones(a.k, 1)
    };
    let cfg = ExpectationConfig {
        image_side: side,
        hide: HideConfig::new(a.s, a.p_hide, vec![fill]),
        samples: a.samples,
        seed: a.seed,
    };
    let report = expectation_match(&filter, &dist, &cfg)?;
    let case2 = case2_exactness(&filter, &[fill])?;
    let value = json!({
        "config": {
            "k": a.k,
            "s": a.s,
            "p_hide": a.p_hide,
            "fill": fill,
            "image_side": side,
            "samples": a.samples,
            "seed": a.seed,
            "random_weights": a.random_weights,
            "pixels": "uniform[0, 2)",
        },
        "expectation": report,
        "case2": case2,
    });
    emit(&value, a.out.as_deref())
}

/// Test images whose CAMs are written by `--dump-cams`.
const DUMPED_CAMS: usize = 8;

fn dump_cams(dir: &Path, seed: u64, arm: Arm, model: &ToyModel, test: &[toy::Sample]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?;
    let weights = model.class_weights();
    let arm_name = match arm {
        Arm::Baseline => "baseline",
        Arm::Has => "has",
    };
    for (i, sample) in test.iter().take(DUMPED_CAMS).enumerate() {
        let fwd = model.forward(&sample.image)?;
        let cam = compute_cam(
            &CamInputs {
                feature_maps: fwd.features,
                class_weights: weights.clone(),
            },
            sample.label,
        )?;
        let cam = upscale_nearest(&cam, toy::SIDE, toy::SIDE)?;
        let peak = cam.data().iter().copied().fold(0.0f32, f32::max);
        let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
        let norm = Tensor3::new(toy::SIDE, toy::SIDE, 1, cam.data().iter().map(|v| v * scale).collect())?;
        let path = dir.join(format!("seed{seed}_{arm_name}_{i}.png"));
        imageio::write_bytes(&path, &imageio::encode_png(&norm)?)?;
    }
    Ok(())
}

pub fn demo(a: &DemoArgs) -> Result<(), Failure> {
    let mut cfg = DemoConfig {
        n_train: a.n_train,
        n_test: a.n_test,
        pooling: match a.pool {
            Pool::Gap => Pooling::Gap,
            Pool::Gmp => Pooling::Gmp,
        },
        patch_size: a.patch_size,
        p_hide: a.p_hide,
        tau: a.tau,
        ..DemoConfig::default()
    };
    cfg.train.epochs = a.epochs;
    if toy::SIDE % a.patch_size != 0 {
        return Err(Failure::Usage(format!("--patch-size {} must divide {}", a.patch_size, toy::SIDE)));
    }
    let arms: &[Arm] = match a.mode {
        Mode::Baseline => &[Arm::Baseline],
        Mode::Has => &[Arm::Has],
        Mode::Both => &[Arm::Baseline, Arm::Has],
    };
    let mut rows = Vec::new();
    for &seed in &a.seeds {
        let setup = toy::seed_setup(&cfg, seed)?;
        for &arm in arms {
            eprintln!("seed {seed}: training {arm:?}");
            let (row, model) = toy::run_arm(&cfg, &setup, arm, a.p_hide)?;
            if let Some(dir) = &a.dump_cams {
                dump_cams(dir, seed, arm, &model, &setup.test)?;
            }
            rows.push(row);
        }
    }
    let summary = toy::summarize(&rows);
    emit(&json!({ "config": cfg, "rows": rows, "summary": summary }), a.out.as_deref())
}
