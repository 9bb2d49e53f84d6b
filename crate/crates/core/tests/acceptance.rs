//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line with its
//! measurement and wall time; the process exits non-zero if any criterion
//! fails or runs over its time budget.
//!
//! Run alone with `cargo test -p has-core --test acceptance`.

use std::collections::{BTreeMap, VecDeque};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use has_core::activation::{expectation_match, ConvFilter, ExpectationConfig, UniformPixels, case2_exactness, conv_forward};
use has_core::cam::{connected_components, BinaryMap, Connectivity};
use has_core::hide_image::{hide_patches, sample_mask, HideConfig};
use has_core::metrics::{average_precision, match_predictions, mean_ap, EvalConfig, TemporalEvalSet, TemporalPrediction, VideoTruth};
use has_core::toy::{self, Arm, DemoConfig, Pooling, ToyModel, SIDE};
use has_core::{derive_stream, BBox, Interval, RngKey, Stream, Tensor3};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- grid

fn grid_semantics() -> Outcome {
    let mut s = RngKey::new(11, 0).stream();
    let data: Vec<f32> = (0..224 * 224 * 3).map(|_| s.next_f64() as f32).collect();
    let img = Tensor3::new(224, 224, 3, data).map_err(|e| e.to_string())?;
    let mu = vec![0.485f32, 0.456, 0.406];

    let half = HideConfig::new(56, 0.5, mu.clone());
    let mask = sample_mask(224, 224, &half, derive_stream(1, 0, 0)).map_err(|e| e.to_string())?;
    let cells = mask.rows() * mask.cols();
    if cells != 16 {
        return Err(format!("224/56 grid has {cells} cells"));
    }

    let none = hide_patches(&img, &HideConfig::new(56, 0.0, mu.clone()), derive_stream(1, 0, 0)).unwrap();
    if none.data().iter().zip(img.data()).any(|(a, b)| a.to_bits() != b.to_bits()) {
        return Err("p_hide=0 changed the image".into());
    }
    let all = hide_patches(&img, &HideConfig::new(56, 1.0, mu.clone()), derive_stream(1, 0, 0)).unwrap();
    if all.data().chunks_exact(3).any(|px| px != mu.as_slice()) {
        return Err("p_hide=1 is not the constant-mean image".into());
    }

    let mut distinct = 0;
    for idx in 0..20u64 {
        let a = hide_patches(&img, &half, derive_stream(5, idx, 3)).unwrap();
        let b = hide_patches(&img, &half, derive_stream(5, idx, 3)).unwrap();
        if a != b {
            return Err(format!("sample {idx} not reproducible"));
        }
        let m1 = sample_mask(224, 224, &half, derive_stream(5, idx, 3)).unwrap();
        let m2 = sample_mask(224, 224, &half, derive_stream(5, idx, 4)).unwrap();
        if m1.cells() != m2.cells() {
            distinct += 1;
        }
    }
    check(
        distinct >= 15,
        format!("16 cells, identity at p=0, constant at p=1, reproducible; {distinct}/20 masks change with epoch"),
    )
}

// ---------------------------------------------------------------- case 2

fn case2() -> Outcome {
    let mut s = RngKey::new(22, 0).stream();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = 1 + s.below(7) as usize;
        let c = 1 + s.below(4) as usize;
        let w: Vec<f32> = (0..k * k * c).map(|_| s.uniform(-1.0, 1.0) as f32).collect();
        let fill: Vec<f32> = (0..c).map(|_| s.uniform(-2.0, 2.0) as f32).collect();
        let filter = ConvFilter::new(k, c, w.clone()).map_err(|e| e.to_string())?;

        // Oracle: a K×K all-fill patch through the conv, against Σ w·v in f64.
        let patch = Tensor3::filled(k, k, &fill).unwrap();
        let conv = f64::from(conv_forward(&patch, &filter).unwrap().data()[0]);
        let exact: f64 = w.iter().enumerate().map(|(i, &wi)| f64::from(wi) * f64::from(fill[i % c])).sum();
        let scale: f64 = w.iter().enumerate().map(|(i, &wi)| (f64::from(wi) * f64::from(fill[i % c])).abs()).sum();
        let rel = (conv - exact).abs() / scale.max(f64::MIN_POSITIVE);
        let report = case2_exactness(&filter, &fill).unwrap();
        if (report.analytic - exact).abs() > 1e-9 * scale.max(1.0) {
            return Err(format!("case2 report analytic {} != {}", report.analytic, exact));
        }
        worst = worst.max(rel).max(report.rel_diff);
    }
    check(worst <= 1e-5, format!("1000 filters, worst relative error {worst:.2e} (limit 1e-5)"))
}

// ---------------------------------------------------------------- expectation

fn expectation() -> Outcome {
    let mut s = RngKey::new(33, 0).stream();
    let w: Vec<f32> = (0..9).map(|_| s.uniform(-1.0, 1.0) as f32).collect();
    let filter = ConvFilter::new(3, 1, w).unwrap();
    let dist = UniformPixels { lo: 0.0, hi: 1.0, channels: 1 };

    let mean_fill = ExpectationConfig {
        image_side: 32,
        hide: HideConfig::new(8, 0.5, vec![0.5]),
        samples: 100_000,
        seed: 7,
    };
    let r = expectation_match(&filter, &dist, &mean_fill).map_err(|e| e.to_string())?;
    let z = (r.hidden.mean - r.analytic).abs() / r.hidden.stderr;
    if r.hidden.count < 100_000 || z > 3.0 {
        return Err(format!(
            "fill=mu: hidden mean {:.5} vs {:.5}, {:.2} stderr over {} placements",
            r.hidden.mean, r.analytic, z, r.hidden.count
        ));
    }

    let zero_fill = ExpectationConfig {
        hide: HideConfig::new(8, 0.5, vec![0.0]),
        ..mean_fill
    };
    let r0 = expectation_match(&filter, &dist, &zero_fill).map_err(|e| e.to_string())?;
    let fh = r0.cases.fully_hidden;
    let observed_gap = fh.mean - r0.analytic;
    let ok = (observed_gap - r0.fill_gap).abs() <= 1e-6 && r0.fill_gap.abs() > 3.0 * r.hidden.stderr;
    check(
        ok,
        format!(
            "fill=mu: {:.5} vs {:.5} ({z:.2} stderr, n={}); fill=0: fully-hidden offset {:.5} vs analytic gap {:.5}",
            r.hidden.mean, r.analytic, r.hidden.count, observed_gap, r0.fill_gap
        ),
    )
}

// ---------------------------------------------------------------- components

/// Flood-fill labelling: labels follow the raster order of each component's
/// first pixel.
fn flood_fill(bits: &[bool], h: usize, w: usize, eight: bool) -> Vec<u32> {
    let mut labels = vec![0u32; h * w];
    let mut next = 0;
    for start in 0..h * w {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (y, x) = ((p / w) as i64, (p % w) as i64);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    if (dy == 0 && dx == 0) || (!eight && dy != 0 && dx != 0) {
                        continue;
                    }
                    let (ny, nx) = (y + dy, x + dx);
                    if ny < 0 || nx < 0 || ny >= h as i64 || nx >= w as i64 {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if bits[q] && labels[q] == 0 {
                        labels[q] = next;
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    labels
}

fn components() -> Outcome {
    let (h, w) = (16usize, 16usize);
    let mut s = RngKey::new(44, 0).stream();
    let mut total_components = 0;
    for map_index in 0..1000 {
        let density = [0.2, 0.4, 0.5, 0.6, 0.8][map_index % 5];
        let bits: Vec<bool> = (0..h * w).map(|_| s.bernoulli(density)).collect();
        let map = BinaryMap::new(h, w, bits.clone()).unwrap();
        for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
            let got = connected_components(&map, conn);
            let want = flood_fill(&bits, h, w, eight);
            if got.labels() != want.as_slice() {
                return Err(format!("map {map_index}, {conn:?}: labels differ from flood fill"));
            }
            let n = want.iter().copied().max().unwrap_or(0) as usize;
            if got.components().len() != n {
                return Err(format!("map {map_index}: {} components, oracle {n}", got.components().len()));
            }
            total_components += n;
            for comp in got.components() {
                let pixels: Vec<(u32, u32)> = (0..h * w)
                    .filter(|&p| want[p] == comp.label)
                    .map(|p| ((p % w) as u32, (p / w) as u32))
                    .collect();
                let b = comp.bbox;
                let tight = pixels.iter().all(|&(x, y)| b.contains(x, y))
                    && pixels.iter().any(|&(x, _)| x == b.x0())
                    && pixels.iter().any(|&(x, _)| x + 1 == b.x1())
                    && pixels.iter().any(|&(_, y)| y == b.y0())
                    && pixels.iter().any(|&(_, y)| y + 1 == b.y1());
                if !tight || comp.pixel_count != pixels.len() {
                    return Err(format!("map {map_index}: component {} box {b:?} not tight", comp.label));
                }
            }
            // Largest component, ties to the earliest label.
            let mut best: Option<(u32, usize)> = None;
            for l in 1..=n as u32 {
                let size = want.iter().filter(|&&v| v == l).count();
                if best.map_or(true, |(_, bs)| size > bs) {
                    best = Some((l, size));
                }
            }
            if got.largest().map(|c| c.label) != best.map(|b| b.0) {
                return Err(format!("map {map_index}: wrong largest component"));
            }
        }
    }
    Ok(format!("1000 maps x 2 connectivities match flood fill; {total_components} boxes tight"))
}

// ---------------------------------------------------------------- metrics

fn raster_iou(a: &BBox, b: &BBox) -> f64 {
    let mut inter = 0u64;
    let mut union = 0u64;
    for y in 0..64 {
        for x in 0..64 {
            let (ia, ib) = (a.contains(x, y), b.contains(x, y));
            inter += u64::from(ia && ib);
            union += u64::from(ia || ib);
        }
    }
    inter as f64 / union as f64
}

fn random_box(s: &mut Stream) -> BBox {
    let x0 = s.below(63) as u32;
    let y0 = s.below(63) as u32;
    let x1 = x0 + 1 + s.below(u64::from(64 - x0 - 1) + 1) as u32;
    let y1 = y0 + 1 + s.below(u64::from(64 - y0 - 1) + 1) as u32;
    BBox::new(x0, y0, x1.min(64), y1.min(64)).unwrap()
}

fn random_interval(s: &mut Stream) -> Interval {
    let t0 = s.below(20) as u32;
    Interval::new(t0, t0 + 1 + s.below(8) as u32).unwrap()
}

/// Oracle ranking, matching, and PR-curve area for one class.
fn brute_force_ap(preds: &[TemporalPrediction], truth: &VideoTruth, theta: f64) -> (Vec<bool>, Option<f64>) {
    let mut ranked: Vec<(f64, u32, String, Interval)> =
        preds.iter().map(|p| (p.score, p.interval.t0(), p.video_id.clone(), p.interval)).collect();
    // Highest score first, then earlier start, then video id.
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut taken: BTreeMap<(String, usize), bool> = BTreeMap::new();
    let mut flags = Vec::new();
    for (_, _, vid, iv) in &ranked {
        let mut best: Option<(usize, f64)> = None;
        if let Some(gts) = truth.get(vid) {
            for (j, g) in gts.iter().enumerate() {
                if taken.contains_key(&(vid.clone(), j)) {
                    continue;
                }
                let inter = iv.t1().min(g.t1()).saturating_sub(iv.t0().max(g.t0()));
                let union = (iv.t1() - iv.t0()) + (g.t1() - g.t0()) - inter;
                let iou = f64::from(inter) / f64::from(union);
                if iou > theta && best.map_or(true, |(_, b)| iou > b) {
                    best = Some((j, iou));
                }
            }
        }
        if let Some((j, _)) = best {
            taken.insert((vid.clone(), j), true);
        }
        flags.push(best.is_some());
    }

    let n_gt: usize = truth.values().map(Vec::len).sum();
    if n_gt == 0 {
        return (flags, None);
    }
    // Walk every cut-off: area += precision(k) * (recall(k) - recall(k-1)).
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    let mut tp = 0;
    for (k, &hit) in flags.iter().enumerate() {
        tp += usize::from(hit);
        let precision = tp as f64 / (k + 1) as f64;
        let recall = tp as f64 / n_gt as f64;
        ap += precision * (recall - prev_recall);
        prev_recall = recall;
    }
    (flags, Some(ap))
}

fn random_instance(s: &mut Stream) -> (Vec<TemporalPrediction>, VideoTruth) {
    let videos = ["a", "b", "c"];
    let mut truth = VideoTruth::new();
    for _ in 0..s.below(5) {
        let v = videos[s.below(3) as usize];
        truth.entry(v.to_string()).or_default().push(random_interval(s));
    }
    let preds = (0..s.below(7))
        .map(|_| TemporalPrediction {
            video_id: videos[s.below(3) as usize].to_string(),
            interval: random_interval(s),
            // Coarse scores so ties are common.
            score: s.below(4) as f64 / 4.0,
        })
        .collect();
    (preds, truth)
}

fn metrics() -> Outcome {
    let mut s = RngKey::new(55, 0).stream();
    for i in 0..500 {
        let (a, b) = (random_box(&mut s), random_box(&mut s));
        if a.iou(&b) != raster_iou(&a, &b) {
            return Err(format!("pair {i}: iou {} vs raster {}", a.iou(&b), raster_iou(&a, &b)));
        }
    }

    let cfg = EvalConfig::default();
    let mut worst = 0.0f64;
    for i in 0..500 {
        let (preds, truth) = random_instance(&mut s);
        let (flags, want) = brute_force_ap(&preds, &truth, 0.5);
        if match_predictions(&preds, &truth, &cfg) != flags {
            return Err(format!("instance {i}: TP/FP sequence differs"));
        }
        let got = average_precision(&preds, &truth, &cfg);
        match (got, want) {
            (None, None) => {}
            (Some(g), Some(w)) => worst = worst.max((g - w).abs()),
            _ => return Err(format!("instance {i}: AP {got:?} vs oracle {want:?}")),
        }
    }
    if worst > 1e-12 {
        return Err(format!("AP differs from PR enumeration by {worst:.2e}"));
    }

    let thresholds: Vec<f64> = (1..10).map(|t| f64::from(t) / 10.0).collect();
    for i in 0..200 {
        let mut set = TemporalEvalSet::default();
        for class in 0..3i64 {
            let (preds, truth) = random_instance(&mut s);
            for (v, ivs) in truth {
                for iv in ivs {
                    set.add_truth(class, &v, iv);
                }
            }
            for p in preds {
                set.add_prediction(class, p);
            }
        }
        let maps: Vec<f64> = thresholds
            .iter()
            .filter_map(|&t| mean_ap(&set, &EvalConfig::new(t, true).unwrap()))
            .collect();
        if maps.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(format!("set {i}: mAP not monotone in threshold: {maps:?}"));
        }
    }
    Ok(format!(
        "500 IoU pairs exact; 500 AP instances identical TP/FP and |dAP| <= {worst:.1e}; mAP monotone on 200 sets"
    ))
}

// ---------------------------------------------------------------- gradients

/// ReLU on/off state per (sample, filter, position) and the max-pooling
/// winner per (sample, filter).
struct Pattern {
    active: Vec<bool>,
    argmax: Vec<usize>,
}

/// Loss of the toy model recomputed in f64 with naive loops. With `frozen`,
/// the ReLU gates and max-pool winners are taken from it instead of being
/// recomputed, which keeps finite differences on one linear piece.
fn naive_loss(
    conv: &[f64],
    cls: &[f64],
    bias: &[f64],
    pooling: Pooling,
    batch: &[(Tensor3, usize)],
    frozen: Option<&Pattern>,
) -> (f64, Pattern) {
    let (k, f, m) = (5usize, 8usize, SIDE - 4);
    let mut total = 0.0;
    let mut pattern = Pattern { active: Vec::new(), argmax: Vec::new() };
    for (n, (img, label)) in batch.iter().enumerate() {
        let mut pooled = vec![0.0f64; f];
        for fi in 0..f {
            let mut acc = 0.0;
            let mut best = (0.0f64, 0usize);
            let mut at_frozen = 0.0;
            for y in 0..m {
                for x in 0..m {
                    let mut v = 0.0;
                    for ky in 0..k {
                        for kx in 0..k {
                            v += f64::from(img.get(y + ky, x + kx, 0)) * conv[(ky * k + kx) * f + fi];
                        }
                    }
                    let pos = y * m + x;
                    let on = match frozen {
                        Some(p) => p.active[(n * f + fi) * m * m + pos],
                        None => v > 0.0,
                    };
                    pattern.active.push(v > 0.0);
                    let r = if on { v } else { 0.0 };
                    acc += r;
                    if v > best.0 {
                        best = (v, pos);
                    }
                    if frozen.is_some_and(|p| p.argmax[n * f + fi] == pos) {
                        at_frozen = r;
                    }
                }
            }
            pattern.argmax.push(best.1);
            pooled[fi] = match (pooling, frozen) {
                (Pooling::Gap, _) => acc / (m * m) as f64,
                (Pooling::Gmp, None) => best.0,
                (Pooling::Gmp, Some(_)) => at_frozen,
            };
        }
        let scores: Vec<f64> = (0..2)
            .map(|c| bias[c] + (0..f).map(|fi| cls[c * f + fi] * pooled[fi]).sum::<f64>())
            .collect();
        let mx = scores[0].max(scores[1]);
        let z: f64 = scores.iter().map(|s| (s - mx).exp()).sum();
        total += z.ln() + mx - scores[*label];
    }
    (total / batch.len() as f64, pattern)
}

fn gradients() -> Outcome {
    let eps = 1e-3;
    let (mut worst, mut worst_plain) = (0.0f64, 0.0f64);
    let (mut checked, mut plain_ok) = (0, 0);
    let spec = toy::SyntheticSpec::default();
    let data = toy::generate_dataset(&spec, 4, RngKey::new(66, 0)).unwrap();
    let batch: Vec<(Tensor3, usize)> = data.iter().map(|s| (s.image.clone(), s.label)).collect();
    let refs: Vec<(&Tensor3, usize)> = batch.iter().map(|(t, l)| (t, *l)).collect();

    for pooling in [Pooling::Gap, Pooling::Gmp] {
        let mut model = ToyModel::init(pooling, RngKey::new(66, 1));
        model.bias = vec![0.1, -0.2];
        let (_, grad) = model.loss_and_grad(&refs).map_err(|e| e.to_string())?;

        let conv: Vec<f64> = model.conv.iter().map(|&v| f64::from(v)).collect();
        let cls: Vec<f64> = model.classifier.iter().map(|&v| f64::from(v)).collect();
        let bias: Vec<f64> = model.bias.iter().map(|&v| f64::from(v)).collect();
        let (_, base) = naive_loss(&conv, &cls, &bias, pooling, &batch, None);
        let groups: [(&[f32], usize); 3] = [(&grad.conv, 0), (&grad.classifier, 1), (&grad.bias, 2)];
        for (analytic, group) in groups {
            for (i, &a) in analytic.iter().enumerate() {
                let a = f64::from(a);
                let rel = |numeric: f64| (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
                let central = |frozen: Option<&Pattern>| {
                    let mut p = [conv.clone(), cls.clone(), bias.clone()];
                    p[group][i] += eps;
                    let up = naive_loss(&p[0], &p[1], &p[2], pooling, &batch, frozen).0;
                    p[group][i] -= 2.0 * eps;
                    let down = naive_loss(&p[0], &p[1], &p[2], pooling, &batch, frozen).0;
                    (up - down) / (2.0 * eps)
                };
                worst = worst.max(rel(central(Some(&base))));
                let plain = rel(central(None));
                worst_plain = worst_plain.max(plain);
                plain_ok += usize::from(plain <= 1e-3);
                checked += 1;
            }
        }
    }
    check(
        worst <= 1e-3,
        format!(
            "{checked} parameters (GAP and GMP), worst relative error {worst:.2e} (limit 1e-3) with ReLU gates held; \
             unheld: {plain_ok}/{checked} within 1e-3, worst {worst_plain:.1e} from kink crossings"
        ),
    )
}

// ---------------------------------------------------------------- toy runs

const DEMO_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn end_to_end() -> Outcome {
    let cfg = DemoConfig::default();
    let (mut base_loc, mut has_loc, mut base_acc, mut has_acc) = (vec![], vec![], vec![], vec![]);
    for seed in DEMO_SEEDS {
        let setup = toy::seed_setup(&cfg, seed).map_err(|e| e.to_string())?;
        let (b, _) = toy::run_arm(&cfg, &setup, Arm::Baseline, 0.0).map_err(|e| e.to_string())?;
        let (h, _) = toy::run_arm(&cfg, &setup, Arm::Has, cfg.p_hide).map_err(|e| e.to_string())?;
        base_loc.push(b.gt_known_loc);
        has_loc.push(h.gt_known_loc);
        base_acc.push(b.test_accuracy);
        has_acc.push(h.test_accuracy);
    }
    let gain = mean(&has_loc) - mean(&base_loc);
    let min_acc = base_acc.iter().chain(&has_acc).copied().fold(1.0, f64::min);
    check(
        gain >= 0.05 && min_acc >= 0.9,
        format!(
            "GT-known baseline {:.3} -> HaS {:.3} ({:+.1} pp, need +5); min test accuracy {:.3} (need 0.9)",
            mean(&base_loc),
            mean(&has_loc),
            100.0 * gain,
            min_acc
        ),
    )
}

fn probability_sweep() -> Outcome {
    let cfg = DemoConfig::default();
    let (mut low, mut high) = (vec![], vec![]);
    for seed in DEMO_SEEDS {
        let setup = toy::seed_setup(&cfg, seed).map_err(|e| e.to_string())?;
        low.push(toy::run_arm(&cfg, &setup, Arm::Has, 0.25).map_err(|e| e.to_string())?.0.test_accuracy);
        high.push(toy::run_arm(&cfg, &setup, Arm::Has, 0.75).map_err(|e| e.to_string())?.0.test_accuracy);
    }
    check(
        mean(&high) <= mean(&low),
        format!("mean test accuracy p=0.25 {:.4}, p=0.75 {:.4}", mean(&low), mean(&high)),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "grid semantics", budget: Duration::from_secs(1), run: grid_semantics },
        Criterion { name: "case-2 exactness", budget: Duration::from_secs(5), run: case2 },
        Criterion { name: "expectation matching", budget: Duration::from_secs(30), run: expectation },
        Criterion { name: "connected components & bbox", budget: Duration::from_secs(5), run: components },
        Criterion { name: "metrics oracle equivalence", budget: Duration::from_secs(10), run: metrics },
        Criterion { name: "toy gradient check", budget: Duration::from_secs(10), run: gradients },
        Criterion { name: "end-to-end HaS effect", budget: Duration::from_secs(180), run: end_to_end },
        // No separate budget is stated; the end-to-end one is reused.
        Criterion { name: "probability sweep direction", budget: Duration::from_secs(180), run: probability_sweep },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let over = elapsed > c.budget;
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over budget {:.0?}", c.budget)),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:<30} {:>7.2}s  {detail}", c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
