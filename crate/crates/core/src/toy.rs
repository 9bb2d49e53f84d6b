//! Desk-scale Hide-and-Seek demonstration.
//!
//! Synthetic 32×32 single-channel images contain two adjacent 6×6 blobs: a
//! solid *primary* blob whose sign always matches the class, and a weaker
//! *secondary* dipole blob whose orientation matches the class only 80% of
//! the time. The ground-truth box covers both. A classifier can reach perfect
//! accuracy from the primary blob alone, so its CAM tends to ignore the
//! secondary one; hiding patches during training removes the primary blob
//! often enough that the secondary one has to be learned too.
//!
//! The model is one 5×5 conv layer with 8 filters and ReLU, a global pooling
//! layer (average or max), and a 2-way linear classifier. Gradients are
//! written out by hand.

use serde::Serialize;

use crate::cam::{compute_cam, largest_component_bbox, upscale_nearest, CamInputs, ClassWeights, Connectivity, LocalizeConfig};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::hide_image::{hide_patches, HideConfig};
use crate::metrics::{gt_known_loc, top1_loc, EvalConfig, EvalRecord};
use crate::rng::{derive_stream, RngKey, Stream};
use crate::stats::DatasetMean;
use crate::tensor::Tensor3;

pub const SIDE: usize = 32;
pub const KERNEL: usize = 5;
pub const FILTERS: usize = 8;
pub const CLASSES: usize = 2;
pub const MAP_SIDE: usize = SIDE - KERNEL + 1;
const TAPS: usize = KERNEL * KERNEL;
const POSITIONS: usize = MAP_SIDE * MAP_SIDE;

/// Parameters of the synthetic two-blob task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub blob: usize,
    /// Uniform noise on `[-a, a]` added to every pixel.
    pub noise_amplitude: f32,
    pub primary_amplitude: f32,
    pub secondary_amplitude: f32,
    /// Probability that the secondary texture agrees with the class
    /// (0.8 gives a label correlation of 0.6).
    pub secondary_agreement: f64,
    /// Pixels between the two blobs, inclusive range.
    pub gap: (usize, usize),
    /// Minimum distance from the blobs to the image border.
    pub margin: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            blob: 6,
            noise_amplitude: 0.1,
            primary_amplitude: 1.0,
            secondary_amplitude: 0.6,
            secondary_agreement: 0.8,
            gap: (1, 2),
            margin: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Tensor3,
    pub label: usize,
    pub gt_box: BBox,
    pub primary: BBox,
    pub secondary: BBox,
}

fn primary_texture(label: usize) -> f32 {
    if label == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Secondary textures are zero-mean dipoles: 0 splits the blob top/bottom,
/// 1 splits it left/right.
fn secondary_texture(kind: usize, dy: usize, dx: usize, blob: usize) -> f32 {
    let first_half = if kind == 0 { dy < blob / 2 } else { dx < blob / 2 };
    if first_half {
        1.0
    } else {
        -1.0
    }
}

/// Draw one sample of class `label`.
pub fn generate_sample(spec: &SyntheticSpec, label: usize, stream: &mut Stream) -> Result<Sample> {
    let b = spec.blob;
    let gap = spec.gap.0 + stream.below((spec.gap.1 - spec.gap.0 + 1) as u64) as usize;
    let horizontal = stream.bernoulli(0.5);
    let primary_first = stream.bernoulli(0.5);
    let (uw, uh) = if horizontal { (2 * b + gap, b) } else { (b, 2 * b + gap) };
    let free_x = SIDE - 2 * spec.margin - uw;
    let free_y = SIDE - 2 * spec.margin - uh;
    let ux = spec.margin + stream.below(free_x as u64 + 1) as usize;
    let uy = spec.margin + stream.below(free_y as u64 + 1) as usize;

    let first = (ux, uy);
    let second = if horizontal { (ux + b + gap, uy) } else { (ux, uy + b + gap) };
    let (p, s) = if primary_first { (first, second) } else { (second, first) };

    let agrees = stream.bernoulli(spec.secondary_agreement);
    let kind = if agrees { label } else { 1 - label };

    let mut data = vec![0.0f32; SIDE * SIDE];
    for v in data.iter_mut() {
        *v = stream.uniform(-f64::from(spec.noise_amplitude), f64::from(spec.noise_amplitude)) as f32;
    }
    for dy in 0..b {
        for dx in 0..b {
            data[(p.1 + dy) * SIDE + p.0 + dx] += spec.primary_amplitude * primary_texture(label);
            data[(s.1 + dy) * SIDE + s.0 + dx] += spec.secondary_amplitude * secondary_texture(kind, dy, dx, b);
        }
    }

    let bbox = |(x, y): (usize, usize)| BBox::new(x as u32, y as u32, (x + b) as u32, (y + b) as u32);
    let primary = bbox(p)?;
    let secondary = bbox(s)?;
    Ok(Sample {
        image: Tensor3::new(SIDE, SIDE, 1, data)?,
        label,
        gt_box: primary.union(&secondary),
        primary,
        secondary,
    })
}

/// `n` samples with alternating labels; sample `i` draws from
/// `key.substream(i)`.
pub fn generate_dataset(spec: &SyntheticSpec, n: usize, key: RngKey) -> Result<Vec<Sample>> {
    if n == 0 {
        return Err(Error::config("dataset size must be positive"));
    }
    if spec.blob == 0 || spec.gap.0 > spec.gap.1 || 2 * spec.blob + spec.gap.1 + 2 * spec.margin > SIDE {
        return Err(Error::config("blobs do not fit the image"));
    }
    (0..n)
        .map(|i| generate_sample(spec, i % CLASSES, &mut key.substream(i as u64).stream()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Gap,
    Gmp,
}

/// Single conv layer + global pooling + linear classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    /// Tap-major, filter-minor: index `tap * FILTERS + f`.
    pub conv: Vec<f32>,
    /// Class-major: index `class * FILTERS + f`.
    pub classifier: Vec<f32>,
    pub bias: Vec<f32>,
    pub pooling: Pooling,
}

/// Gradients with the same layout as [`ToyModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub conv: Vec<f32>,
    pub classifier: Vec<f32>,
    pub bias: Vec<f32>,
}

impl Gradients {
    fn zeros() -> Self {
        Self {
            conv: vec![0.0; TAPS * FILTERS],
            classifier: vec![0.0; CLASSES * FILTERS],
            bias: vec![0.0; CLASSES],
        }
    }
}

pub struct Forward {
    pub scores: [f32; CLASSES],
    /// `28 × 28 × 8` post-ReLU maps.
    pub features: Tensor3,
}

impl ToyModel {
    pub fn zeros(pooling: Pooling) -> Self {
        Self {
            conv: vec![0.0; TAPS * FILTERS],
            classifier: vec![0.0; CLASSES * FILTERS],
            bias: vec![0.0; CLASSES],
            pooling,
        }
    }

    /// Gaussian initialisation with fan-in scaling.
    pub fn init(pooling: Pooling, key: RngKey) -> Self {
        let mut s = key.stream();
        let conv_sd = (2.0 / TAPS as f64).sqrt();
        let cls_sd = (1.0 / FILTERS as f64).sqrt();
        Self {
            conv: (0..TAPS * FILTERS).map(|_| (s.gaussian() * conv_sd) as f32).collect(),
            classifier: (0..CLASSES * FILTERS).map(|_| (s.gaussian() * cls_sd) as f32).collect(),
            bias: vec![0.0; CLASSES],
            pooling,
        }
    }

    pub fn class_weights(&self) -> ClassWeights {
        ClassWeights::new(CLASSES, FILTERS, self.classifier.clone()).expect("classifier shape")
    }

    fn is_finite(&self) -> bool {
        self.conv.iter().chain(&self.classifier).chain(&self.bias).all(|v| v.is_finite())
    }

    /// Pre-activations for every position, `POSITIONS × FILTERS`.
    fn conv_pre(&self, img: &[f32], pre: &mut [f32]) {
        for y in 0..MAP_SIDE {
            for x in 0..MAP_SIDE {
                let mut acc = [0.0f32; FILTERS];
                for ky in 0..KERNEL {
                    let row = &img[(y + ky) * SIDE + x..(y + ky) * SIDE + x + KERNEL];
                    for (kx, &v) in row.iter().enumerate() {
                        let w: &[f32; FILTERS] = self.conv[(ky * KERNEL + kx) * FILTERS..][..FILTERS]
                            .try_into()
                            .expect("filter row");
                        for f in 0..FILTERS {
                            acc[f] += v * w[f];
                        }
                    }
                }
                pre[(y * MAP_SIDE + x) * FILTERS..][..FILTERS].copy_from_slice(&acc);
            }
        }
    }

    /// Pooled features plus, for max pooling, the winning position per filter.
    fn pool(&self, pre: &[f32]) -> ([f32; FILTERS], [usize; FILTERS]) {
        let mut pooled = [0.0f32; FILTERS];
        let mut arg = [0usize; FILTERS];
        match self.pooling {
            Pooling::Gap => {
                for px in pre.chunks_exact(FILTERS) {
                    for f in 0..FILTERS {
                        pooled[f] += px[f].max(0.0);
                    }
                }
                for p in pooled.iter_mut() {
                    *p /= POSITIONS as f32;
                }
            }
            Pooling::Gmp => {
                for (pos, px) in pre.chunks_exact(FILTERS).enumerate() {
                    for f in 0..FILTERS {
                        if px[f] > pooled[f] {
                            pooled[f] = px[f];
                            arg[f] = pos;
                        }
                    }
                }
            }
        }
        (pooled, arg)
    }

    fn scores(&self, pooled: &[f32; FILTERS]) -> [f32; CLASSES] {
        let mut scores = [0.0f32; CLASSES];
        for (c, s) in scores.iter_mut().enumerate() {
            *s = self.bias[c]
                + self.classifier[c * FILTERS..(c + 1) * FILTERS]
                    .iter()
                    .zip(pooled)
                    .map(|(w, p)| w * p)
                    .sum::<f32>();
        }
        scores
    }

    fn check_input(image: &Tensor3) -> Result<()> {
        if image.height() != SIDE || image.width() != SIDE || image.channels() != 1 {
            return Err(Error::shape(format!(
                "toy model expects {SIDE}x{SIDE}x1, got {}x{}x{}",
                image.height(),
                image.width(),
                image.channels()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, image: &Tensor3) -> Result<Forward> {
        Self::check_input(image)?;
        let mut pre = vec![0.0f32; POSITIONS * FILTERS];
        self.conv_pre(image.data(), &mut pre);
        let (pooled, _) = self.pool(&pre);
        let scores = self.scores(&pooled);
        for v in pre.iter_mut() {
            *v = v.max(0.0);
        }
        Ok(Forward {
            scores,
            features: Tensor3::new(MAP_SIDE, MAP_SIDE, FILTERS, pre)?,
        })
    }

    pub fn predict(&self, image: &Tensor3) -> Result<usize> {
        Ok(argmax(&self.forward(image)?.scores))
    }

    /// Cross-entropy loss of one sample; adds its gradient into `grad`.
    fn accumulate_grad(&self, img: &[f32], label: usize, pre: &mut [f32], grad: &mut Gradients) -> f64 {
        self.conv_pre(img, pre);
        let (pooled, arg) = self.pool(pre);
        let scores = self.scores(&pooled);

        let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let exps: Vec<f64> = scores.iter().map(|&s| f64::from(s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let loss = z.ln() - f64::from(scores[label] - max);

        let mut dscore = [0.0f32; CLASSES];
        for c in 0..CLASSES {
            dscore[c] = (exps[c] / z) as f32 - if c == label { 1.0 } else { 0.0 };
        }
        let mut dpooled = [0.0f32; FILTERS];
        for c in 0..CLASSES {
            grad.bias[c] += dscore[c];
            for f in 0..FILTERS {
                grad.classifier[c * FILTERS + f] += dscore[c] * pooled[f];
                dpooled[f] += dscore[c] * self.classifier[c * FILTERS + f];
            }
        }

        match self.pooling {
            Pooling::Gap => {
                let scale = 1.0 / POSITIONS as f32;
                let g: [f32; FILTERS] = std::array::from_fn(|f| dpooled[f] * scale);
                for y in 0..MAP_SIDE {
                    for x in 0..MAP_SIDE {
                        let px = &pre[(y * MAP_SIDE + x) * FILTERS..][..FILTERS];
                        let gm: [f32; FILTERS] = std::array::from_fn(|f| if px[f] > 0.0 { g[f] } else { 0.0 });
                        for ky in 0..KERNEL {
                            let row = &img[(y + ky) * SIDE + x..(y + ky) * SIDE + x + KERNEL];
                            for (kx, &v) in row.iter().enumerate() {
                                let dw: &mut [f32; FILTERS] = (&mut grad.conv[(ky * KERNEL + kx) * FILTERS..][..FILTERS])
                                    .try_into()
                                    .expect("filter row");
                                for f in 0..FILTERS {
                                    dw[f] += v * gm[f];
                                }
                            }
                        }
                    }
                }
            }
            Pooling::Gmp => {
                for f in 0..FILTERS {
                    if pooled[f] <= 0.0 {
                        continue;
                    }
                    let (y, x) = (arg[f] / MAP_SIDE, arg[f] % MAP_SIDE);
                    for ky in 0..KERNEL {
                        for kx in 0..KERNEL {
                            grad.conv[(ky * KERNEL + kx) * FILTERS + f] += img[(y + ky) * SIDE + x + kx] * dpooled[f];
                        }
                    }
                }
            }
        }
        loss
    }

    /// Mean loss and mean gradient over a batch of `(image, label)` pairs.
    pub fn loss_and_grad(&self, batch: &[(&Tensor3, usize)]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::config("empty batch"));
        }
        let mut grad = Gradients::zeros();
        let mut pre = vec![0.0f32; POSITIONS * FILTERS];
        let mut loss = 0.0;
        for (img, label) in batch {
            Self::check_input(img)?;
            if *label >= CLASSES {
                return Err(Error::ClassOutOfRange { class: *label, classes: CLASSES });
            }
            loss += self.accumulate_grad(img.data(), *label, &mut pre, &mut grad);
        }
        let n = batch.len() as f32;
        for g in grad.conv.iter_mut().chain(&mut grad.classifier).chain(&mut grad.bias) {
            *g /= n;
        }
        Ok((loss / batch.len() as f64, grad))
    }
}

fn argmax(scores: &[f32; CLASSES]) -> usize {
    let mut best = 0;
    for c in 1..CLASSES {
        if scores[c] > scores[best] {
            best = c;
        }
    }
    best
}

/// Hide-and-Seek settings applied to training images.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HasSettings {
    pub patch_size: usize,
    pub p_hide: f64,
    /// Fill value; the training-set mean when `None`.
    pub fill: Option<Vec<f32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Peak learning rate, annealed to zero with a half cosine over training.
    pub learning_rate: f32,
    pub momentum: f32,
    pub hide: Option<HasSettings>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.1,
            momentum: 0.9,
            hide: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn learning_rate_at(&self, epoch: usize) -> f32 {
        let progress = epoch as f64 / self.epochs as f64;
        (f64::from(self.learning_rate) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos())) as f32
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::config("epochs and batch size must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("momentum must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Shuffle order for `epoch` comes from this sub-stream of the run key.
const SHUFFLE_TAG: u64 = 0x5348_5546;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ToyModel,
    /// Mean training loss per epoch.
    pub loss_trace: Vec<f64>,
}

/// Mini-batch SGD with momentum. With hiding enabled, sample `i` in epoch
/// `e` is hidden with `derive_stream(seed, i, e)`; evaluation never hides.
pub fn train(model: &ToyModel, data: &[Sample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::config("no training data"));
    }
    let hide_cfg = match &cfg.hide {
        Some(h) => {
            let fill = match &h.fill {
                Some(f) => f.clone(),
                None => dataset_mean(data)?,
            };
            Some(HideConfig::new(h.patch_size, h.p_hide, fill))
        }
        None => None,
    };

    let mut model = model.clone();
    let mut velocity = Gradients::zeros();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let run_key = RngKey::new(cfg.seed, 0);

    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate_at(epoch);
        order.sort_unstable();
        run_key.substream(SHUFFLE_TAG).substream(epoch as u64).stream().shuffle(&mut order);

        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let hidden: Vec<Tensor3> = match &hide_cfg {
                Some(h) => chunk
                    .iter()
                    .map(|&i| hide_patches(&data[i].image, h, derive_stream(cfg.seed, i as u64, epoch as u64)))
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            };
            let batch: Vec<(&Tensor3, usize)> = chunk
                .iter()
                .enumerate()
                .map(|(j, &i)| (hidden.get(j).unwrap_or(&data[i].image), data[i].label))
                .collect();
            let (loss, grad) = model.loss_and_grad(&batch)?;
            epoch_loss += loss * chunk.len() as f64;

            let params = model.conv.iter_mut().chain(&mut model.classifier).chain(&mut model.bias);
            let vel = velocity.conv.iter_mut().chain(&mut velocity.classifier).chain(&mut velocity.bias);
            let grads = grad.conv.iter().chain(&grad.classifier).chain(&grad.bias);
            for ((p, v), g) in params.zip(vel).zip(grads) {
                *v = cfg.momentum * *v + g;
                *p -= lr * *v;
            }
        }
        let mean_loss = epoch_loss / data.len() as f64;
        if !mean_loss.is_finite() || !model.is_finite() {
            return Err(Error::Diverged(epoch));
        }
        loss_trace.push(mean_loss);
    }
    Ok(TrainOutcome { model, loss_trace })
}

/// Per-channel mean over the training images.
pub fn dataset_mean(data: &[Sample]) -> Result<Vec<f32>> {
    let mut acc = DatasetMean::new(1);
    for s in data {
        acc.accumulate(&s.image)?;
    }
    acc.finalize()
}

pub fn accuracy(model: &ToyModel, data: &[Sample]) -> Result<f64> {
    let mut correct = 0usize;
    for s in data {
        if model.predict(&s.image)? == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len().max(1) as f64)
}

/// Build an evaluation record from CAMs for the ground-truth and predicted
/// classes. CAMs are resized to the image with nearest-neighbour sampling; a
/// CAM without positive activation yields no box.
pub fn record_from_cams(
    id: usize,
    sample: &Sample,
    pred_class: usize,
    cam_gt: &Tensor3,
    cam_pred: &Tensor3,
    localize: &LocalizeConfig,
) -> Result<EvalRecord> {
    let boxed = |cam: &Tensor3| -> Result<Option<BBox>> {
        let up = upscale_nearest(cam, sample.image.height(), sample.image.width())?;
        match largest_component_bbox(&up, localize) {
            Ok(b) => Ok(Some(b)),
            Err(Error::DegenerateCam) | Err(Error::EmptyForeground) => Ok(None),
            Err(e) => Err(e),
        }
    };
    Ok(EvalRecord {
        image_id: id.to_string(),
        gt_class: sample.label as i64,
        gt_boxes: vec![sample.gt_box],
        pred_class: Some(pred_class as i64),
        box_for_pred_class: boxed(cam_pred)?,
        box_for_gt_class: boxed(cam_gt)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub accuracy: f64,
    pub gt_known_loc: f64,
    pub top1_loc: f64,
    /// Images whose ground-truth-class CAM had no positive activation.
    pub degenerate_cams: usize,
}

/// GT-known and Top-1 localization of `model` on `data` at CAM threshold
/// `tau` (8-connectivity, strict IoU > 0.5).
pub fn evaluate_localization(model: &ToyModel, data: &[Sample], tau: f32) -> Result<LocalizationReport> {
    let localize = LocalizeConfig {
        threshold_frac: tau,
        connectivity: Connectivity::Eight,
    };
    LocalizeConfig::new(tau)?;
    let weights = model.class_weights();
    let mut records = Vec::with_capacity(data.len());
    let mut correct = 0usize;
    for (i, s) in data.iter().enumerate() {
        let fwd = model.forward(&s.image)?;
        let pred = argmax(&fwd.scores);
        if pred == s.label {
            correct += 1;
        }
        let inputs = CamInputs {
            feature_maps: fwd.features,
            class_weights: weights.clone(),
        };
        let cam_gt = compute_cam(&inputs, s.label)?;
        let cam_pred = if pred == s.label { cam_gt.clone() } else { compute_cam(&inputs, pred)? };
        records.push(record_from_cams(i, s, pred, &cam_gt, &cam_pred, &localize)?);
    }
    let cfg = EvalConfig::default();
    Ok(LocalizationReport {
        accuracy: correct as f64 / data.len().max(1) as f64,
        gt_known_loc: gt_known_loc(&records, &cfg)?,
        top1_loc: top1_loc(&records, &cfg)?,
        degenerate_cams: records.iter().filter(|r| r.box_for_gt_class.is_none()).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Baseline,
    Has,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoConfig {
    pub spec: SyntheticSpec,
    pub n_train: usize,
    pub n_test: usize,
    pub train: TrainConfig,
    pub pooling: Pooling,
    pub patch_size: usize,
    pub p_hide: f64,
    pub tau: f32,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            spec: SyntheticSpec::default(),
            n_train: 2000,
            n_test: 1000,
            train: TrainConfig::default(),
            pooling: Pooling::Gap,
            patch_size: 8,
            p_hide: 0.5,
            tau: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub seed: u64,
    pub arm: Arm,
    pub p_hide: Option<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub gt_known_loc: f64,
    pub top1_loc: f64,
    pub degenerate_cams: usize,
    pub final_loss: f64,
}

/// Data and initial weights for one seed; shared by every arm.
pub struct SeedSetup {
    pub seed: u64,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub init: ToyModel,
}

const TRAIN_DATA_TAG: u64 = 1;
const TEST_DATA_TAG: u64 = 2;
const INIT_TAG: u64 = 3;

pub fn seed_setup(cfg: &DemoConfig, seed: u64) -> Result<SeedSetup> {
    let root = RngKey::new(seed, 0);
    Ok(SeedSetup {
        seed,
        train: generate_dataset(&cfg.spec, cfg.n_train, root.substream(TRAIN_DATA_TAG))?,
        test: generate_dataset(&cfg.spec, cfg.n_test, root.substream(TEST_DATA_TAG))?,
        init: ToyModel::init(cfg.pooling, root.substream(INIT_TAG)),
    })
}

/// Train and evaluate one arm. `p_hide` overrides the config for the HaS arm.
pub fn run_arm(cfg: &DemoConfig, setup: &SeedSetup, arm: Arm, p_hide: f64) -> Result<(DemoRow, ToyModel)> {
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = setup.seed;
    train_cfg.hide = match arm {
        Arm::Baseline => None,
        Arm::Has => Some(HasSettings {
            patch_size: cfg.patch_size,
            p_hide,
            fill: None,
        }),
    };
    let outcome = train(&setup.init, &setup.train, &train_cfg)?;
    let report = evaluate_localization(&outcome.model, &setup.test, cfg.tau)?;
    let row = DemoRow {
        seed: setup.seed,
        arm,
        p_hide: matches!(arm, Arm::Has).then_some(p_hide),
        train_accuracy: accuracy(&outcome.model, &setup.train)?,
        test_accuracy: report.accuracy,
        gt_known_loc: report.gt_known_loc,
        top1_loc: report.top1_loc,
        degenerate_cams: report.degenerate_cams,
        final_loss: *outcome.loss_trace.last().expect("at least one epoch"),
    };
    Ok((row, outcome.model))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub arm: Arm,
    pub p_hide: Option<f64>,
    pub mean_test_accuracy: f64,
    pub mean_gt_known_loc: f64,
    pub mean_top1_loc: f64,
}

pub fn summarize(rows: &[DemoRow]) -> Vec<ArmSummary> {
    let mut keys: Vec<(Arm, Option<f64>)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|k| k.0 == r.arm && k.1 == r.p_hide) {
            keys.push((r.arm, r.p_hide));
        }
    }
    keys.into_iter()
        .map(|(arm, p)| {
            let sel: Vec<&DemoRow> = rows.iter().filter(|r| r.arm == arm && r.p_hide == p).collect();
            let n = sel.len() as f64;
            ArmSummary {
                arm,
                p_hide: p,
                mean_test_accuracy: sel.iter().map(|r| r.test_accuracy).sum::<f64>() / n,
                mean_gt_known_loc: sel.iter().map(|r| r.gt_known_loc).sum::<f64>() / n,
                mean_top1_loc: sel.iter().map(|r| r.top1_loc).sum::<f64>() / n,
            }
        })
        .collect()
}
