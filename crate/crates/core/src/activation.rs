//! Numerical checks of what mean-value fill does to a first-layer filter.
//!
//! After hiding, a `K × K` filter placement sees either only visible pixels,
//! only hidden pixels, or a mix. A fully hidden placement outputs exactly
//! `Σ w_i · v`. With `v = μ` every case has expected output `Σ w_i · μ`,
//! which is also the expected output on unhidden images. Only the first
//! moment matches; hidden regions have no variance, so nothing stronger is
//! checked here.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hide_image::{apply_hide, sample_mask, HideConfig, HideMask};
use crate::rng::{derive_stream, Stream};
use crate::tensor::Tensor3;

/// A single-output `K × K × C` filter. Weights are tap-major, channels last:
/// index `(ky * K + kx) * C + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvFilter {
    size: usize,
    channels: usize,
    weights: Vec<f32>,
}

impl ConvFilter {
    pub fn new(size: usize, channels: usize, weights: Vec<f32>) -> Result<Self> {
        if size == 0 || channels == 0 || weights.len() != size * size * channels {
            return Err(Error::shape(format!(
                "{size}x{size}x{channels} filter needs {} weights, got {}",
                size * size * channels,
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            size,
            channels,
            weights,
        })
    }

    pub fn ones(size: usize, channels: usize) -> Self {
        Self::new(size, channels, vec![1.0; size * size * channels]).expect("valid filter")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    /// `Σ_i w_i · v` in `f64`, where `v` is one value per channel.
    pub fn response_to_constant(&self, v: &[f64]) -> f64 {
        self.weights
            .chunks_exact(self.channels)
            .map(|tap| tap.iter().zip(v).map(|(&w, &x)| f64::from(w) * x).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementCase {
    FullyVisible,
    FullyHidden,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementGrid {
    pub rows: usize,
    pub cols: usize,
    pub cases: Vec<PlacementCase>,
}

impl PlacementGrid {
    pub fn get(&self, y: usize, x: usize) -> PlacementCase {
        self.cases[y * self.cols + x]
    }

    pub fn count(&self, case: PlacementCase) -> usize {
        self.cases.iter().filter(|&&c| c == case).count()
    }
}

fn valid_output(h: usize, w: usize, k: usize) -> Result<(usize, usize)> {
    if k == 0 || k > h || k > w {
        return Err(Error::shape(format!("kernel {k} does not fit a {h}x{w} input")));
    }
    Ok((h - k + 1, w - k + 1))
}

/// Classify every stride-1 valid placement of a `k × k` window.
pub fn classify_placements(mask: &HideMask, k: usize) -> Result<PlacementGrid> {
    let (h, w) = (mask.height(), mask.width());
    let (rows, cols) = valid_output(h, w, k)?;

    // prefix sums of hidden pixels make each window O(1)
    let mut integral = vec![0usize; (h + 1) * (w + 1)];
    for y in 0..h {
        for x in 0..w {
            integral[(y + 1) * (w + 1) + x + 1] = usize::from(mask.is_hidden(y, x))
                + integral[y * (w + 1) + x + 1]
                + integral[(y + 1) * (w + 1) + x]
                - integral[y * (w + 1) + x];
        }
    }
    let window = |y: usize, x: usize| {
        integral[(y + k) * (w + 1) + x + k] + integral[y * (w + 1) + x]
            - integral[y * (w + 1) + x + k]
            - integral[(y + k) * (w + 1) + x]
    };

    let full = k * k;
    let cases = (0..rows)
        .flat_map(|y| (0..cols).map(move |x| (y, x)))
        .map(|(y, x)| match window(y, x) {
            0 => PlacementCase::FullyVisible,
            n if n == full => PlacementCase::FullyHidden,
            _ => PlacementCase::Partial,
        })
        .collect();
    Ok(PlacementGrid { rows, cols, cases })
}

/// Valid, stride-1 cross-correlation with one output channel.
pub fn conv_forward(img: &Tensor3, filter: &ConvFilter) -> Result<Tensor3> {
    if img.channels() != filter.channels {
        return Err(Error::ChannelMismatch {
            expected: filter.channels,
            got: img.channels(),
        });
    }
    let k = filter.size;
    let (rows, cols) = valid_output(img.height(), img.width(), k)?;
    let c = filter.channels;
    let mut out = Vec::with_capacity(rows * cols);
    for y in 0..rows {
        for x in 0..cols {
            let mut acc = 0.0f32;
            for ky in 0..k {
                let src = &img.data()[img.index(y + ky, x, 0)..img.index(y + ky, x + k - 1, 0) + c];
                let w = &filter.weights[ky * k * c..(ky + 1) * k * c];
                acc += src.iter().zip(w).map(|(a, b)| a * b).sum::<f32>();
            }
            out.push(acc);
        }
    }
    Tensor3::new(rows, cols, 1, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case2Report {
    /// Filter output on a `K × K` patch made entirely of the fill value.
    pub conv_output: f64,
    /// `Σ w_i · v` evaluated in `f64`.
    pub analytic: f64,
    pub abs_diff: f64,
    /// `abs_diff / max(|analytic|, Σ |w_i · v|)`; 0 when both are 0.
    pub rel_diff: f64,
}

/// Compare the conv output on an all-fill patch with the closed form.
pub fn case2_exactness(filter: &ConvFilter, fill: &[f32]) -> Result<Case2Report> {
    let k = filter.size;
    let patch = Tensor3::filled(k, k, fill)?;
    let conv_output = f64::from(conv_forward(&patch, filter)?.data()[0]);
    let v: Vec<f64> = fill.iter().map(|&x| f64::from(x)).collect();
    let analytic = filter.response_to_constant(&v);
    let magnitude: f64 = filter
        .weights
        .chunks_exact(filter.channels)
        .flat_map(|tap| tap.iter().zip(&v).map(|(&w, &x)| (f64::from(w) * x).abs()))
        .sum();
    let abs_diff = (conv_output - analytic).abs();
    let scale = analytic.abs().max(magnitude);
    let rel_diff = if scale == 0.0 { abs_diff } else { abs_diff / scale };
    Ok(Case2Report {
        conv_output,
        analytic,
        abs_diff,
        rel_diff,
    })
}

/// Source of random pixels with a known mean.
pub trait PixelDistribution {
    fn channels(&self) -> usize;
    fn mean(&self) -> Vec<f64>;
    fn sample(&self, stream: &mut Stream, out: &mut [f32]);
}

/// Each channel i.i.d. uniform on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPixels {
    pub lo: f64,
    pub hi: f64,
    pub channels: usize,
}

impl PixelDistribution for UniformPixels {
    fn channels(&self) -> usize {
        self.channels
    }

    fn mean(&self) -> Vec<f64> {
        vec![0.5 * (self.lo + self.hi); self.channels]
    }

    fn sample(&self, stream: &mut Stream, out: &mut [f32]) {
        for v in out {
            *v = stream.uniform(self.lo, self.hi) as f32;
        }
    }
}

/// Every pixel equal to `value`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantPixels {
    pub value: Vec<f32>,
}

impl PixelDistribution for ConstantPixels {
    fn channels(&self) -> usize {
        self.value.len()
    }

    fn mean(&self) -> Vec<f64> {
        self.value.iter().map(|&v| f64::from(v)).collect()
    }

    fn sample(&self, _stream: &mut Stream, out: &mut [f32]) {
        out.copy_from_slice(&self.value);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationConfig {
    /// Side of the square random images; must be a multiple of the patch size.
    pub image_side: usize,
    pub hide: HideConfig,
    /// Minimum number of filter placements to evaluate on hidden images.
    pub samples: usize,
    pub seed: u64,
}

/// Mean of a set of activations with an image-clustered standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActivationStats {
    pub count: usize,
    pub mean: f64,
    /// Cluster-robust standard error treating each image as one draw;
    /// placements within an image overlap and are not independent.
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseBreakdown {
    pub fully_visible: ActivationStats,
    pub fully_hidden: ActivationStats,
    pub partial: ActivationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub images: usize,
    pub distribution_mean: Vec<f64>,
    pub fill: Vec<f32>,
    /// `Σ w_i · μ`.
    pub analytic: f64,
    /// `Σ w_i · (v − μ)`: the offset every fully hidden placement carries.
    pub fill_gap: f64,
    pub hidden: ActivationStats,
    pub unhidden: ActivationStats,
    /// `hidden.mean − unhidden.mean`, with a paired per-image standard error.
    pub difference: f64,
    pub difference_stderr: f64,
    pub cases: CaseBreakdown,
}

/// Per-image sums for one group of placements.
#[derive(Default)]
struct Clustered {
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl Clustered {
    fn push(&mut self, sum: f64, count: usize) {
        self.sums.push(sum);
        self.counts.push(count);
    }

    fn stats(&self) -> ActivationStats {
        let total: usize = self.counts.iter().sum();
        let n = self.sums.len();
        if total == 0 {
            return ActivationStats {
                count: 0,
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = self.sums.iter().sum::<f64>() / total as f64;
        let stderr = if n < 2 {
            f64::NAN
        } else {
            let ss: f64 = self
                .sums
                .iter()
                .zip(&self.counts)
                .map(|(&s, &c)| (s - mean * c as f64).powi(2))
                .sum();
            (ss * n as f64 / (n as f64 - 1.0)).sqrt() / total as f64
        };
        ActivationStats {
            count: total,
            mean,
            stderr,
        }
    }
}

/// Monte-Carlo comparison of activations on hidden and unhidden random
/// images. Image `i` uses `derive_stream(seed, i, 0)`: sub-stream 0 draws the
/// pixels, sub-stream 1 the mask.
pub fn expectation_match(
    filter: &ConvFilter,
    dist: &dyn PixelDistribution,
    cfg: &ExpectationConfig,
) -> Result<ExpectationReport> {
    let c = dist.channels();
    if c != filter.channels {
        return Err(Error::ChannelMismatch {
            expected: filter.channels,
            got: c,
        });
    }
    if cfg.hide.fill.len() != c {
        return Err(Error::ChannelMismatch {
            expected: c,
            got: cfg.hide.fill.len(),
        });
    }
    if cfg.samples == 0 {
        return Err(Error::config("at least one sample is required"));
    }
    let side = cfg.image_side;
    let (rows, cols) = valid_output(side, side, filter.size)?;
    let per_image = rows * cols;
    let images = cfg.samples.div_ceil(per_image);

    let mut hidden = Clustered::default();
    let mut unhidden = Clustered::default();
    let mut by_case: [Clustered; 3] = Default::default();
    let mut diffs = Vec::with_capacity(images);

    for i in 0..images {
        let key = derive_stream(cfg.seed, i as u64, 0);
        let mut stream = key.substream(0).stream();
        let mut data = vec![0.0f32; side * side * c];
        for px in data.chunks_exact_mut(c) {
            dist.sample(&mut stream, px);
        }
        let img = Tensor3::new(side, side, c, data)?;
        let mask = sample_mask(side, side, &cfg.hide, key.substream(1))?;
        let hidden_img = apply_hide(&img, &mask, &cfg.hide)?;
        let grid = classify_placements(&mask, filter.size)?;

        let plain = conv_forward(&img, filter)?;
        let masked = conv_forward(&hidden_img, filter)?;

        let plain_sum: f64 = plain.data().iter().map(|&v| f64::from(v)).sum();
        let masked_sum: f64 = masked.data().iter().map(|&v| f64::from(v)).sum();
        unhidden.push(plain_sum, per_image);
        hidden.push(masked_sum, per_image);
        diffs.push((masked_sum - plain_sum) / per_image as f64);

        let mut case_sums = [0.0f64; 3];
        let mut case_counts = [0usize; 3];
        for (&case, &v) in grid.cases.iter().zip(masked.data()) {
            let slot = case_slot(case);
            case_sums[slot] += f64::from(v);
            case_counts[slot] += 1;
        }
        for slot in 0..3 {
            by_case[slot].push(case_sums[slot], case_counts[slot]);
        }
    }

    let mu = dist.mean();
    let analytic = filter.response_to_constant(&mu);
    let fill_f64: Vec<f64> = cfg.hide.fill.iter().map(|&v| f64::from(v)).collect();
    let fill_gap = filter.response_to_constant(&fill_f64) - analytic;

    let n = diffs.len() as f64;
    let difference = diffs.iter().sum::<f64>() / n;
    let difference_stderr = if diffs.len() < 2 {
        f64::NAN
    } else {
        (diffs.iter().map(|d| (d - difference).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    };

    Ok(ExpectationReport {
        images,
        distribution_mean: mu,
        fill: cfg.hide.fill.clone(),
        analytic,
        fill_gap,
        hidden: hidden.stats(),
        unhidden: unhidden.stats(),
        difference,
        difference_stderr,
        cases: CaseBreakdown {
            fully_visible: by_case[0].stats(),
            fully_hidden: by_case[1].stats(),
            partial: by_case[2].stats(),
        },
    })
}

fn case_slot(case: PlacementCase) -> usize {
    match case {
        PlacementCase::FullyVisible => 0,
        PlacementCase::FullyHidden => 1,
        PlacementCase::Partial => 2,
    }
}
