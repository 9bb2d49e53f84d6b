//! Image-space Hide-and-Seek.
//!
//! An image is divided into a grid of `S × S` cells and each cell is hidden
//! independently with probability `p_hide`. Hidden pixels are overwritten
//! with a fill vector (the dataset mean by default) and nothing is rescaled.
//! The same key always produces the same mask, so a training loop gets a
//! fresh but reproducible mask per (image, epoch) through
//! [`derive_stream`](crate::rng::derive_stream).
//!
//! Also here: the feature-map variant (one mask shared by every channel),
//! and the two baselines, Random Erasing and pixel-level dropout.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::rng::RngKey;
use crate::tensor::Tensor3;

#[derive(Debug, Clone, PartialEq)]
pub struct HideConfig {
    pub patch_size: usize,
    pub p_hide: f64,
    /// One value per channel.
    pub fill: Vec<f32>,
    /// Permit a patch size that does not divide the image; trailing cells
    /// are then smaller rectangles.
    pub allow_partial_edge: bool,
}

impl HideConfig {
    pub fn new(patch_size: usize, p_hide: f64, fill: Vec<f32>) -> Self {
        Self {
            patch_size,
            p_hide,
            fill,
            allow_partial_edge: false,
        }
    }

    pub fn with_partial_edges(mut self, allow: bool) -> Self {
        self.allow_partial_edge = allow;
        self
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::config(format!("{name} must be in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_grid(height: usize, width: usize, patch_size: usize, allow_partial_edge: bool) -> Result<()> {
    if patch_size == 0 {
        return Err(Error::config("patch size must be positive"));
    }
    if patch_size > height.min(width) {
        return Err(Error::config(format!(
            "patch size {patch_size} exceeds image side {}",
            height.min(width)
        )));
    }
    if !allow_partial_edge && (height % patch_size != 0 || width % patch_size != 0) {
        return Err(Error::config(format!(
            "patch size {patch_size} does not divide {height}x{width} and partial edges are disabled"
        )));
    }
    Ok(())
}

/// Which grid cells are hidden. Row-major, `true` = hidden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HideMask {
    height: usize,
    width: usize,
    patch_size: usize,
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl HideMask {
    /// Build a mask from explicit cells.
    pub fn from_cells(height: usize, width: usize, patch_size: usize, cells: Vec<bool>) -> Result<Self> {
        check_grid(height, width, patch_size, true)?;
        let rows = height.div_ceil(patch_size);
        let cols = width.div_ceil(patch_size);
        if cells.len() != rows * cols {
            return Err(Error::shape(format!(
                "mask for {height}x{width} with patch {patch_size} needs {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        Ok(Self {
            height,
            width,
            patch_size,
            rows,
            cols,
            cells,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    pub fn hidden_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Whether pixel `(y, x)` falls in a hidden cell.
    #[inline]
    pub fn is_hidden(&self, y: usize, x: usize) -> bool {
        self.cell(y / self.patch_size, x / self.patch_size)
    }
}

/// Sample a mask for an `height × width` image. Cells are drawn in
/// row-major order, one uniform draw each.
pub fn sample_mask(height: usize, width: usize, cfg: &HideConfig, key: RngKey) -> Result<HideMask> {
    check_probability("p_hide", cfg.p_hide)?;
    check_grid(height, width, cfg.patch_size, cfg.allow_partial_edge)?;
    let rows = height.div_ceil(cfg.patch_size);
    let cols = width.div_ceil(cfg.patch_size);
    let mut stream = key.stream();
    let cells = (0..rows * cols).map(|_| stream.bernoulli(cfg.p_hide)).collect();
    Ok(HideMask {
        height,
        width,
        patch_size: cfg.patch_size,
        rows,
        cols,
        cells,
    })
}

fn check_fill(fill: &[f32], channels: usize) -> Result<()> {
    if fill.len() != channels {
        return Err(Error::ChannelMismatch {
            expected: channels,
            got: fill.len(),
        });
    }
    if let Some(i) = fill.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

fn apply_mask_with(img: &Tensor3, mask: &HideMask, fill: &[f32]) -> Result<Tensor3> {
    if mask.height != img.height() || mask.width != img.width() {
        return Err(Error::shape(format!(
            "mask is for {}x{}, image is {}x{}",
            mask.height,
            mask.width,
            img.height(),
            img.width()
        )));
    }
    check_fill(fill, img.channels())?;
    let mut out = img.clone();
    let s = mask.patch_size;
    for row in 0..mask.rows {
        for col in 0..mask.cols {
            if !mask.cell(row, col) {
                continue;
            }
            for y in row * s..((row + 1) * s).min(mask.height) {
                for x in col * s..((col + 1) * s).min(mask.width) {
                    out.pixel_mut(y, x).copy_from_slice(fill);
                }
            }
        }
    }
    Ok(out)
}

/// Overwrite hidden cells with `cfg.fill`. The input is left untouched.
pub fn apply_hide(img: &Tensor3, mask: &HideMask, cfg: &HideConfig) -> Result<Tensor3> {
    if mask.patch_size != cfg.patch_size {
        return Err(Error::shape(format!(
            "mask patch size {} does not match config patch size {}",
            mask.patch_size, cfg.patch_size
        )));
    }
    apply_mask_with(img, mask, &cfg.fill)
}

pub fn hide_patches(img: &Tensor3, cfg: &HideConfig, key: RngKey) -> Result<Tensor3> {
    check_fill(&cfg.fill, img.channels())?;
    let mask = sample_mask(img.height(), img.width(), cfg, key)?;
    apply_hide(img, &mask, cfg)
}

/// One entry of a [`MixedHidePolicy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchChoice {
    Size(usize),
    NoHide,
}

impl fmt::Display for PatchChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatchChoice::Size(s) => write!(f, "{s}"),
            PatchChoice::NoHide => f.write_str("none"),
        }
    }
}

/// Uniform choice among patch sizes, optionally including "no hiding".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedHidePolicy {
    choices: Vec<PatchChoice>,
    pub allow_partial_edge: bool,
}

impl MixedHidePolicy {
    pub fn new(choices: Vec<PatchChoice>, allow_partial_edge: bool) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::config("mixed policy needs at least one choice"));
        }
        if choices.contains(&PatchChoice::Size(0)) {
            return Err(Error::config("patch size must be positive"));
        }
        Ok(Self {
            choices,
            allow_partial_edge,
        })
    }

    /// `{16, 32, 44, 56, none}` for 224-pixel images. 44 does not divide 224,
    /// so partial edge cells are enabled.
    pub fn default_224() -> Self {
        Self {
            choices: vec![
                PatchChoice::Size(16),
                PatchChoice::Size(32),
                PatchChoice::Size(44),
                PatchChoice::Size(56),
                PatchChoice::NoHide,
            ],
            allow_partial_edge: true,
        }
    }

    pub fn choices(&self) -> &[PatchChoice] {
        &self.choices
    }

    /// Check every size against an image before any sampling happens.
    pub fn validate_for(&self, height: usize, width: usize) -> Result<()> {
        for choice in &self.choices {
            if let PatchChoice::Size(s) = *choice {
                check_grid(height, width, s, self.allow_partial_edge)?;
            }
        }
        Ok(())
    }

    /// The draw used by [`hide_mixed`]: first value of `key`'s stream.
    pub fn pick(&self, key: RngKey) -> PatchChoice {
        let mut stream = key.stream();
        self.choices[stream.below(self.choices.len() as u64) as usize]
    }
}

/// Parses comma-separated sizes, `none` for no hiding, e.g. `"16,32,44,56,none"`.
/// Partial edges are off; set the field afterwards if needed.
impl FromStr for MixedHidePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let choices = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                if tok.eq_ignore_ascii_case("none") {
                    Ok(PatchChoice::NoHide)
                } else {
                    tok.parse::<usize>()
                        .map(PatchChoice::Size)
                        .map_err(|_| Error::Parse(format!("bad patch size {tok:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        MixedHidePolicy::new(choices, false)
    }
}

/// Sub-stream tag used for the mask after the size draw.
pub const MIXED_MASK_TAG: u64 = 1;

/// Draw a patch size from `policy`, then hide with that size using
/// `key.substream(MIXED_MASK_TAG)` for the mask.
pub fn hide_mixed(
    img: &Tensor3,
    policy: &MixedHidePolicy,
    p_hide: f64,
    fill: &[f32],
    key: RngKey,
) -> Result<Tensor3> {
    check_probability("p_hide", p_hide)?;
    check_fill(fill, img.channels())?;
    policy.validate_for(img.height(), img.width())?;
    match policy.pick(key) {
        PatchChoice::NoHide => Ok(img.clone()),
        PatchChoice::Size(s) => {
            let cfg = HideConfig {
                patch_size: s,
                p_hide,
                fill: fill.to_vec(),
                allow_partial_edge: policy.allow_partial_edge,
            };
            hide_patches(img, &cfg, key.substream(MIXED_MASK_TAG))
        }
    }
}

/// Patch sizes `N = L / k` for `k` in `2..=8` that are whole numbers,
/// largest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchSizePolicy {
    pub image_side: usize,
}

impl PatchSizePolicy {
    pub const RATIO_DENOMINATORS: std::ops::RangeInclusive<usize> = 2..=8;

    pub fn admissible_sizes(&self) -> Vec<usize> {
        Self::RATIO_DENOMINATORS
            .filter(|k| self.image_side % k == 0)
            .map(|k| self.image_side / k)
            .collect()
    }
}

/// Settings for hiding inside a feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureHideConfig {
    pub patch_size: usize,
    pub p_hide: f64,
    /// Written to every channel of a hidden cell.
    pub fill: f32,
    pub allow_partial_edge: bool,
}

impl FeatureHideConfig {
    pub fn new(patch_size: usize, p_hide: f64) -> Self {
        Self {
            patch_size,
            p_hide,
            fill: 0.0,
            allow_partial_edge: false,
        }
    }
}

/// Feature-map hiding: one mask on the `H × W` grid, applied to all channels.
pub fn hide_feature_map(fm: &Tensor3, cfg: &FeatureHideConfig, key: RngKey) -> Result<Tensor3> {
    if !cfg.fill.is_finite() {
        return Err(Error::NonFinite(0));
    }
    let mask_cfg = HideConfig {
        patch_size: cfg.patch_size,
        p_hide: cfg.p_hide,
        fill: vec![cfg.fill; fm.channels()],
        allow_partial_edge: cfg.allow_partial_edge,
    };
    let mask = sample_mask(fm.height(), fm.width(), &mask_cfg, key)?;
    apply_hide(fm, &mask, &mask_cfg)
}

/// Random Erasing settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EraseConfig {
    /// Range of the erased area as a fraction of the image, within `(0, 1]`.
    pub area_frac: (f64, f64),
    /// Range of the height/width ratio of the rectangle.
    pub aspect: (f64, f64),
    pub fill: Vec<f32>,
}

pub const ERASE_MAX_ATTEMPTS: usize = 100;

/// A rectangle chosen by [`sample_erase_region`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EraseRegion {
    pub bbox: BBox,
    /// Area fraction that was drawn before rounding to whole pixels.
    pub target_frac: f64,
}

impl EraseConfig {
    fn validate(&self) -> Result<()> {
        let (a0, a1) = self.area_frac;
        if !(a0 > 0.0 && a0 <= a1 && a1 <= 1.0) {
            return Err(Error::config(format!(
                "area fraction range ({a0}, {a1}) must satisfy 0 < lo <= hi <= 1"
            )));
        }
        let (r0, r1) = self.aspect;
        if !(r0 > 0.0 && r0 <= r1 && r1.is_finite()) {
            return Err(Error::config(format!(
                "aspect range ({r0}, {r1}) must satisfy 0 < lo <= hi"
            )));
        }
        Ok(())
    }
}

/// Rejection-sample one rectangle: area fraction and aspect are drawn
/// uniformly from their ranges, sides are rounded, and the rectangle is
/// placed uniformly. `None` after [`ERASE_MAX_ATTEMPTS`] failures.
pub fn sample_erase_region(
    height: usize,
    width: usize,
    cfg: &EraseConfig,
    key: RngKey,
) -> Result<Option<EraseRegion>> {
    cfg.validate()?;
    let mut stream = key.stream();
    let total = (height * width) as f64;
    for _ in 0..ERASE_MAX_ATTEMPTS {
        let frac = stream.uniform(cfg.area_frac.0, cfg.area_frac.1);
        let aspect = stream.uniform(cfg.aspect.0, cfg.aspect.1);
        let area = frac * total;
        let h = (area * aspect).sqrt().round() as usize;
        let w = (area / aspect).sqrt().round() as usize;
        if h == 0 || w == 0 || h > height || w > width {
            continue;
        }
        let y0 = stream.below((height - h + 1) as u64) as u32;
        let x0 = stream.below((width - w + 1) as u64) as u32;
        let bbox = BBox::new(x0, y0, x0 + w as u32, y0 + h as u32)?;
        return Ok(Some(EraseRegion {
            bbox,
            target_frac: frac,
        }));
    }
    Ok(None)
}

/// Random Erasing baseline: a single rectangle filled with `cfg.fill`, or the
/// unchanged image when no rectangle fits.
pub fn random_erase(img: &Tensor3, cfg: &EraseConfig, key: RngKey) -> Result<Tensor3> {
    check_fill(&cfg.fill, img.channels())?;
    let mut out = img.clone();
    if let Some(region) = sample_erase_region(img.height(), img.width(), cfg, key)? {
        let b = region.bbox;
        for y in b.y0() as usize..b.y1() as usize {
            for x in b.x0() as usize..b.x1() as usize {
                out.pixel_mut(y, x).copy_from_slice(&cfg.fill);
            }
        }
    }
    Ok(out)
}

/// Pixel-level dropout baseline: each pixel (all channels together) is
/// replaced by `fill` with probability `rate`. No rescaling.
pub fn pixel_dropout(img: &Tensor3, rate: f64, fill: &[f32], key: RngKey) -> Result<Tensor3> {
    check_probability("dropout rate", rate)?;
    check_fill(fill, img.channels())?;
    let mut out = img.clone();
    let mut stream = key.stream();
    let c = img.channels();
    for px in out.data_mut().chunks_exact_mut(c) {
        if stream.bernoulli(rate) {
            px.copy_from_slice(fill);
        }
    }
    Ok(out)
}
