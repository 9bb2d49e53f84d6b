//! Class activation maps and CAM-based localization.
//!
//! A CAM for class `c` is the classifier-weighted sum of the last conv
//! layer's feature maps, `Σ_i W(c, i) · F_i`. Localization thresholds it at
//! a fraction of its maximum, then either boxes the largest connected
//! foreground component (images) or reports every foreground run
//! (sequences).

use crate::error::{Error, Result};
use crate::geometry::{BBox, Interval};
use crate::tensor::{Tensor1, Tensor3};

/// Classifier weights, one row of length `M` per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights {
    classes: usize,
    maps: usize,
    data: Vec<f32>,
}

impl ClassWeights {
    pub fn new(classes: usize, maps: usize, data: Vec<f32>) -> Result<Self> {
        if classes == 0 || maps == 0 || data.len() != classes * maps {
            return Err(Error::shape(format!(
                "{classes}x{maps} weights need {} values, got {}",
                classes * maps,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { classes, maps, data })
    }

    /// Rows are classes (the rank-2 HAST layout `N × M`).
    pub fn from_tensor(t: &Tensor1) -> Self {
        Self {
            classes: t.len(),
            maps: t.channels(),
            data: t.data().to_vec(),
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn maps(&self) -> usize {
        self.maps
    }

    pub fn row(&self, class: usize) -> Result<&[f32]> {
        if class >= self.classes {
            return Err(Error::ClassOutOfRange {
                class,
                classes: self.classes,
            });
        }
        Ok(&self.data[class * self.maps..(class + 1) * self.maps])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CamInputs {
    pub feature_maps: Tensor3,
    pub class_weights: ClassWeights,
}

fn weighted_sum(features: &[f32], maps: usize, row: &[f32]) -> Vec<f32> {
    features
        .chunks_exact(maps)
        .map(|f| f.iter().zip(row).map(|(a, w)| a * w).sum())
        .collect()
}

/// `H × W × 1` activation map for `class`.
pub fn compute_cam(inputs: &CamInputs, class: usize) -> Result<Tensor3> {
    let fm = &inputs.feature_maps;
    let weights = &inputs.class_weights;
    if fm.channels() != weights.maps() {
        return Err(Error::ChannelMismatch {
            expected: weights.maps(),
            got: fm.channels(),
        });
    }
    let row = weights.row(class)?;
    let data = weighted_sum(fm.data(), weights.maps(), row);
    Tensor3::new(fm.height(), fm.width(), 1, data)
}

/// 1D analogue over a `T × M` feature sequence.
pub fn compute_cam_1d(features: &Tensor1, weights: &ClassWeights, class: usize) -> Result<Tensor1> {
    if features.channels() != weights.maps() {
        return Err(Error::ChannelMismatch {
            expected: weights.maps(),
            got: features.channels(),
        });
    }
    let row = weights.row(class)?;
    Tensor1::from_values(weighted_sum(features.data(), weights.maps(), row))
}

/// Nearest-neighbour resize: output `(y, x)` reads input
/// `(floor(y * H / out_h), floor(x * W / out_w))`.
pub fn upscale_nearest(cam: &Tensor3, out_h: usize, out_w: usize) -> Result<Tensor3> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::shape("output size must be positive"));
    }
    let (h, w, c) = (cam.height(), cam.width(), cam.channels());
    let mut data = Vec::with_capacity(out_h * out_w * c);
    for y in 0..out_h {
        let sy = y * h / out_h;
        for x in 0..out_w {
            let sx = x * w / out_w;
            data.extend_from_slice(cam.pixel(sy, sx));
        }
    }
    Tensor3::new(out_h, out_w, c, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    pub fn from_neighbours(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::config(format!("connectivity must be 4 or 8, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeConfig {
    /// Foreground is `cam >= threshold_frac * max(cam)`; in `(0, 1]`.
    pub threshold_frac: f32,
    pub connectivity: Connectivity,
}

impl LocalizeConfig {
    pub fn new(threshold_frac: f32) -> Result<Self> {
        let cfg = Self {
            threshold_frac,
            connectivity: Connectivity::Eight,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        check_tau(self.threshold_frac)
    }
}

fn check_tau(tau: f32) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::config(format!("threshold fraction must be in (0, 1], got {tau}")));
    }
    Ok(())
}

/// Row-major foreground mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMap {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMap {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::shape(format!(
                "{height}x{width} map needs {} bits, got {}",
                height * width,
                bits.len()
            )));
        }
        Ok(Self { height, width, bits })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

fn positive_max(values: &[f32]) -> Result<f32> {
    let max = values.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    if max > 0.0 {
        Ok(max)
    } else {
        Err(Error::DegenerateCam)
    }
}

/// Foreground where `cam >= tau * max(cam)`. The CAM must be single-channel
/// with a positive maximum.
pub fn threshold_cam(cam: &Tensor3, cfg: &LocalizeConfig) -> Result<BinaryMap> {
    cfg.validate()?;
    if cam.channels() != 1 {
        return Err(Error::shape(format!("CAM must have 1 channel, got {}", cam.channels())));
    }
    let max = positive_max(cam.data())?;
    let cut = cfg.threshold_frac * max;
    BinaryMap::new(
        cam.height(),
        cam.width(),
        cam.data().iter().map(|&v| v >= cut).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// 1-based label, in raster order of each component's first pixel.
    pub label: u32,
    pub pixel_count: usize,
    /// Row-major index of the component's first pixel.
    pub first_pixel: usize,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    height: usize,
    width: usize,
    /// 0 for background.
    labels: Vec<u32>,
    components: Vec<Component>,
}

impl Components {
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, y: usize, x: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Most pixels wins; ties go to the component seen first in raster order.
    pub fn largest(&self) -> Option<&Component> {
        self.components.iter().fold(None, |best: Option<&Component>, c| match best {
            Some(b) if b.pixel_count >= c.pixel_count => Some(b),
            _ => Some(c),
        })
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Two-pass union-find labeling.
pub fn connected_components(map: &BinaryMap, connectivity: Connectivity) -> Components {
    let (h, w) = (map.height, map.width);
    let mut provisional = vec![0u32; h * w];
    let mut parent: Vec<u32> = vec![0];

    let prev_neighbours: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, -1), (-1, 0), (-1, 1), (0, -1)],
    };

    for y in 0..h {
        for x in 0..w {
            if !map.get(y, x) {
                continue;
            }
            let mut label = 0u32;
            for &(dy, dx) in prev_neighbours {
                let (ny, nx) = (y as isize + dy, x as isize + dx);
                if ny < 0 || nx < 0 || nx >= w as isize {
                    continue;
                }
                let n = provisional[ny as usize * w + nx as usize];
                if n == 0 {
                    continue;
                }
                if label == 0 {
                    label = n;
                } else {
                    union(&mut parent, label, n);
                }
            }
            if label == 0 {
                label = parent.len() as u32;
                parent.push(label);
            }
            provisional[y * w + x] = label;
        }
    }

    let mut final_label = vec![0u32; parent.len()];
    let mut labels = vec![0u32; h * w];
    let mut components: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if provisional[idx] == 0 {
                continue;
            }
            let root = find(&mut parent, provisional[idx]) as usize;
            if final_label[root] == 0 {
                let label = components.len() as u32 + 1;
                final_label[root] = label;
                components.push(Component {
                    label,
                    pixel_count: 0,
                    first_pixel: idx,
                    bbox: BBox::new(x as u32, y as u32, x as u32 + 1, y as u32 + 1)
                        .expect("unit box"),
                });
            }
            let label = final_label[root];
            labels[idx] = label;
            let comp = &mut components[label as usize - 1];
            comp.pixel_count += 1;
            let unit = BBox::new(x as u32, y as u32, x as u32 + 1, y as u32 + 1).expect("unit box");
            comp.bbox = comp.bbox.union(&unit);
        }
    }

    Components {
        height: h,
        width: w,
        labels,
        components,
    }
}

/// Tight box around the largest foreground component of the thresholded CAM.
pub fn largest_component_bbox(cam: &Tensor3, cfg: &LocalizeConfig) -> Result<BBox> {
    let fg = threshold_cam(cam, cfg)?;
    let comps = connected_components(&fg, cfg.connectivity);
    comps.largest().map(|c| c.bbox).ok_or(Error::EmptyForeground)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub interval: Interval,
    /// Mean CAM value over the interval.
    pub score: f64,
}

/// Every maximal run with `cam >= tau * max(cam)`, in order of start.
pub fn localize_segments(cam: &Tensor1, tau: f32) -> Result<Vec<Segment>> {
    check_tau(tau)?;
    if cam.channels() != 1 {
        return Err(Error::shape(format!("CAM must have 1 channel, got {}", cam.channels())));
    }
    let values = cam.data();
    let cut = tau * positive_max(values)?;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for t in 0..=values.len() {
        let on = t < values.len() && values[t] >= cut;
        match (on, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                let sum: f64 = values[s..t].iter().map(|&v| f64::from(v)).sum();
                out.push(Segment {
                    interval: Interval::new(s as u32, t as u32)?,
                    score: sum / (t - s) as f64,
                });
                start = None;
            }
            _ => {}
        }
    }
    Ok(out)
}
