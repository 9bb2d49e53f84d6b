//! Segment-level Hide-and-Seek for feature sequences.
//!
//! A video is first resampled to a fixed number of feature steps, then cut
//! into equal segments; each segment is replaced by the dataset-mean feature
//! with probability `p_hide`.

use crate::error::{Error, Result};
use crate::rng::RngKey;
use crate::tensor::Tensor1;

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalHideConfig {
    /// Steps per video after resampling.
    pub total: usize,
    /// Steps per hideable segment; must divide `total`.
    pub segment: usize,
    pub p_hide: f64,
    pub fill: Vec<f32>,
}

impl TemporalHideConfig {
    pub fn segments(&self) -> usize {
        self.total / self.segment
    }

    fn validate(&self, channels: usize) -> Result<()> {
        if self.total == 0 || self.segment == 0 {
            return Err(Error::config("total and segment lengths must be positive"));
        }
        if self.total % self.segment != 0 {
            return Err(Error::config(format!(
                "segment length {} does not divide total length {}",
                self.segment, self.total
            )));
        }
        if !(0.0..=1.0).contains(&self.p_hide) {
            return Err(Error::config(format!("p_hide must be in [0, 1], got {}", self.p_hide)));
        }
        if self.fill.len() != channels {
            return Err(Error::ChannelMismatch {
                expected: channels,
                got: self.fill.len(),
            });
        }
        if let Some(i) = self.fill.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }
}

/// Nearest-lower resampling: output step `i` copies source step
/// `floor(i * T / total)`.
pub fn resample_uniform(seq: &Tensor1, total: usize) -> Result<Tensor1> {
    if total == 0 {
        return Err(Error::config("resample length must be positive"));
    }
    let t = seq.len() as u128;
    let mut data = Vec::with_capacity(total * seq.channels());
    for i in 0..total {
        let src = (i as u128 * t / total as u128) as usize;
        data.extend_from_slice(seq.step(src));
    }
    Tensor1::new(total, seq.channels(), data)
}

/// Which segments `hide_segments` would hide for this key.
pub fn sample_segments(cfg: &TemporalHideConfig, key: RngKey) -> Vec<bool> {
    let mut stream = key.stream();
    (0..cfg.segments()).map(|_| stream.bernoulli(cfg.p_hide)).collect()
}

pub fn hide_segments(seq: &Tensor1, cfg: &TemporalHideConfig, key: RngKey) -> Result<Tensor1> {
    cfg.validate(seq.channels())?;
    if seq.len() != cfg.total {
        return Err(Error::shape(format!(
            "sequence has {} steps, config expects {}",
            seq.len(),
            cfg.total
        )));
    }
    let mut out = seq.clone();
    for (k, hidden) in sample_segments(cfg, key).into_iter().enumerate() {
        if hidden {
            for t in k * cfg.segment..(k + 1) * cfg.segment {
                out.step_mut(t).copy_from_slice(&cfg.fill);
            }
        }
    }
    Ok(out)
}
