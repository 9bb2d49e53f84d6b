//! Dense `f32` tensors in channels-last layout.
//!
//! [`Tensor3`] carries images, feature maps and CAMs (`H × W × C`), and
//! [`Tensor1`] carries feature sequences and 1D CAMs (`T × C`). Both reject
//! zero dimensions, length mismatches and non-finite values on construction.

use crate::error::{Error, Result};

fn check_values(data: &[f32]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

fn checked_len(dims: &[usize]) -> Result<usize> {
    let mut len = 1usize;
    for &d in dims {
        if d == 0 {
            return Err(Error::shape(format!("zero dimension in {dims:?}")));
        }
        len = len
            .checked_mul(d)
            .ok_or_else(|| Error::shape(format!("dimensions {dims:?} overflow")))?;
    }
    Ok(len)
}

/// Access to the channels-last payload shared by both tensor kinds.
pub trait ChannelsLast {
    fn channels(&self) -> usize;
    fn as_slice(&self) -> &[f32];

    /// Number of spatial (or temporal) positions.
    fn positions(&self) -> usize {
        self.as_slice().len() / self.channels()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Tensor3 {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        let len = checked_len(&[height, width, channels])?;
        if data.len() != len {
            return Err(Error::shape(format!(
                "{height}x{width}x{channels} needs {len} values, got {}",
                data.len()
            )));
        }
        check_values(&data)?;
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Tensor with every pixel set to `pixel` (one value per channel).
    pub fn filled(height: usize, width: usize, pixel: &[f32]) -> Result<Self> {
        let channels = pixel.len();
        let len = checked_len(&[height, width, channels])?;
        check_values(pixel)?;
        let data = pixel.iter().copied().cycle().take(len).collect();
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::filled(height, width, &vec![0.0; channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[self.index(y, x, c)]
    }

    /// All channel values of pixel `(y, x)`.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f32] {
        let start = self.index(y, x, 0);
        &self.data[start..start + self.channels]
    }

    /// Mutable access for in-crate transforms that build a fresh output.
    /// Callers must only write finite values.
    pub(crate) fn pixel_mut(&mut self, y: usize, x: usize) -> &mut [f32] {
        let start = self.index(y, x, 0);
        let c = self.channels;
        &mut self.data[start..start + c]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// Extract channel `c` as an `H × W × 1` tensor.
    pub fn channel(&self, c: usize) -> Result<Tensor3> {
        if c >= self.channels {
            return Err(Error::shape(format!(
                "channel {c} out of range for {} channels",
                self.channels
            )));
        }
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        Ok(Tensor3 {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
        })
    }

    pub fn same_shape(&self, other: &Tensor3) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }
}

impl ChannelsLast for Tensor3 {
    fn channels(&self) -> usize {
        self.channels
    }

    fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor1 {
    len: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Tensor1 {
    pub fn new(len: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        let n = checked_len(&[len, channels])?;
        if data.len() != n {
            return Err(Error::shape(format!(
                "{len}x{channels} needs {n} values, got {}",
                data.len()
            )));
        }
        check_values(&data)?;
        Ok(Self {
            len,
            channels,
            data,
        })
    }

    /// Single-channel sequence.
    pub fn from_values(values: Vec<f32>) -> Result<Self> {
        Self::new(values.len(), 1, values)
    }

    pub fn filled(len: usize, step: &[f32]) -> Result<Self> {
        let channels = step.len();
        let n = checked_len(&[len, channels])?;
        check_values(step)?;
        Ok(Self {
            len,
            channels,
            data: step.iter().copied().cycle().take(n).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; zero-length sequences cannot be constructed.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn step(&self, t: usize) -> &[f32] {
        &self.data[t * self.channels..(t + 1) * self.channels]
    }

    pub(crate) fn step_mut(&mut self, t: usize) -> &mut [f32] {
        let c = self.channels;
        &mut self.data[t * c..(t + 1) * c]
    }
}

impl ChannelsLast for Tensor1 {
    fn channels(&self) -> usize {
        self.channels
    }

    fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// Either tensor kind, as stored in a HAST file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    Image(Tensor3),
    Sequence(Tensor1),
}

impl AnyTensor {
    pub fn channels(&self) -> usize {
        match self {
            AnyTensor::Image(t) => t.channels(),
            AnyTensor::Sequence(t) => t.channels(),
        }
    }
}

impl From<Tensor3> for AnyTensor {
    fn from(t: Tensor3) -> Self {
        AnyTensor::Image(t)
    }
}

impl From<Tensor1> for AnyTensor {
    fn from(t: Tensor1) -> Self {
        AnyTensor::Sequence(t)
    }
}
