//! Half-open integer boxes and intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel box covering `x0 <= x < x1`, `y0 <= y < y1`. Never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 4]", into = "[u32; 4]")]
pub struct BBox {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
}

impl BBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self> {
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::shape(format!(
                "empty box [{x0}, {y0}, {x1}, {y1}]"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn x0(&self) -> u32 {
        self.x0
    }

    pub fn y0(&self) -> u32 {
        self.y0
    }

    pub fn x1(&self) -> u32 {
        self.x1
    }

    pub fn y1(&self) -> u32 {
        self.y1
    }

    pub fn width(&self) -> u64 {
        u64::from(self.x1 - self.x0)
    }

    pub fn height(&self) -> u64 {
        u64::from(self.y1 - self.y0)
    }

    pub fn area(&self) -> u64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> u64 {
        let w = self.x1.min(other.x1).saturating_sub(self.x0.max(other.x0));
        let h = self.y1.min(other.y1).saturating_sub(self.y0.max(other.y0));
        u64::from(w) * u64::from(h)
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        inter as f64 / union as f64
    }

    pub fn to_array(self) -> [u32; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

impl TryFrom<[u32; 4]> for BBox {
    type Error = Error;

    fn try_from(v: [u32; 4]) -> Result<Self> {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [u32; 4] {
    fn from(b: BBox) -> Self {
        b.to_array()
    }
}

/// Temporal segment covering `t0 <= t < t1`. Never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct Interval {
    t0: u32,
    t1: u32,
}

impl Interval {
    pub fn new(t0: u32, t1: u32) -> Result<Self> {
        if t0 >= t1 {
            return Err(Error::shape(format!("empty interval [{t0}, {t1}]")));
        }
        Ok(Self { t0, t1 })
    }

    pub fn t0(&self) -> u32 {
        self.t0
    }

    pub fn t1(&self) -> u32 {
        self.t1
    }

    pub fn len(&self) -> u64 {
        u64::from(self.t1 - self.t0)
    }

    /// Always false; empty intervals cannot be constructed.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn intersection_len(&self, other: &Interval) -> u64 {
        u64::from(self.t1.min(other.t1).saturating_sub(self.t0.max(other.t0)))
    }

    pub fn iou(&self, other: &Interval) -> f64 {
        let inter = self.intersection_len(other);
        let union = self.len() + other.len() - inter;
        inter as f64 / union as f64
    }
}

impl TryFrom<[u32; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [u32; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [u32; 2] {
    fn from(i: Interval) -> Self {
        [i.t0, i.t1]
    }
}

pub fn iou_box(a: &BBox, b: &BBox) -> f64 {
    a.iou(b)
}

pub fn iou_interval(a: &Interval, b: &Interval) -> f64 {
    a.iou(b)
}
