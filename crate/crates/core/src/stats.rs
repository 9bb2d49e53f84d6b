//! Streaming per-channel dataset mean, the default fill value for hidden
//! regions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::ChannelsLast;

/// Running per-channel sums and pixel count. Sums are kept in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMean {
    channel_sums: Vec<f64>,
    pixel_count: u64,
}

impl DatasetMean {
    pub fn new(channels: usize) -> Self {
        Self {
            channel_sums: vec![0.0; channels],
            pixel_count: 0,
        }
    }

    pub fn channels(&self) -> usize {
        self.channel_sums.len()
    }

    pub fn pixel_count(&self) -> u64 {
        self.pixel_count
    }

    pub fn channel_sums(&self) -> &[f64] {
        &self.channel_sums
    }

    /// Add every spatial (or temporal) position of `t`.
    pub fn accumulate<T: ChannelsLast + ?Sized>(&mut self, t: &T) -> Result<()> {
        let c = t.channels();
        if c != self.channels() {
            return Err(Error::ChannelMismatch {
                expected: self.channels(),
                got: c,
            });
        }
        let mut local = vec![0.0f64; c];
        for px in t.as_slice().chunks_exact(c) {
            for (acc, &v) in local.iter_mut().zip(px) {
                *acc += f64::from(v);
            }
        }
        for (s, l) in self.channel_sums.iter_mut().zip(local) {
            *s += l;
        }
        self.pixel_count += t.positions() as u64;
        Ok(())
    }

    pub fn merge(&self, other: &DatasetMean) -> Result<DatasetMean> {
        if self.channels() != other.channels() {
            return Err(Error::ChannelMismatch {
                expected: self.channels(),
                got: other.channels(),
            });
        }
        Ok(DatasetMean {
            channel_sums: self
                .channel_sums
                .iter()
                .zip(&other.channel_sums)
                .map(|(a, b)| a + b)
                .collect(),
            pixel_count: self.pixel_count + other.pixel_count,
        })
    }

    /// Per-channel mean as `f32`.
    pub fn finalize(&self) -> Result<Vec<f32>> {
        if self.pixel_count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let n = self.pixel_count as f64;
        Ok(self.channel_sums.iter().map(|s| (s / n) as f32).collect())
    }

    pub fn to_file(&self) -> Result<MeanFile> {
        Ok(MeanFile {
            channels: self.channels(),
            pixel_count: self.pixel_count,
            mean: self.finalize()?,
        })
    }
}

/// On-disk form: `{"channels": C, "pixel_count": N, "mean": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFile {
    pub channels: usize,
    pub pixel_count: u64,
    pub mean: Vec<f32>,
}

impl MeanFile {
    pub fn parse(text: &str) -> Result<MeanFile> {
        let file: MeanFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("mean file: {e}")))?;
        if file.channels == 0 || file.mean.len() != file.channels {
            return Err(Error::Parse(format!(
                "mean file: {} channels declared, {} values given",
                file.channels,
                file.mean.len()
            )));
        }
        if file.pixel_count == 0 {
            return Err(Error::Parse("mean file: pixel_count is zero".into()));
        }
        if let Some(i) = file.mean.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mean file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngKey;
    use crate::tensor::{Tensor1, Tensor3};
    use proptest::prelude::*;

    fn random_images(n: usize, seed: u64) -> Vec<Tensor3> {
        let mut s = RngKey::new(seed, 0).stream();
        (0..n)
            .map(|_| {
                let h = 1 + s.below(8) as usize;
                let w = 1 + s.below(8) as usize;
                let data = (0..h * w * 3).map(|_| s.uniform(0.0, 255.0) as f32).collect();
                Tensor3::new(h, w, 3, data).unwrap()
            })
            .collect()
    }

    /// Naive definition: one global sum over every pixel, divided once.
    fn naive_mean(images: &[Tensor3]) -> Vec<f64> {
        let mut sums = [0.0f64; 3];
        let mut n = 0u64;
        for img in images {
            for y in 0..img.height() {
                for x in 0..img.width() {
                    for c in 0..3 {
                        sums[c] += img.get(y, x, c) as f64;
                    }
                    n += 1;
                }
            }
        }
        sums.iter().map(|s| s / n as f64).collect()
    }

    fn mean_f64(m: &DatasetMean) -> Vec<f64> {
        m.channel_sums()
            .iter()
            .map(|s| s / m.pixel_count() as f64)
            .collect()
    }

    #[test]
    fn constant_image() {
        let mut m = DatasetMean::new(3);
        m.accumulate(&Tensor3::filled(2, 2, &[10.0, 20.0, 30.0]).unwrap())
            .unwrap();
        assert_eq!(m.finalize().unwrap(), vec![10.0, 20.0, 30.0]);
        assert_eq!(m.pixel_count(), 4);
    }

    #[test]
    fn two_images_average() {
        let mut m = DatasetMean::new(1);
        m.accumulate(&Tensor3::zeros(3, 3, 1).unwrap()).unwrap();
        m.accumulate(&Tensor3::filled(3, 3, &[2.0]).unwrap()).unwrap();
        assert_eq!(m.finalize().unwrap(), vec![1.0]);
    }

    #[test]
    fn streaming_matches_global_sum() {
        let images = random_images(100, 11);
        let mut m = DatasetMean::new(3);
        for img in &images {
            m.accumulate(img).unwrap();
        }
        for (a, b) in mean_f64(&m).iter().zip(naive_mean(&images)) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn split_and_merge_matches_single_pass() {
        let images = random_images(50, 12);
        let mut all = DatasetMean::new(3);
        let mut first = DatasetMean::new(3);
        let mut second = DatasetMean::new(3);
        for (i, img) in images.iter().enumerate() {
            all.accumulate(img).unwrap();
            if i < 30 { &mut first } else { &mut second }.accumulate(img).unwrap();
        }
        let merged = first.merge(&second).unwrap();
        assert_eq!(merged.pixel_count(), all.pixel_count());
        for (a, b) in mean_f64(&merged).iter().zip(mean_f64(&all)) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let mut m = DatasetMean::new(3);
        m.accumulate(&random_images(1, 3)[0]).unwrap();
        assert_eq!(m.merge(&DatasetMean::new(3)).unwrap(), m);
    }

    #[test]
    fn errors() {
        let mut m = DatasetMean::new(2);
        assert!(matches!(m.finalize(), Err(Error::EmptyAccumulator)));
        assert!(matches!(
            m.accumulate(&Tensor1::from_values(vec![1.0]).unwrap()),
            Err(Error::ChannelMismatch { expected: 2, got: 1 })
        ));
        assert!(m.merge(&DatasetMean::new(3)).is_err());
    }

    #[test]
    fn sequences_count_timesteps() {
        let mut m = DatasetMean::new(2);
        m.accumulate(&Tensor1::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap())
            .unwrap();
        assert_eq!(m.pixel_count(), 3);
        assert_eq!(m.finalize().unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn mean_file_json() {
        let mut m = DatasetMean::new(3);
        m.accumulate(&Tensor3::filled(1, 2, &[0.5, 0.25, 1.0]).unwrap())
            .unwrap();
        let text = m.to_file().unwrap().to_json();
        assert_eq!(text, r#"{"channels":3,"pixel_count":2,"mean":[0.5,0.25,1.0]}"#);
        assert_eq!(MeanFile::parse(&text).unwrap(), m.to_file().unwrap());
        assert!(MeanFile::parse(r#"{"channels":2,"pixel_count":2,"mean":[1.0]}"#).is_err());
        assert!(MeanFile::parse(r#"{"channels":1,"pixel_count":0,"mean":[1.0]}"#).is_err());
        assert!(MeanFile::parse("not json").is_err());
    }

    fn arb_acc() -> impl Strategy<Value = DatasetMean> {
        (proptest::collection::vec(-1e6f64..1e6, 2), 0u64..1000).prop_map(|(s, n)| DatasetMean {
            channel_sums: s,
            pixel_count: n,
        })
    }

    proptest! {
        #[test]
        fn merge_commutes_and_associates(a in arb_acc(), b in arb_acc(), c in arb_acc()) {
            prop_assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
            let left = a.merge(&b).unwrap().merge(&c).unwrap();
            let right = a.merge(&b.merge(&c).unwrap()).unwrap();
            prop_assert_eq!(left.pixel_count, right.pixel_count);
            for ch in 0..2 {
                let (x, y) = (left.channel_sums[ch], right.channel_sums[ch]);
                let scale = a.channel_sums[ch].abs() + b.channel_sums[ch].abs() + c.channel_sums[ch].abs();
                prop_assert!((x - y).abs() <= 1e-12 * scale.max(1.0));
            }
        }
    }
}
