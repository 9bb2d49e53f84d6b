//! Deterministic random streams.
//!
//! Every random decision in the crate is drawn from a [`Stream`] opened from
//! an [`RngKey`]. The construction is fixed so that masks are reproducible
//! across machines and implementations:
//!
//! * `mix64(z)` is the SplitMix64 finalizer:
//!   `z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9; z = (z ^ z >> 27) * 0x94D049BB133111EB; z ^ z >> 31`.
//! * `stream_id = mix64(mix64(sample_index) ^ (epoch * 0x9E3779B97F4A7C15))`.
//! * A stream is xoshiro256** whose four state words are the first four
//!   SplitMix64 outputs (increment `0x9E3779B97F4A7C15`) starting from
//!   `global_seed ^ mix64(stream_id)`.
//! * [`Stream::next_f64`] is `(next_u64() >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * [`Stream::below`] uses rejection on the top of the 64-bit range.
//! * Sub-streams use `stream_id' = mix64(stream_id ^ mix64(tag + 0x632BE59BD9B4E019))`.
//!
//! All arithmetic is wrapping.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SUBSTREAM_SALT: u64 = 0x632B_E59B_D9B4_E019;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed material for one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngKey {
    pub global_seed: u64,
    pub stream_id: u64,
}

/// Key for sample `sample_index` in epoch `epoch`.
pub fn derive_stream(global_seed: u64, sample_index: u64, epoch: u64) -> RngKey {
    RngKey {
        global_seed,
        stream_id: mix64(mix64(sample_index) ^ epoch.wrapping_mul(GOLDEN)),
    }
}

impl RngKey {
    pub fn new(global_seed: u64, stream_id: u64) -> Self {
        Self {
            global_seed,
            stream_id,
        }
    }

    /// Independent child key, labelled by `tag`.
    pub fn substream(&self, tag: u64) -> RngKey {
        RngKey {
            global_seed: self.global_seed,
            stream_id: mix64(self.stream_id ^ mix64(tag.wrapping_add(SUBSTREAM_SALT))),
        }
    }

    pub fn stream(&self) -> Stream {
        Stream::from_key(*self)
    }
}

/// xoshiro256** generator.
#[derive(Debug, Clone)]
pub struct Stream {
    s: [u64; 4],
}

impl Stream {
    pub fn from_key(key: RngKey) -> Self {
        let mut sm = key.global_seed ^ mix64(key.stream_id);
        let mut next = || {
            sm = sm.wrapping_add(GOLDEN);
            mix64(sm)
        };
        let s = [next(), next(), next(), next()];
        Self { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// True with probability `p`; `p <= 0` never fires, `p >= 1` always does.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
