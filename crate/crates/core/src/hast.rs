//! HAST, the little-endian binary tensor file.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HAST"
//! 4       1     version (1)
//! 5       1     dtype (1 = f32)
//! 6       1     rank (2 = T,C sequence; 3 = H,W,C image)
//! 7       1     reserved (0)
//! 8       4*r   dims, u32 little-endian
//! 8+4r    4*n   payload, f32 little-endian, n = product(dims)
//! ```
//!
//! Decoding is strict: the payload must be exactly `n` values, every value
//! must be finite and every dimension positive.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{AnyTensor, Tensor1, Tensor3};

pub const MAGIC: &[u8; 4] = b"HAST";
pub const VERSION: u8 = 1;
pub const DTYPE_F32: u8 = 1;

const HEADER_LEN: usize = 8;

pub fn decode(bytes: &[u8]) -> Result<AnyTensor> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        return Err(Error::TruncatedHeader);
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let (version, dtype, rank, reserved) = (bytes[4], bytes[5], bytes[6], bytes[7]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    if dtype != DTYPE_F32 {
        return Err(Error::UnsupportedDtype(dtype));
    }
    if rank != 2 && rank != 3 {
        return Err(Error::UnsupportedRank(rank));
    }
    if reserved != 0 {
        return Err(Error::ReservedByte(reserved));
    }

    let rank = rank as usize;
    let dims_end = HEADER_LEN + 4 * rank;
    if bytes.len() < dims_end {
        return Err(Error::TruncatedHeader);
    }
    let dims: Vec<usize> = bytes[HEADER_LEN..dims_end]
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
        .collect();

    let mut count = 1usize;
    for &d in &dims {
        if d == 0 {
            return Err(Error::shape(format!("zero dimension in {dims:?}")));
        }
        count = count
            .checked_mul(d)
            .ok_or_else(|| Error::shape(format!("dimensions {dims:?} overflow")))?;
    }
    let payload = &bytes[dims_end..];
    let expected = count.checked_mul(4).ok_or(Error::TruncatedData)?;
    if payload.len() < expected {
        return Err(Error::TruncatedData);
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }

    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();

    Ok(match rank {
        3 => AnyTensor::Image(Tensor3::new(dims[0], dims[1], dims[2], data)?),
        _ => AnyTensor::Sequence(Tensor1::new(dims[0], dims[1], data)?),
    })
}

fn header(rank: u8, dims: &[usize], payload_len: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * dims.len() + 4 * payload_len);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, DTYPE_F32, rank, 0]);
    for &d in dims {
        let d = u32::try_from(d)
            .map_err(|_| Error::shape(format!("dimension {d} does not fit in u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    Ok(out)
}

pub fn encode(tensor: &AnyTensor) -> Result<Vec<u8>> {
    let (mut out, data) = match tensor {
        AnyTensor::Image(t) => (
            header(3, &[t.height(), t.width(), t.channels()], t.data().len())?,
            t.data(),
        ),
        AnyTensor::Sequence(t) => (header(2, &[t.len(), t.channels()], t.data().len())?, t.data()),
    };
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<AnyTensor> {
    decode(&fs::read(path)?)
}

pub fn write_tensor(tensor: &AnyTensor, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(tensor)?)?;
    Ok(())
}

/// True when `bytes` starts with the HAST magic.
pub fn sniff(bytes: &[u8]) -> bool {
    bytes.len() >= 4 && &bytes[..4] == MAGIC
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn image(values: Vec<f32>, h: usize, w: usize, c: usize) -> AnyTensor {
        Tensor3::new(h, w, c, values).unwrap().into()
    }

    #[test]
    fn round_trip_small_image() {
        let t = image(vec![1.0, 2.0, 3.0, 4.0], 2, 2, 1);
        let bytes = encode(&t).unwrap();
        assert_eq!(bytes.len(), 8 + 12 + 16);
        assert_eq!(&bytes[..8], b"HAST\x01\x01\x03\x00");
        assert_eq!(decode(&bytes).unwrap(), t);
    }

    #[test]
    fn rank_selects_tensor_kind() {
        let seq: AnyTensor = Tensor1::new(3, 2, vec![0.0; 6]).unwrap().into();
        let bytes = encode(&seq).unwrap();
        assert_eq!(bytes[6], 2);
        assert_eq!(&bytes[8..16], &[3, 0, 0, 0, 2, 0, 0, 0]);
        assert!(matches!(decode(&bytes).unwrap(), AnyTensor::Sequence(_)));
    }

    #[test]
    fn short_payload_is_truncated_data() {
        let mut bytes = encode(&image(vec![1.0, 2.0, 3.0, 4.0], 2, 2, 1)).unwrap();
        bytes.truncate(bytes.len() - 4);
        let err = decode(&bytes).unwrap_err();
        assert!(matches!(err, Error::TruncatedData));
        assert_eq!(err.to_string(), "truncated data");
    }

    #[test]
    fn rejects_malformed_headers() {
        let good = encode(&image(vec![0.5; 4], 2, 2, 1)).unwrap();

        let mut b = good.clone();
        b[0] = b'X';
        assert!(matches!(decode(&b), Err(Error::BadMagic)));

        let mut b = good.clone();
        b[4] = 2;
        assert!(matches!(decode(&b), Err(Error::UnsupportedVersion(2))));

        let mut b = good.clone();
        b[5] = 0;
        assert!(matches!(decode(&b), Err(Error::UnsupportedDtype(0))));

        let mut b = good.clone();
        b[6] = 4;
        assert!(matches!(decode(&b), Err(Error::UnsupportedRank(4))));

        let mut b = good.clone();
        b[7] = 9;
        assert!(matches!(decode(&b), Err(Error::ReservedByte(9))));

        let mut b = good.clone();
        b.push(0);
        assert!(matches!(decode(&b), Err(Error::TrailingBytes(1))));

        let mut b = good.clone();
        let nan = f32::NAN.to_le_bytes();
        let n = b.len();
        b[n - 4..].copy_from_slice(&nan);
        assert!(matches!(decode(&b), Err(Error::NonFinite(3))));

        assert!(matches!(decode(b"HAS"), Err(Error::TruncatedHeader)));
        assert!(matches!(decode(&good[..10]), Err(Error::TruncatedHeader)));
    }

    #[test]
    fn huge_dims_do_not_allocate() {
        let mut b = b"HAST\x01\x01\x03\x00".to_vec();
        for _ in 0..3 {
            b.extend_from_slice(&u32::MAX.to_le_bytes());
        }
        assert!(decode(&b).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            h in 1usize..6, w in 1usize..6, c in 1usize..4,
            seed in proptest::collection::vec(-1e30f32..1e30f32, 100),
        ) {
            let n = h * w * c;
            let values: Vec<f32> = seed.iter().cycle().take(n).copied().collect();
            let t = image(values, h, w, c);
            let bytes = encode(&t).unwrap();
            let back = decode(&bytes).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(encode(&back).unwrap(), bytes);
        }
    }
}
