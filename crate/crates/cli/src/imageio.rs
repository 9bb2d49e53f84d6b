//! Image and tensor files. PNGs become `[0, 1]` floats (`u8 / 255`); on the
//! way out values are scaled by 255, clamped, and rounded half up.

use std::fs;
use std::path::Path;

use has_core::hast;
use has_core::{AnyTensor, Tensor1, Tensor3};
use image::{ColorType, DynamicImage, ImageFormat};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Png,
    Hast,
}

pub fn kind_of(path: &Path) -> Option<FileKind> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "png" => Some(FileKind::Png),
        "hast" => Some(FileKind::Hast),
        _ => None,
    }
}

/// Output kind from the extension; checked before any work is done.
pub fn output_kind(path: &Path, flag: &str) -> Result<FileKind, Failure> {
    kind_of(path).ok_or_else(|| Failure::Usage(format!("{flag}: {} must end in .png or .hast", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

pub fn read_any(path: &Path) -> Result<AnyTensor, Failure> {
    let bytes = read_bytes(path)?;
    if hast::sniff(&bytes) || kind_of(path) == Some(FileKind::Hast) {
        return hast::decode(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())));
    }
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Png)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(AnyTensor::Image(from_png(&img)?))
}

pub fn read_image(path: &Path) -> Result<Tensor3, Failure> {
    match read_any(path)? {
        AnyTensor::Image(t) => Ok(t),
        AnyTensor::Sequence(_) => Err(Failure::Data(format!("{}: expected an image, found a sequence", path.display()))),
    }
}

pub fn read_sequence(path: &Path) -> Result<Tensor1, Failure> {
    match read_any(path)? {
        AnyTensor::Sequence(t) => Ok(t),
        AnyTensor::Image(_) => Err(Failure::Data(format!("{}: expected a rank-2 tensor, found an image", path.display()))),
    }
}

fn from_png(img: &DynamicImage) -> Result<Tensor3, Failure> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, raw): (usize, Vec<u8>) = match img.color() {
        ColorType::L8 | ColorType::L16 => (1, img.to_luma8().into_raw()),
        ColorType::La8 | ColorType::La16 => (2, img.to_luma_alpha8().into_raw()),
        ColorType::Rgba8 | ColorType::Rgba16 | ColorType::Rgba32F => (4, img.to_rgba8().into_raw()),
        _ => (3, img.to_rgb8().into_raw()),
    };
    let data = raw.into_iter().map(|v| f32::from(v) / 255.0).collect();
    Tensor3::new(h, w, channels, data).map_err(|e| Failure::Data(e.to_string()))
}

/// `clamp(v * 255)` rounded half up.
pub fn quantize(v: f32) -> u8 {
    let scaled = (f64::from(v) * 255.0).clamp(0.0, 255.0);
    (scaled + 0.5).floor() as u8
}

pub fn encode_png(t: &Tensor3) -> Result<Vec<u8>, Failure> {
    let color = match t.channels() {
        1 => ColorType::L8,
        2 => ColorType::La8,
        3 => ColorType::Rgb8,
        4 => ColorType::Rgba8,
        c => return Err(Failure::Usage(format!("cannot write {c}-channel image as PNG; use .hast"))),
    };
    let raw: Vec<u8> = t.data().iter().map(|&v| quantize(v)).collect();
    let mut out = std::io::Cursor::new(Vec::new());
    image::write_buffer_with_format(&mut out, &raw, t.width() as u32, t.height() as u32, color, ImageFormat::Png)
        .map_err(|e| Failure::Data(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn encode(t: &AnyTensor, kind: FileKind) -> Result<Vec<u8>, Failure> {
    match (kind, t) {
        (FileKind::Png, AnyTensor::Image(img)) => encode_png(img),
        (FileKind::Png, AnyTensor::Sequence(_)) => Err(Failure::Usage("sequences can only be written as .hast".into())),
        (FileKind::Hast, _) => hast::encode(t).map_err(|e| Failure::Data(e.to_string())),
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}
