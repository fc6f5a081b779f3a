//! Raster input (PNG, JPEG, TIFF at 8 or 16 bits) and 8-bit PNG output.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use super::color::ColorImage;
use super::plane::Plane;
use crate::error::{Error, Result};

enum Decoded {
    Gray(Plane),
    Color(ColorImage),
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<Plane> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_gray(&bytes)
}

pub fn load_color(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_color(&bytes)
}

/// Decodes an in-memory raster into a single plane. Colour inputs are reduced
/// with the BT.601 luminance weights.
pub fn decode_gray(bytes: &[u8]) -> Result<Plane> {
    match decode(bytes)? {
        Decoded::Gray(p) => Ok(p),
        Decoded::Color(c) => Ok(super::color::luminance(&c)),
    }
}

/// Decodes an in-memory raster into RGB planes. Grayscale inputs are rejected.
pub fn decode_color(bytes: &[u8]) -> Result<ColorImage> {
    match decode(bytes)? {
        Decoded::Color(c) => Ok(c),
        Decoded::Gray(_) => Err(Error::Format(
            "expected a colour image, found a single-channel raster".into(),
        )),
    }
}

fn decode(bytes: &[u8]) -> Result<Decoded> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Format(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Jpeg | ImageFormat::Tiff) => {}
        Some(other) => return Err(Error::Format(format!("unsupported format {other:?}"))),
        None => return Err(Error::Format("unrecognised image format".into())),
    }
    let img = reader.decode().map_err(|e| Error::Format(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::Format("empty image".into()));
    }
    const U8: f64 = 255.0;
    const U16: f64 = 65535.0;
    Ok(match img {
        DynamicImage::ImageLuma8(b) => Decoded::Gray(gray(w, h, b.as_raw(), 1, U8)),
        DynamicImage::ImageLumaA8(b) => Decoded::Gray(gray(w, h, b.as_raw(), 2, U8)),
        DynamicImage::ImageLuma16(b) => Decoded::Gray(gray(w, h, b.as_raw(), 1, U16)),
        DynamicImage::ImageLumaA16(b) => Decoded::Gray(gray(w, h, b.as_raw(), 2, U16)),
        DynamicImage::ImageRgb8(b) => Decoded::Color(color(w, h, b.as_raw(), 3, U8)),
        DynamicImage::ImageRgba8(b) => Decoded::Color(color(w, h, b.as_raw(), 4, U8)),
        DynamicImage::ImageRgb16(b) => Decoded::Color(color(w, h, b.as_raw(), 3, U16)),
        DynamicImage::ImageRgba16(b) => Decoded::Color(color(w, h, b.as_raw(), 4, U16)),
        DynamicImage::ImageRgb32F(b) => Decoded::Color(color(w, h, b.as_raw(), 3, 1.0)),
        DynamicImage::ImageRgba32F(b) => Decoded::Color(color(w, h, b.as_raw(), 4, 1.0)),
        other => {
            // Unknown layouts are funnelled through 16-bit RGB.
            let b = other.to_rgb16();
            Decoded::Color(color(w, h, b.as_raw(), 3, U16))
        }
    })
}

fn gray<T: Copy + Into<f64>>(w: usize, h: usize, raw: &[T], stride: usize, full: f64) -> Plane {
    let data = raw.chunks_exact(stride).map(|px| px[0].into() / full).collect();
    Plane::from_clamped(w, h, data)
}

fn color<T: Copy + Into<f64>>(w: usize, h: usize, raw: &[T], stride: usize, full: f64) -> ColorImage {
    let n = w * h;
    let (mut r, mut g, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for px in raw.chunks_exact(stride) {
        r.push(px[0].into() / full);
        g.push(px[1].into() / full);
        b.push(px[2].into() / full);
    }
    ColorImage::new(
        Plane::from_clamped(w, h, r),
        Plane::from_clamped(w, h, g),
        Plane::from_clamped(w, h, b),
    )
    .expect("planes share dimensions")
}

/// Quantises a `[0, 1]` sample to 8 bits, round-to-nearest.
#[inline]
pub fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode_png(img: &ColorImage) -> Result<Vec<u8>> {
    let (w, h) = img.dims();
    let mut raw = Vec::with_capacity(3 * w * h);
    for i in 0..w * h {
        for p in img.planes() {
            raw.push(to_u8(p.data()[i]));
        }
    }
    let buf = image::RgbImage::from_raw(w as u32, h as u32, raw).expect("buffer size");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn encode_gray_png(p: &Plane) -> Result<Vec<u8>> {
    let raw = p.data().iter().map(|&v| to_u8(v)).collect();
    let buf = image::GrayImage::from_raw(p.width() as u32, p.height() as u32, raw)
        .expect("buffer size");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn save_png(img: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_png(img)?).map_err(|e| Error::io(path, e))
}

pub fn save_gray_png(p: &Plane, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_gray_png(p)?).map_err(|e| Error::io(path, e))
}
