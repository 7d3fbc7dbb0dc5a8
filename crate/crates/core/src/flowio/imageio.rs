//! PNG and PPM/PGM image I/O with max-value scaling to `[0, 1]`.

use std::io::Cursor;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use super::has_extension;
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Image};

/// Decodes PNG or PNM bytes. 16-bit inputs are scaled by 1/65535, 8-bit by
/// 1/255; alpha channels are dropped.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    let dynamic = image::load_from_memory(bytes)?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let gray = matches!(
        dynamic,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
    );
    let wide = matches!(
        dynamic,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    let interleaved: Vec<f32> = match (gray, wide) {
        (true, false) => to_unit(dynamic.to_luma8().into_raw(), 255.0),
        (true, true) => to_unit(dynamic.to_luma16().into_raw(), 65535.0),
        (false, false) => to_unit(dynamic.to_rgb8().into_raw(), 255.0),
        (false, true) => to_unit(dynamic.to_rgb16().into_raw(), 65535.0),
    };
    let channels = if gray { 1 } else { 3 };
    Image::new(w, h, channels, deinterleave(&interleaved, w * h, channels))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    decode_image(&std::fs::read(path)?)
}

/// Writes 8-bit PNG for `.png`, binary PGM/PPM for `.pgm`/`.ppm`/`.pnm`.
pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    let bytes = if has_extension(path, "png") {
        encode_png(img)?
    } else if ["ppm", "pgm", "pnm"].iter().any(|e| has_extension(path, e)) {
        encode_pnm(img)?
    } else {
        return Err(Error::Format(format!(
            "unsupported image extension: {}",
            path.display()
        )));
    };
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let (raw, color) = quantize8(img);
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out).write_image(
        &raw,
        img.width() as u32,
        img.height() as u32,
        color,
    )?;
    Ok(out)
}

/// Binary PGM for single-channel images, binary PPM for RGB.
pub fn encode_pnm(img: &Image) -> Result<Vec<u8>> {
    let (raw, color) = quantize8(img);
    let subtype = if img.channels() == 1 {
        PnmSubtype::Graymap(SampleEncoding::Binary)
    } else {
        PnmSubtype::Pixmap(SampleEncoding::Binary)
    };
    let mut out = Cursor::new(Vec::new());
    PnmEncoder::new(&mut out).with_subtype(subtype).write_image(
        &raw,
        img.width() as u32,
        img.height() as u32,
        color,
    )?;
    Ok(out.into_inner())
}

/// 8-bit grayscale PNG with 255 for set cells.
pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    encode_png(&mask.to_image())
}

/// True when the bytes carry a PNG signature.
pub(crate) fn is_png(bytes: &[u8]) -> bool {
    image::guess_format(bytes).is_ok_and(|f| f == ImageFormat::Png)
}

fn to_unit<T: Into<f32> + Copy>(raw: Vec<T>, max: f32) -> Vec<f32> {
    raw.into_iter().map(|v| v.into() / max).collect()
}

fn deinterleave(data: &[f32], pixels: usize, channels: usize) -> Vec<f32> {
    let mut out = vec![0.0; data.len()];
    for (i, px) in data.chunks_exact(channels).enumerate() {
        for (c, &v) in px.iter().enumerate() {
            out[c * pixels + i] = v;
        }
    }
    out
}

fn quantize8(img: &Image) -> (Vec<u8>, ExtendedColorType) {
    let n = img.width() * img.height();
    let c = img.channels();
    let mut raw = vec![0u8; n * c];
    for ch in 0..c {
        for (i, &v) in img.plane(ch).iter().enumerate() {
            raw[i * c + ch] = (v * 255.0).round().clamp(0.0, 255.0) as u8;
        }
    }
    let color = if c == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    (raw, color)
}
