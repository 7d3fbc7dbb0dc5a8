//! KITTI 16-bit PNG flow encoding.
//!
//! Channel 1 stores `u·64 + 2^15`, channel 2 stores `v·64 + 2^15`, channel 3
//! is non-zero for valid pixels.

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use super::imageio::is_png;
use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::raster::BinaryMask;

const SCALE: f64 = 64.0;
const OFFSET: f64 = 32768.0;

pub fn read_kitti_png(bytes: &[u8]) -> Result<FlowField> {
    if !is_png(bytes) {
        return Err(Error::Format("KITTI flow must be a PNG".into()));
    }
    let img = match image::load_from_memory_with_format(bytes, ImageFormat::Png)? {
        DynamicImage::ImageRgb16(img) => img,
        other => {
            return Err(Error::Format(format!(
                "KITTI flow must be 16-bit RGB, got {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    let mut valid = Vec::with_capacity(w * h);
    for px in img.pixels() {
        let [a, b, ok] = px.0;
        let ok = ok != 0;
        u.push(if ok { (a as f64 - OFFSET) / SCALE } else { 0.0 });
        v.push(if ok { (b as f64 - OFFSET) / SCALE } else { 0.0 });
        valid.push(ok);
    }
    FlowField::new(w, h, u, v, BinaryMask::new(w, h, valid)?)
}

/// Encodes to KITTI PNG. Components are rounded to the nearest 1/64 px and
/// saturate at the 16-bit range; invalid pixels are written as all zeros.
pub fn write_kitti_png(flow: &FlowField) -> Result<Vec<u8>> {
    let valid = flow.valid().data();
    let mut raw: Vec<u8> = Vec::with_capacity(flow.len() * 6);
    for (i, &ok) in valid.iter().enumerate() {
        let px = if ok {
            [encode(flow.u()[i]), encode(flow.v()[i]), 1]
        } else {
            [0, 0, 0]
        };
        for s in px {
            // the encoder takes native-endian samples and swaps them itself
            raw.extend_from_slice(&s.to_ne_bytes());
        }
    }
    let mut out = Vec::new();
    PngEncoder::new(&mut out).write_image(
        &raw,
        flow.width() as u32,
        flow.height() as u32,
        ExtendedColorType::Rgb16,
    )?;
    Ok(out)
}

fn encode(component: f64) -> u16 {
    (component * SCALE + OFFSET).round().clamp(0.0, 65535.0) as u16
}
