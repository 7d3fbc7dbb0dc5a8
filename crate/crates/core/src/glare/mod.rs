//! Sun-glare detection: luma threshold, morphological cleanup, outer
//! contours, convex hulls and a size filter.

mod contours;
mod hull;
mod morphology;

use serde::{Deserialize, Serialize};

pub use contours::{find_outer_contours, Chain};
pub use hull::{convex_hulls, convex_hulls_with_margin, fill_polygons, monotone_chain, Polygon};
pub use morphology::{morphology, MorphOp};

use crate::error::{ensure, Error, Result};
use crate::raster::{BinaryMask, Image};

/// Slack for comparing `f32` intensities against a threshold, so that an
/// 8-bit 254 decodes as saturated at the default 254/255.
const THRESHOLD_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlareConfig {
    pub luma_threshold: f64,
    pub close_kernel: usize,
    pub erode_kernel: usize,
    /// Smallest kept hull area as a fraction of the image area.
    pub min_area_fraction: f64,
}

impl Default for GlareConfig {
    fn default() -> Self {
        Self::detection()
    }
}

impl GlareConfig {
    /// Parameters used when detecting glare in new frames.
    pub fn detection() -> Self {
        Self {
            luma_threshold: 254.0 / 255.0,
            close_kernel: 5,
            erode_kernel: 3,
            min_area_fraction: 5e-4,
        }
    }

    /// Looser profile for producing annotation proposals that a reviewer
    /// trims afterwards.
    pub fn annotation() -> Self {
        Self {
            luma_threshold: 250.0 / 255.0,
            close_kernel: 7,
            erode_kernel: 3,
            min_area_fraction: 2.5e-4,
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "detection" => Ok(Self::detection()),
            "annotation" => Ok(Self::annotation()),
            other => Err(Error::InvalidParameter(format!(
                "unknown glare profile `{other}` (expected detection or annotation)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure((0.0..=1.0).contains(&self.luma_threshold), || {
            format!("luma threshold {} outside [0, 1]", self.luma_threshold)
        })?;
        for k in [self.close_kernel, self.erode_kernel] {
            ensure(k % 2 == 1, || format!("kernel {k} must be odd and >= 1"))?;
        }
        ensure((0.0..1.0).contains(&self.min_area_fraction), || {
            format!("min area fraction {} outside [0, 1)", self.min_area_fraction)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlareDetection {
    pub polygons: Vec<Polygon>,
    pub mask: BinaryMask,
}

/// Polygon file layout: `{"image": ..., "polygons": [[[x, y], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonReport {
    pub image: String,
    pub polygons: Vec<Polygon>,
}

/// BT.601 luma of a 3-channel image.
pub fn rgb_to_luma(img: &Image) -> Result<Image> {
    if img.channels() != 3 {
        return Err(Error::InvalidParameter(format!(
            "expected 3 channels, got {}",
            img.channels()
        )));
    }
    Ok(img.to_luma())
}

/// True where the single-channel value is at least `t`.
pub fn threshold(plane: &Image, t: f64) -> Result<BinaryMask> {
    if plane.channels() != 1 {
        return Err(Error::InvalidParameter(format!(
            "expected 1 channel, got {}",
            plane.channels()
        )));
    }
    let data = plane
        .data()
        .iter()
        .map(|&v| v as f64 >= t - THRESHOLD_SLACK)
        .collect();
    BinaryMask::new(plane.width(), plane.height(), data)
}

/// Full pipeline. Hulls are grown back by the erosion radius so the final
/// erosion only removes small blobs instead of also shrinking kept ones;
/// the mask holds the pixels fully covered by a hull.
pub fn detect_glare(img: &Image, cfg: &GlareConfig) -> Result<GlareDetection> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    let luma = rgb_to_luma(img)?;
    let bright = threshold(&luma, cfg.luma_threshold)?;
    let closed = morphology(&bright, MorphOp::Close, cfg.close_kernel)?;
    let eroded = morphology(&closed, MorphOp::Erode, cfg.erode_kernel)?;
    let chains = find_outer_contours(&eroded);
    let min_area = cfg.min_area_fraction * (w * h) as f64;
    let polygons = convex_hulls_with_margin(&chains, cfg.erode_kernel / 2, Some((w, h)), min_area);
    let mask = fill_polygons(&polygons, w, h);
    Ok(GlareDetection { polygons, mask })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_image(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> (Image, BinaryMask) {
        let gt = BinaryMask::from_fn(w, h, |x, y| {
            (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r
        });
        let plane: Vec<f32> = gt.data().iter().map(|&g| if g { 1.0 } else { 0.4 }).collect();
        let data = [plane.clone(), plane.clone(), plane].concat();
        (Image::new(w, h, 3, data).unwrap(), gt)
    }

    fn iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
        let inter = a.and(b).unwrap().count();
        let union = a.data().iter().zip(b.data()).filter(|(x, y)| **x || **y).count();
        inter as f64 / union as f64
    }

    #[test]
    fn luma_weights() {
        let green = Image::new(1, 1, 3, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((rgb_to_luma(&green).unwrap().data()[0] - 0.587).abs() < 1e-6);
        let white = Image::filled(2, 2, 3, 1.0).unwrap();
        assert!(rgb_to_luma(&white).unwrap().data().iter().all(|v| (v - 1.0).abs() < 1e-6));
        let gray = Image::filled(2, 2, 3, 0.3).unwrap();
        assert!(rgb_to_luma(&gray).unwrap().data().iter().all(|v| (v - 0.3).abs() < 1e-6));
        assert!(rgb_to_luma(&Image::filled(1, 1, 1, 0.0).unwrap()).is_err());
    }

    #[test]
    fn threshold_examples() {
        let plane = Image::new(3, 1, 1, vec![0.5, 0.999, 1.0]).unwrap();
        assert_eq!(threshold(&plane, 254.0 / 255.0).unwrap().data(), &[false, true, true]);
        assert!(threshold(&plane, 0.0).unwrap().all());
        assert!(!threshold(&plane, 1.0 + 1e-3).unwrap().any());
        let eight_bit = Image::new(1, 1, 1, vec![254.0 / 255.0]).unwrap();
        assert!(threshold(&eight_bit, 254.0 / 255.0).unwrap().all());
    }

    #[test]
    fn black_and_white_frames() {
        let black = Image::filled(40, 30, 3, 0.0).unwrap();
        let d = detect_glare(&black, &GlareConfig::default()).unwrap();
        assert!(d.polygons.is_empty() && !d.mask.any());

        let white = Image::filled(40, 30, 3, 1.0).unwrap();
        let d = detect_glare(&white, &GlareConfig::default()).unwrap();
        assert_eq!(d.polygons.len(), 1);
        // closing against the false border costs two pixels per side
        assert_eq!(d.mask.count(), 36 * 26);
    }

    #[test]
    fn single_disk() {
        let (img, gt) = disk_image(96, 80, 47.3, 38.6, 20.0);
        let d = detect_glare(&img, &GlareConfig::default()).unwrap();
        assert_eq!(d.polygons.len(), 1);
        assert!(d.polygons[0].is_convex());
        assert!(iou(&d.mask, &gt) >= 0.95);
    }

    #[test]
    fn idempotent_on_own_mask() {
        let (img, _) = disk_image(96, 80, 40.0, 41.0, 20.0);
        let first = detect_glare(&img, &GlareConfig::default()).unwrap();
        let again = detect_glare(&first.mask.to_image().to_rgb(), &GlareConfig::default()).unwrap();
        assert!(iou(&again.mask, &first.mask) >= 0.99);
    }

    #[test]
    fn config_checks() {
        let cfg = GlareConfig {
            close_kernel: 4,
            ..GlareConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(GlareConfig::profile("annotation").is_ok());
        assert!(GlareConfig::profile("other").is_err());
    }
}
