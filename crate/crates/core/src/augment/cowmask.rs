//! Cow masks: thresholded Gaussian-smoothed noise, giving random but locally
//! connected regions, and the brightness change driven by them.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure, Error, Result};
use crate::filter::gaussian_smooth;
use crate::raster::{clamp_unit, BinaryMask, Image};
use crate::rng;

/// Default smoothing scale: a sixteenth of the shorter image side.
pub fn default_mask_sigma(width: usize, height: usize) -> f64 {
    (width.min(height) as f64 / 16.0).max(0.5)
}

/// Smooths white noise with a Gaussian of `scale_sigma` pixels and keeps
/// the `coverage` fraction of highest responses.
pub fn cow_mask(
    width: usize,
    height: usize,
    coverage: f64,
    scale_sigma: f64,
    seed: u64,
) -> Result<BinaryMask> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "degenerate mask size {width}x{height}"
        )));
    }
    ensure(coverage > 0.0 && coverage < 1.0, || {
        format!("coverage {coverage} outside (0, 1)")
    })?;
    ensure(scale_sigma > 0.0 && scale_sigma.is_finite(), || {
        format!("scale_sigma {scale_sigma} must be > 0")
    })?;

    let n = width * height;
    let mut rng = rng::stream(seed);
    let noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let smooth = gaussian_smooth(&noise, width, height, scale_sigma);

    let keep = (coverage * n as f64).round() as usize;
    if keep == 0 {
        return Ok(BinaryMask::filled(width, height, false));
    }
    let mut sorted = smooth.clone();
    let (_, &mut threshold, _) = sorted.select_nth_unstable_by(n - keep, f64::total_cmp);
    BinaryMask::new(width, height, smooth.iter().map(|&v| v >= threshold).collect())
}

/// Multiplies the selected region by `gain` (clamped to `[0, 1]`). The
/// selected region is the mask's true area when `brighten_true`, otherwise
/// its false area.
pub fn apply_brightness_mask(
    img: &Image,
    mask: &BinaryMask,
    gain: f64,
    brighten_true: bool,
) -> Result<Image> {
    ensure(gain > 0.0 && gain.is_finite(), || format!("gain {gain} must be > 0"))?;
    if mask.width() != img.width() || mask.height() != img.height() {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.width(),
            mask.height(),
            img.width(),
            img.height()
        )));
    }
    let n = img.width() * img.height();
    let data = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if mask.data()[i % n] == brighten_true {
                clamp_unit((x as f64 * gain) as f32)
            } else {
                x
            }
        })
        .collect();
    Ok(Image::from_planes_unchecked(img.width(), img.height(), img.channels(), data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_is_hit() {
        let m = cow_mask(256, 256, 0.55, 16.0, 1).unwrap();
        let frac = m.count() as f64 / m.len() as f64;
        assert!((0.53..=0.57).contains(&frac), "{frac}");
    }

    #[test]
    fn seeded() {
        assert_eq!(
            cow_mask(64, 48, 0.4, 4.0, 9).unwrap(),
            cow_mask(64, 48, 0.4, 4.0, 9).unwrap()
        );
        assert_ne!(
            cow_mask(64, 48, 0.4, 4.0, 9).unwrap(),
            cow_mask(64, 48, 0.4, 4.0, 10).unwrap()
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(cow_mask(0, 10, 0.5, 2.0, 0).is_err());
        assert!(cow_mask(10, 10, 1.0, 2.0, 0).is_err());
        assert!(cow_mask(10, 10, 0.5, 0.0, 0).is_err());
    }

    #[test]
    fn brightness_examples() {
        let img = Image::from_fn(3, 2, |x, y| 0.1 * (x + y) as f32 + 0.2).unwrap();
        let all_false = BinaryMask::filled(3, 2, false);
        assert_eq!(apply_brightness_mask(&img, &all_false, 2.0, true).unwrap(), img);
        let some = BinaryMask::from_fn(3, 2, |x, _| x == 1);
        assert_eq!(apply_brightness_mask(&img, &some, 1.0, false).unwrap(), img);

        let mut single = BinaryMask::filled(3, 2, false);
        single.set(0, 0, true);
        let out = apply_brightness_mask(&img, &single, 2.0, true).unwrap();
        assert!((out.get(0, 0, 0) - 0.4).abs() < 1e-6);
        for (i, (a, b)) in out.data().iter().zip(img.data()).enumerate().skip(1) {
            assert_eq!(a, b, "pixel {i}");
        }
        // brighten_true = false selects the complement
        let out = apply_brightness_mask(&img, &single, 2.0, false).unwrap();
        assert_eq!(out.get(0, 0, 0), img.get(0, 0, 0));
        assert!((out.get(1, 0, 0) - 0.6).abs() < 1e-6);
    }

    #[test]
    fn brightness_clamps_and_validates() {
        let img = Image::filled(2, 2, 3, 0.8).unwrap();
        let out = apply_brightness_mask(&img, &BinaryMask::filled(2, 2, true), 3.0, true).unwrap();
        assert!(out.data().iter().all(|&v| v == 1.0));
        assert!(apply_brightness_mask(&img, &BinaryMask::filled(2, 2, true), 0.0, true).is_err());
        assert!(apply_brightness_mask(&img, &BinaryMask::filled(1, 2, true), 1.0, true).is_err());
    }
}
