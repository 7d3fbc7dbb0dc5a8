use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::raster::{clamp_unit, Image};
use crate::rng;

/// Heteroscedastic Gaussian noise: a sample with clean value `x` gets
/// variance `a·x + b`. Both coefficients are in `[0, 1]`-intensity units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub a: f64,
    pub b: f64,
}

impl NoiseParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = Self { a, b };
        p.validate()?;
        Ok(p)
    }

    /// Converts coefficients measured on 8-bit intensities.
    pub fn from_8bit(a: f64, b: f64) -> Result<Self> {
        Self::new(a / 255.0, b / (255.0 * 255.0))
    }

    pub fn variance(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.a >= 0.0 && self.a.is_finite(), || format!("noise a = {} must be >= 0", self.a))?;
        ensure(self.b >= 0.0 && self.b.is_finite(), || format!("noise b = {} must be >= 0", self.b))
    }
}

/// Draws every sample independently from `N(x, a·x + b)` and clamps to `[0, 1]`.
pub fn apply_lowlight_noise(img: &Image, params: NoiseParams, seed: u64) -> Result<Image> {
    params.validate()?;
    let mut rng = rng::stream(seed);
    let data = img
        .data()
        .iter()
        .map(|&x| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let sigma = params.variance(x as f64).max(0.0).sqrt();
            clamp_unit((x as f64 + sigma * z) as f32)
        })
        .collect();
    Ok(Image::from_planes_unchecked(img.width(), img.height(), img.channels(), data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_identity() {
        let img = Image::from_fn(8, 5, |x, y| (x * y) as f32 / 40.0).unwrap();
        let out = apply_lowlight_noise(&img, NoiseParams::new(0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn seeded_determinism() {
        let img = Image::filled(16, 16, 3, 0.3).unwrap();
        let p = NoiseParams::new(0.05, 0.001).unwrap();
        assert_eq!(
            apply_lowlight_noise(&img, p, 42).unwrap(),
            apply_lowlight_noise(&img, p, 42).unwrap()
        );
        assert_ne!(
            apply_lowlight_noise(&img, p, 42).unwrap(),
            apply_lowlight_noise(&img, p, 43).unwrap()
        );
    }

    #[test]
    fn rejects_negative_coefficients() {
        assert!(NoiseParams::new(-0.1, 0.0).is_err());
        assert!(NoiseParams::new(0.0, -1e-6).is_err());
    }

    #[test]
    fn monte_carlo_variance_tracks_model() {
        let x = 0.4f32;
        let p = NoiseParams::from_8bit(0.5, 4.0).unwrap();
        let img = Image::filled(1000, 1000, 1, x).unwrap();
        let out = apply_lowlight_noise(&img, p, 7).unwrap();
        let n = out.data().len() as f64;
        let mean = out.data().iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = out.data().iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let want = (0.5 * 0.4 * 255.0 + 4.0) / (255.0 * 255.0);
        assert!((var / want - 1.0).abs() < 0.02, "var {var} want {want}");
    }

    #[test]
    fn output_stays_in_unit_range() {
        let img = Image::from_fn(32, 32, |x, _| if x % 2 == 0 { 0.0 } else { 1.0 }).unwrap();
        let out = apply_lowlight_noise(&img, NoiseParams::new(0.5, 0.5).unwrap(), 3).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
