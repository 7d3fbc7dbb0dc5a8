//! Motion-blur point spread functions.
//!
//! A PSF is the time-integrated footprint of a point light source while the
//! camera shakes during exposure. Kernels are produced by simulating a 2-D
//! camera trajectory, fitting it into the kernel support and rasterizing it
//! with equal dwell time per trajectory step.

use std::f64::consts::TAU;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::filter::correlate_plane;
use crate::raster::{clamp_unit, Image};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurSpec {
    /// Odd kernel side in pixels.
    pub size: usize,
    /// Trajectory irregularity in `[0, 1]`; 0 is a straight linear motion.
    pub intensity: f64,
}

impl BlurSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.size % 2 == 1, || format!("kernel size {} must be odd", self.size))?;
        ensure((0.0..=1.0).contains(&self.intensity), || {
            format!("blur intensity {} outside [0, 1]", self.intensity)
        })
    }
}

/// Dense correlation kernel with odd width and height, row-major weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        ensure(width % 2 == 1 && height % 2 == 1, || {
            format!("kernel {width}x{height} must have odd sides")
        })?;
        if weights.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} kernel with {} weights",
                weights.len()
            )));
        }
        Ok(Self {
            width,
            height,
            weights,
        })
    }

    pub fn identity() -> Self {
        Self {
            width: 1,
            height: 1,
            weights: vec![1.0],
        }
    }

    pub fn box_filter(size: usize) -> Result<Self> {
        let n = size * size;
        Self::new(size, size, vec![1.0 / n as f64; n])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Per-channel correlation with mirrored (reflect-101) borders. Results are
/// clamped to `[0, 1]`.
pub fn convolve(img: &Image, kernel: &Kernel) -> Result<Image> {
    if kernel.width > img.width() || kernel.height > img.height() {
        return Err(Error::InvalidParameter(format!(
            "kernel {}x{} larger than image {}x{}",
            kernel.width,
            kernel.height,
            img.width(),
            img.height()
        )));
    }
    let mut data = Vec::with_capacity(img.data().len());
    for c in 0..img.channels() {
        let plane = correlate_plane(
            img.plane(c),
            img.width(),
            img.height(),
            &kernel.weights,
            kernel.width,
            kernel.height,
        );
        data.extend(plane.into_iter().map(|v| clamp_unit(v as f32)));
    }
    Ok(Image::from_planes_unchecked(img.width(), img.height(), img.channels(), data))
}

/// Samples a motion-blur PSF. The result is nonnegative, sums to one and its
/// support is an 8-connected rasterized trajectory.
pub fn psf_blur_kernel(spec: BlurSpec, seed: u64) -> Result<Kernel> {
    spec.validate()?;
    if spec.size == 1 {
        return Ok(Kernel::identity());
    }
    let mut rng = rng::stream(seed);
    let half = ((spec.size - 1) / 2) as f64;
    let heading = TAU * rng::unit_f64(&mut rng);

    let path = if spec.intensity == 0.0 {
        let (dx, dy) = (half * heading.cos(), half * heading.sin());
        vec![(-dx, -dy), (dx, dy)]
    } else {
        let raw = shaky_trajectory(&mut rng, heading, spec.intensity, 8 * spec.size.max(4));
        fit_to_support(raw, half)
    };
    Ok(rasterize(&path, spec.size))
}

/// Unit-speed trajectory whose heading is perturbed by Gaussian jitter and
/// occasional abrupt shakes, both scaled by `intensity`.
fn shaky_trajectory(
    rng: &mut rng::Stream,
    heading: f64,
    intensity: f64,
    steps: usize,
) -> Vec<(f64, f64)> {
    let mut pos = (0.0, 0.0);
    let mut vel = (heading.cos(), heading.sin());
    let mut path = vec![pos];
    for _ in 0..steps {
        let gx: f64 = StandardNormal.sample(rng);
        let gy: f64 = StandardNormal.sample(rng);
        let mut dv = (intensity * gx * 0.6, intensity * gy * 0.6);
        if rng::bernoulli(rng, 0.05 * intensity) {
            let sx: f64 = StandardNormal.sample(rng);
            let sy: f64 = StandardNormal.sample(rng);
            dv.0 += 2.5 * intensity * sx;
            dv.1 += 2.5 * intensity * sy;
        }
        // weak pull towards the start keeps the path from drifting off
        dv.0 -= 0.02 * intensity * pos.0;
        dv.1 -= 0.02 * intensity * pos.1;
        let (nx, ny) = (vel.0 + dv.0, vel.1 + dv.1);
        let norm = nx.hypot(ny);
        if norm > 1e-12 {
            vel = (nx / norm, ny / norm);
        }
        pos = (pos.0 + vel.0, pos.1 + vel.1);
        path.push(pos);
    }
    path
}

/// Centers the path on its bounding box and scales it so that it spans the
/// kernel along its longer axis.
fn fit_to_support(path: Vec<(f64, f64)>, half: f64) -> Vec<(f64, f64)> {
    let (mut lo, mut hi) = ((f64::MAX, f64::MAX), (f64::MIN, f64::MIN));
    for &(x, y) in &path {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    let center = ((lo.0 + hi.0) / 2.0, (lo.1 + hi.1) / 2.0);
    let extent = ((hi.0 - lo.0) / 2.0).max((hi.1 - lo.1) / 2.0);
    let scale = if extent > 1e-12 { half / extent } else { 0.0 };
    path.into_iter()
        .map(|(x, y)| ((x - center.0) * scale, (y - center.1) * scale))
        .collect()
}

fn rasterize(path: &[(f64, f64)], size: usize) -> Kernel {
    let half = ((size - 1) / 2) as i64;
    let mut weights = vec![0.0; size * size];
    let deposit = |weights: &mut [f64], (x, y): (i64, i64), w: f64| {
        let (kx, ky) = ((x + half).clamp(0, 2 * half), (y + half).clamp(0, 2 * half));
        weights[ky as usize * size + kx as usize] += w;
    };
    let snap = |p: (f64, f64)| (p.0.round() as i64, p.1.round() as i64);
    let dwell = 1.0 / (path.len() - 1) as f64;
    for (i, seg) in path.windows(2).enumerate() {
        let pixels = line_pixels(snap(seg[0]), snap(seg[1]));
        // after the first segment, each start pixel was covered by its predecessor
        let fresh = if i == 0 || pixels.len() == 1 {
            &pixels[..]
        } else {
            &pixels[1..]
        };
        let share = dwell / fresh.len() as f64;
        for &p in fresh {
            deposit(&mut weights, p, share);
        }
    }
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Kernel {
        width: size,
        height: size,
        weights,
    }
}

/// DDA pixels from `a` to `b` inclusive; consecutive pixels are 8-adjacent.
fn line_pixels(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let steps = dx.abs().max(dy.abs());
    if steps == 0 {
        return vec![a];
    }
    (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            (
                a.0 + (t * dx as f64).round() as i64,
                a.1 + (t * dy as f64).round() as i64,
            )
        })
        .collect()
}
