//! Flow estimator interface and a coarse-to-fine Lucas–Kanade baseline.

use serde::{Deserialize, Serialize};

use crate::augment::FramePair;
use crate::error::{ensure, Error, Result};
use crate::filter::gaussian_smooth;
use crate::flow::FlowField;
use crate::losses::brightness_consistency_loss;
use crate::raster::{BinaryMask, Image};

/// Anything that maps a frame pair to a flow field.
pub trait FlowEstimator {
    fn estimate(&self, first: &Image, second: &Image) -> Result<FlowField>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub levels: usize,
    /// Odd integration window side in pixels.
    pub window: usize,
    pub iterations: usize,
    /// Minimum eigenvalue of the window-averaged structure tensor below
    /// which a pixel is reported invalid.
    pub min_eigen_threshold: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            window: 15,
            iterations: 10,
            min_eigen_threshold: 1e-4,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.levels >= 1, || "levels must be >= 1".into())?;
        ensure(self.window >= 3 && self.window % 2 == 1, || {
            format!("window {} must be odd and >= 3", self.window)
        })?;
        ensure(self.min_eigen_threshold >= 0.0, || {
            "min eigenvalue threshold must be >= 0".into()
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LucasKanade {
    pub config: EstimatorConfig,
}

impl FlowEstimator for LucasKanade {
    fn estimate(&self, first: &Image, second: &Image) -> Result<FlowField> {
        estimate_flow(first, second, &self.config)
    }
}

/// Single-channel `f64` raster used internally.
#[derive(Clone)]
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl Plane {
    fn from_image(img: &Image) -> Self {
        let luma = img.to_luma();
        Self {
            w: luma.width(),
            h: luma.height(),
            data: luma.data().iter().map(|&v| v as f64).collect(),
        }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.w + x]
    }

    fn bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.w - 1) as f64);
        let y = y.clamp(0.0, (self.h - 1) as f64);
        let (x0, y0) = (x.floor() as usize, y.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(self.w - 1), (y0 + 1).min(self.h - 1));
        let (ax, ay) = (x - x0 as f64, y - y0 as f64);
        let top = self.at(x0, y0) * (1.0 - ax) + self.at(x1, y0) * ax;
        let bottom = self.at(x0, y1) * (1.0 - ax) + self.at(x1, y1) * ax;
        top * (1.0 - ay) + bottom * ay
    }

    fn downsample(&self) -> Plane {
        let smooth = gaussian_smooth(&self.data, self.w, self.h, 1.0);
        let (w, h) = (self.w.div_ceil(2), self.h.div_ceil(2));
        let data = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| smooth[2 * y * self.w + 2 * x])
            .collect();
        Plane { w, h, data }
    }

    /// Central differences, one-sided at the border.
    fn gradients(&self) -> (Vec<f64>, Vec<f64>) {
        let (w, h) = (self.w, self.h);
        let mut gx = vec![0.0; w * h];
        let mut gy = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
                let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
                if xr > xl {
                    gx[y * w + x] = (self.at(xr, y) - self.at(xl, y)) / (xr - xl) as f64;
                }
                if yd > yu {
                    gy[y * w + x] = (self.at(x, yd) - self.at(x, yu)) / (yd - yu) as f64;
                }
            }
        }
        (gx, gy)
    }
}

/// Window mean with the window truncated at the image border.
fn box_mean(src: &[f64], w: usize, h: usize, r: usize) -> Vec<f64> {
    let pass = |src: &[f64], len: usize, stride: usize, lines: usize, line_stride: usize| {
        let mut out = vec![0.0; src.len()];
        let mut prefix = vec![0.0; len + 1];
        for l in 0..lines {
            let base = l * line_stride;
            for i in 0..len {
                prefix[i + 1] = prefix[i] + src[base + i * stride];
            }
            for i in 0..len {
                let lo = i.saturating_sub(r);
                let hi = (i + r + 1).min(len);
                out[base + i * stride] = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            }
        }
        out
    };
    let rows = pass(src, w, 1, h, w);
    pass(&rows, h, w, w, 1)
}

/// Dense pyramidal Lucas–Kanade. At each level every pixel refines the
/// upsampled flow of the coarser level by Gauss–Newton steps over its own
/// window of the bilinearly warped second frame. Pixels whose structure
/// tensor is too poorly conditioned at full resolution are invalid.
pub fn estimate_flow(first: &Image, second: &Image, cfg: &EstimatorConfig) -> Result<FlowField> {
    cfg.validate()?;
    if first.width() != second.width() || first.height() != second.height() {
        return Err(Error::DimensionMismatch(format!(
            "frames {}x{} vs {}x{}",
            first.width(),
            first.height(),
            second.width(),
            second.height()
        )));
    }
    let mut pyr_a = vec![Plane::from_image(first)];
    let mut pyr_b = vec![Plane::from_image(second)];
    for _ in 1..cfg.levels {
        pyr_a.push(pyr_a.last().unwrap().downsample());
        pyr_b.push(pyr_b.last().unwrap().downsample());
    }
    let coarsest = pyr_a.last().unwrap();
    if coarsest.w.min(coarsest.h) < cfg.window {
        return Err(Error::InvalidParameter(format!(
            "coarsest level {}x{} is smaller than the {} px window",
            coarsest.w, coarsest.h, cfg.window
        )));
    }

    let r = cfg.window / 2;
    let mut u = vec![0.0; coarsest.w * coarsest.h];
    let mut v = u.clone();
    let mut conditioned = Vec::new();
    for level in (0..cfg.levels).rev() {
        let (a, b) = (&pyr_a[level], &pyr_b[level]);
        let (w, h) = (a.w, a.h);
        if level + 1 < cfg.levels {
            let prev = &pyr_a[level + 1];
            let up = |f: &[f64]| -> Vec<f64> {
                let coarse = Plane {
                    w: prev.w,
                    h: prev.h,
                    data: f.to_vec(),
                };
                (0..h)
                    .flat_map(|y| (0..w).map(move |x| (x, y)))
                    .map(|(x, y)| 2.0 * coarse.bilinear(x as f64 / 2.0, y as f64 / 2.0))
                    .collect()
            };
            u = up(&u);
            v = up(&v);
        }

        let (gx, gy) = a.gradients();
        let prod = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(a, b)| a * b).collect() };
        let sxx = box_mean(&prod(&gx, &gx), w, h, r);
        let sxy = box_mean(&prod(&gx, &gy), w, h, r);
        let syy = box_mean(&prod(&gy, &gy), w, h, r);
        let min_eig: Vec<f64> = (0..w * h)
            .map(|i| {
                let half_trace = 0.5 * (sxx[i] + syy[i]);
                let spread = (0.25 * (sxx[i] - syy[i]).powi(2) + sxy[i] * sxy[i]).sqrt();
                half_trace - spread
            })
            .collect();
        conditioned = min_eig
            .iter()
            .map(|&e| e >= cfg.min_eigen_threshold && e > 0.0)
            .collect::<Vec<bool>>();

        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if !conditioned[i] {
                    continue;
                }
                let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
                let (x0, x1) = (x.saturating_sub(r), (x + r).min(w - 1));
                let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
                let area = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
                for _ in 0..cfg.iterations {
                    let (mut bx, mut by) = (0.0, 0.0);
                    for qy in y0..=y1 {
                        for qx in x0..=x1 {
                            let q = qy * w + qx;
                            let diff = b.bilinear(qx as f64 + u[i], qy as f64 + v[i]) - a.data[q];
                            bx += gx[q] * diff;
                            by += gy[q] * diff;
                        }
                    }
                    let (bx, by) = (bx / area, by / area);
                    let du = -(syy[i] * bx - sxy[i] * by) / det;
                    let dv = -(sxx[i] * by - sxy[i] * bx) / det;
                    u[i] += du;
                    v[i] += dv;
                    if du.abs().max(dv.abs()) < 1e-3 {
                        break;
                    }
                }
            }
        }
    }

    let (w, h) = (first.width(), first.height());
    FlowField::new(w, h, u, v, BinaryMask::new(w, h, conditioned)?)
}

/// Consistency between the flows an estimator produces for two augmented
/// views of the same pair.
pub fn branch_consistency(
    estimator: &dyn FlowEstimator,
    branch_a: &FramePair,
    branch_b: &FramePair,
) -> Result<f64> {
    let fa = estimator.estimate(&branch_a.first, &branch_a.second)?;
    let fb = estimator.estimate(&branch_b.first, &branch_b.second)?;
    brightness_consistency_loss(&fa, &fb)
}
