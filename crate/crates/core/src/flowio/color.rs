//! Middlebury color-wheel flow visualization.
//!
//! Direction selects the hue from a 55-entry wheel, magnitude (relative to
//! `max_norm`) blends from white towards the saturated hue.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::raster::Image;

pub const COLOR_WHEEL_BINS: usize = 55;

// red→yellow, yellow→green, green→cyan, cyan→blue, blue→magenta, magenta→red
const SEGMENTS: [usize; 6] = [15, 6, 4, 11, 13, 6];

/// Entry `k` of the wheel as RGB in `[0, 1]`.
pub fn wheel_color(k: usize) -> [f64; 3] {
    let mut k = k % COLOR_WHEEL_BINS;
    for (seg, &len) in SEGMENTS.iter().enumerate() {
        if k < len {
            let ramp = (255 * k / len) as f64;
            let rgb = match seg {
                0 => [255.0, ramp, 0.0],
                1 => [255.0 - ramp, 255.0, 0.0],
                2 => [0.0, 255.0, ramp],
                3 => [0.0, 255.0 - ramp, 255.0],
                4 => [ramp, 0.0, 255.0],
                _ => [255.0, 0.0, 255.0 - ramp],
            };
            return rgb.map(|c| c / 255.0);
        }
        k -= len;
    }
    unreachable!("segment lengths sum to the bin count")
}

/// Color for one normalized vector (`u`, `v` already divided by the max norm).
pub(crate) fn vector_color(u: f64, v: f64) -> [f64; 3] {
    let rad = u.hypot(v);
    // +0.0 canonicalizes a signed zero so that (1, ±0) both land on bin 0
    let angle = (-(v + 0.0)).atan2(-u) / PI;
    let fk = (angle + 1.0) / 2.0 * (COLOR_WHEEL_BINS - 1) as f64;
    let k0 = (fk.floor() as usize).min(COLOR_WHEEL_BINS - 1);
    let k1 = (k0 + 1) % COLOR_WHEEL_BINS;
    let f = fk - k0 as f64;
    let (c0, c1) = (wheel_color(k0), wheel_color(k1));
    let mut out = [0.0; 3];
    for i in 0..3 {
        let col = (1.0 - f) * c0[i] + f * c1[i];
        out[i] = if rad <= 1.0 {
            1.0 - rad * (1.0 - col)
        } else {
            col * 0.75
        };
    }
    out
}

/// Renders `flow` as an RGB image. Without `max_norm` the largest valid
/// magnitude is used (never below 1e-6). Invalid pixels are black.
pub fn flow_to_color(flow: &FlowField, max_norm: Option<f64>) -> Result<Image> {
    let norm = match max_norm {
        Some(n) if n > 0.0 && n.is_finite() => n,
        Some(n) => return Err(Error::InvalidParameter(format!("max_norm {n} must be > 0"))),
        None => flow.max_magnitude().max(1e-6),
    };
    let n = flow.len();
    let mut data = vec![0.0f32; 3 * n];
    for (i, u, v) in flow.iter_valid() {
        let rgb = vector_color(u / norm, v / norm);
        for c in 0..3 {
            data[c * n + i] = rgb[c].clamp(0.0, 1.0) as f32;
        }
    }
    Image::new(flow.width(), flow.height(), 3, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::BinaryMask;

    #[test]
    fn wheel_anchor_colors() {
        assert_eq!(wheel_color(0), [1.0, 0.0, 0.0]);
        assert_eq!(wheel_color(15), [1.0, 1.0, 0.0]);
        assert_eq!(wheel_color(21), [0.0, 1.0, 0.0]);
        assert_eq!(wheel_color(25), [0.0, 1.0, 1.0]);
        assert_eq!(wheel_color(36), [0.0, 0.0, 1.0]);
        assert_eq!(wheel_color(49), [1.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_flow_is_white() {
        let img = flow_to_color(&FlowField::zeros(4, 3), None).unwrap();
        assert!(img.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn invalid_pixels_are_black() {
        let valid = BinaryMask::new(2, 1, vec![true, false]).unwrap();
        let f = FlowField::new(2, 1, vec![1.0, 1.0], vec![0.0, 0.0], valid).unwrap();
        let img = flow_to_color(&f, None).unwrap();
        assert_eq!((img.get(1, 0, 0), img.get(1, 0, 1), img.get(1, 0, 2)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rightward_saturates_to_first_bin() {
        let f = FlowField::constant(3, 2, 2.0, 0.0);
        let img = flow_to_color(&f, Some(2.0)).unwrap();
        for y in 0..2 {
            for x in 0..3 {
                assert_eq!([img.get(x, y, 0), img.get(x, y, 1), img.get(x, y, 2)], [1.0, 0.0, 0.0]);
            }
        }
        let neg_zero = FlowField::constant(1, 1, 2.0, -0.0);
        assert_eq!(flow_to_color(&neg_zero, Some(2.0)).unwrap(), flow_to_color(&f, Some(2.0)).unwrap().crop(0, 0, 1, 1).unwrap());
    }

    #[test]
    fn hue_steps_one_bin_per_wheel_step() {
        // bin k sits at angle a = 2k/54 - 1 (in units of π) of the vector (-u, -v)
        for k in 0..COLOR_WHEEL_BINS - 1 {
            let a = (2.0 * k as f64 / 54.0 - 1.0) * PI;
            let (u, v) = (-a.cos(), -a.sin());
            let got = vector_color(u, v);
            let want = wheel_color(k);
            for c in 0..3 {
                assert!((got[c] - want[c]).abs() < 1e-9, "bin {k}");
            }
        }
    }

    #[test]
    fn overshoot_is_dimmed() {
        assert_eq!(vector_color(2.0, 0.0), [0.75, 0.0, 0.0]);
    }

    #[test]
    fn rejects_nonpositive_norm() {
        assert!(flow_to_color(&FlowField::zeros(1, 1), Some(0.0)).is_err());
    }
}
