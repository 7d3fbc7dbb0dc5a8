#![allow(dead_code)]

use flowkit::raster::{BinaryMask, Image};
use flowkit::rng::{self, Stream};
use flowkit::FlowField;

pub fn rng(seed: u64) -> Stream {
    rng::stream(seed)
}

pub fn uniform(r: &mut Stream, lo: f64, hi: f64) -> f64 {
    rng::uniform(r, lo, hi)
}

pub fn below(r: &mut Stream, n: usize) -> usize {
    ((rng::unit_f64(r) * n as f64) as usize).min(n - 1)
}

/// White noise blurred by a separable Gaussian and stretched to
/// `[0.15, 0.85]`.
pub fn smooth_noise(w: usize, h: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let noise: Vec<f64> = (0..w * h).map(|_| rng::unit_f64(&mut r)).collect();
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let clampi = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * noise[y * w + clampi(x as isize + k as isize - radius, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * tmp[clampi(y as isize + k as isize - radius, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    stretch(&out, 0.15, 0.85)
}

/// Blurred noise at three scales so every pyramid level sees structure,
/// stretched to `[0.05, 0.95]`.
pub fn multiscale_texture(w: usize, h: usize, seed: u64) -> Vec<f64> {
    let layers: Vec<Vec<f64>> = [1.5, 4.0, 10.0]
        .iter()
        .enumerate()
        .map(|(k, &sigma)| smooth_noise(w, h, sigma, seed.wrapping_mul(3).wrapping_add(k as u64)))
        .collect();
    let mixed = (0..w * h)
        .map(|i| {
            [0.3, 0.4, 0.3]
                .iter()
                .zip(&layers)
                .map(|(wgt, l)| wgt * l[i])
                .sum()
        })
        .collect::<Vec<f64>>();
    stretch(&mixed, 0.05, 0.95)
}

fn stretch(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    values.iter().map(|v| lo + (hi - lo) * (v - min) / (max - min)).collect()
}

pub fn bilinear(data: &[f64], w: usize, h: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (ax, ay) = (x - x0 as f64, y - y0 as f64);
    let top = data[y0 * w + x0] * (1.0 - ax) + data[y0 * w + x1] * ax;
    let bot = data[y1 * w + x0] * (1.0 - ax) + data[y1 * w + x1] * ax;
    top * (1.0 - ay) + bot * ay
}

/// Frame pair of size `n × n` cut from a larger texture so that the second
/// frame is the first moved by `shift` pixels.
pub fn shifted_pair(n: usize, shift: (f64, f64), seed: u64) -> (Image, Image) {
    let margin = 16;
    let big = n + 2 * margin;
    let tex = multiscale_texture(big, big, seed);
    let sample = |dx: f64, dy: f64| {
        Image::from_fn(n, n, |x, y| {
            bilinear(&tex, big, big, (x + margin) as f64 - dx, (y + margin) as f64 - dy) as f32
        })
        .unwrap()
    };
    (sample(0.0, 0.0), sample(shift.0, shift.1))
}

/// Mean endpoint error against a constant flow over valid pixels at least
/// `border` pixels inside the frame, with the fraction of such pixels that
/// are valid.
pub fn interior_epe(flow: &FlowField, truth: (f64, f64), border: usize) -> (f64, f64) {
    let (mut sum, mut valid, mut total) = (0.0, 0usize, 0usize);
    for y in border..flow.height() - border {
        for x in border..flow.width() - border {
            total += 1;
            if flow.is_valid(x, y) {
                let (u, v) = flow.at(x, y);
                sum += (u - truth.0).hypot(v - truth.1);
                valid += 1;
            }
        }
    }
    (sum / valid.max(1) as f64, valid as f64 / total as f64)
}

/// Gray textured frame below the glare threshold with one white disk and a
/// few isolated saturated specks away from it.
pub fn glare_disk_scene(seed: u64) -> (Image, BinaryMask) {
    let mut r = rng(seed);
    let (w, h) = (160 + 8 * below(&mut r, 12), 120 + 8 * below(&mut r, 8));
    let radius = uniform(&mut r, 12.0, 40.0);
    let cx = uniform(&mut r, radius + 4.0, w as f64 - radius - 4.0);
    let cy = uniform(&mut r, radius + 4.0, h as f64 - radius - 4.0);
    let level = uniform(&mut r, 0.1, 0.6);
    let gt = BinaryMask::from_fn(w, h, |x, y| {
        (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= radius * radius
    });
    let mut specks = Vec::new();
    while specks.len() < 5 {
        let (sx, sy) = (below(&mut r, w), below(&mut r, h));
        let d = (sx as f64 - cx).hypot(sy as f64 - cy);
        if d > radius + 10.0 {
            specks.push((sx, sy));
        }
    }
    let mut planes = Vec::with_capacity(3 * w * h);
    for c in 0..3 {
        for y in 0..h {
            for x in 0..w {
                let v = if gt.get(x, y) || specks.contains(&(x, y)) {
                    1.0
                } else {
                    let tint = 0.05 * c as f64;
                    (level + tint + 0.25 * rng::unit_f64(&mut r)).min(0.95)
                };
                planes.push(v as f32);
            }
        }
    }
    (Image::new(w, h, 3, planes).unwrap(), gt)
}

/// Number of 8-connected foreground components, by flood fill.
pub fn component_count(mask: &BinaryMask) -> usize {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for start in 0..w * h {
        if !mask.data()[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if mask.get_signed(nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
    }
    count
}
