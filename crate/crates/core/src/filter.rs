//! Plane-level filtering shared by augmentation, cow masks and the estimator.

/// Mirror index without repeating the edge sample (`dcb|abcd|cba`), valid
/// for any offset.
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// 2-D correlation of one plane with a `kw`×`kh` kernel (both odd).
pub(crate) fn correlate_plane(
    src: &[f32],
    width: usize,
    height: usize,
    kernel: &[f64],
    kw: usize,
    kh: usize,
) -> Vec<f64> {
    let (rx, ry) = ((kw / 2) as isize, (kh / 2) as isize);
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for j in 0..kh {
                let sy = reflect101(y as isize + j as isize - ry, height);
                let row = &src[sy * width..(sy + 1) * width];
                for i in 0..kw {
                    let w = kernel[j * kw + i];
                    if w != 0.0 {
                        let sx = reflect101(x as isize + i as isize - rx, width);
                        acc += w * row[sx] as f64;
                    }
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Normalized 1-D Gaussian taps with radius `ceil(3σ)`.
pub(crate) fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable Gaussian smoothing with mirrored borders.
pub(crate) fn gaussian_smooth(src: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    let taps = gaussian_taps(sigma);
    let r = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            tmp[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * src[y * width + reflect101(x as isize + k as isize - r, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[reflect101(y as isize + k as isize - r, height) * width + x])
                .sum();
        }
    }
    out
}
