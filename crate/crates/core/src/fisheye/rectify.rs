use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::raster::Image;

use super::camera::CameraModel;

/// Offset used for the finite-difference ray Jacobian, in pixels.
const JACOBIAN_STEP: f64 = 0.25;

/// Resamples `img`, taken by `src`, into the geometry of `dst` (same optical
/// center, bilinear interpolation). Destination pixels whose ray falls
/// outside the source model or image are filled with 0.
///
/// Also returns the solid angle covered by valid destination pixels as a
/// fraction of the solid angle seen by the source image.
pub fn rectify(img: &Image, src: &CameraModel, dst: &CameraModel) -> Result<(Image, f64)> {
    if img.width() != src.width() || img.height() != src.height() {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs source camera {}x{}",
            img.width(),
            img.height(),
            src.width(),
            src.height()
        )));
    }
    let (w, h) = (dst.width(), dst.height());
    let max_x = (src.width() - 1) as f64;
    let max_y = (src.height() - 1) as f64;
    let tol = 1e-6;
    let mut planes = vec![vec![0.0f32; w * h]; img.channels()];
    let mut kept = 0.0;
    for y in 0..h {
        for x in 0..w {
            let Ok(ray) = dst.unproject((x as f64, y as f64)) else {
                continue;
            };
            let Ok((sx, sy)) = src.project(ray) else {
                continue;
            };
            if !(-tol..=max_x + tol).contains(&sx) || !(-tol..=max_y + tol).contains(&sy) {
                continue;
            }
            for (c, plane) in planes.iter_mut().enumerate() {
                plane[y * w + x] = img.sample_bilinear(c, sx, sy);
            }
            kept += pixel_solid_angle(dst, x as f64, y as f64).unwrap_or(0.0);
        }
    }
    let seen: f64 = (0..src.height())
        .flat_map(|y| (0..src.width()).map(move |x| (x, y)))
        .filter_map(|(x, y)| pixel_solid_angle(src, x as f64, y as f64))
        .sum();
    let fraction = if seen > 0.0 { kept / seen } else { 0.0 };
    let data = planes.concat();
    Ok((Image::from_planes_unchecked(w, h, img.channels(), data), fraction))
}

/// Solid angle in steradians subtended by the unit pixel centered at
/// `(x, y)`, from the cross product of the ray Jacobian columns. `None` when
/// the pixel center cannot be unprojected.
pub fn pixel_solid_angle(cam: &CameraModel, x: f64, y: f64) -> Option<f64> {
    let center = cam.unproject((x, y)).ok()?;
    let derivative = |dx: f64, dy: f64| -> Vector3<f64> {
        let plus = cam.unproject((x + dx * JACOBIAN_STEP, y + dy * JACOBIAN_STEP)).ok();
        let minus = cam.unproject((x - dx * JACOBIAN_STEP, y - dy * JACOBIAN_STEP)).ok();
        match (plus, minus) {
            (Some(p), Some(m)) => (p - m) / (2.0 * JACOBIAN_STEP),
            (Some(p), None) => (p - center) / JACOBIAN_STEP,
            (None, Some(m)) => (center - m) / JACOBIAN_STEP,
            (None, None) => Vector3::zeros(),
        }
    };
    Some(derivative(1.0, 0.0).cross(&derivative(0.0, 1.0)).norm())
}
