use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angle step used when scanning the polynomial for monotonicity.
const SCAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pinhole { fx: f64, fy: f64 },
    /// `r(θ) = k1·θ + k2·θ² + k3·θ³ + k4·θ⁴` in pixels, θ the incidence angle.
    Poly4 { k: [f64; 4] },
}

/// Intrinsics of a central camera. Immutable after construction; the
/// largest supported incidence angle is fixed at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraJson", into = "CameraJson")]
pub struct CameraModel {
    width: usize,
    height: usize,
    cx: f64,
    cy: f64,
    projection: Projection,
    theta_max: f64,
}

impl CameraModel {
    pub fn pinhole(width: usize, height: usize, fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        check_size(width, height)?;
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "focal lengths ({fx}, {fy}) must be positive"
            )));
        }
        Ok(Self {
            width,
            height,
            cx,
            cy,
            projection: Projection::Pinhole { fx, fy },
            theta_max: std::f64::consts::FRAC_PI_2,
        })
    }

    /// Angle-polynomial fisheye. Without an explicit `theta_max` the model
    /// covers the largest angle whose radius still reaches the farthest
    /// image corner, limited to where `r(θ)` keeps increasing.
    pub fn poly4(
        width: usize,
        height: usize,
        cx: f64,
        cy: f64,
        k: [f64; 4],
        theta_max: Option<f64>,
    ) -> Result<Self> {
        check_size(width, height)?;
        if k.iter().any(|c| !c.is_finite()) || k[0] <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "poly4 coefficients {k:?} need k1 > 0"
            )));
        }
        let r = |t: f64| poly(&k, t);
        let dr = |t: f64| poly_derivative(&k, t);
        let monotone_limit = monotone_limit(&dr);
        let theta_max = match theta_max {
            Some(t) => {
                if !(t > 0.0 && t <= monotone_limit) {
                    return Err(Error::InvalidParameter(format!(
                        "theta_max {t} outside the increasing range (0, {monotone_limit}]"
                    )));
                }
                t
            }
            None => {
                let corner = [
                    (-0.5, -0.5),
                    (width as f64 - 0.5, -0.5),
                    (-0.5, height as f64 - 0.5),
                    (width as f64 - 0.5, height as f64 - 0.5),
                ]
                .iter()
                .map(|&(x, y)| (x - cx).hypot(y - cy))
                .fold(0.0, f64::max);
                if r(monotone_limit) <= corner {
                    monotone_limit
                } else {
                    bisect(|t| r(t) - corner, 0.0, monotone_limit)
                }
            }
        };
        Ok(Self {
            width,
            height,
            cx,
            cy,
            projection: Projection::Poly4 { k },
            theta_max,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.cx, self.cy)
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn is_fisheye(&self) -> bool {
        matches!(self.projection, Projection::Poly4 { .. })
    }

    /// Image radius of the incidence angle `theta` (fisheye only).
    pub fn radius(&self, theta: f64) -> Option<f64> {
        match self.projection {
            Projection::Poly4 { k } => Some(poly(&k, theta)),
            Projection::Pinhole { .. } => None,
        }
    }

    pub fn project(&self, p: Vector3<f64>) -> Result<(f64, f64)> {
        if p.norm() == 0.0 || !p.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter("cannot project the zero vector".into()));
        }
        match self.projection {
            Projection::Pinhole { fx, fy } => {
                if p.z <= 0.0 {
                    return Err(Error::BehindCamera);
                }
                Ok((fx * p.x / p.z + self.cx, fy * p.y / p.z + self.cy))
            }
            Projection::Poly4 { k } => {
                let rho = p.x.hypot(p.y);
                let theta = rho.atan2(p.z);
                if theta > self.theta_max + 1e-12 {
                    return Err(Error::OutOfModel(format!(
                        "incidence angle {theta} beyond {}",
                        self.theta_max
                    )));
                }
                if rho == 0.0 {
                    return Ok((self.cx, self.cy));
                }
                let r = poly(&k, theta);
                Ok((self.cx + r * p.x / rho, self.cy + r * p.y / rho))
            }
        }
    }

    /// Unit ray through pixel `(x, y)`.
    pub fn unproject(&self, (x, y): (f64, f64)) -> Result<Vector3<f64>> {
        let (dx, dy) = (x - self.cx, y - self.cy);
        match self.projection {
            Projection::Pinhole { fx, fy } => Ok(Vector3::new(dx / fx, dy / fy, 1.0).normalize()),
            Projection::Poly4 { k } => {
                let r = dx.hypot(dy);
                if r == 0.0 {
                    return Ok(Vector3::z());
                }
                let r_max = poly(&k, self.theta_max);
                if r > r_max + 1e-9 {
                    return Err(Error::OutOfModel(format!(
                        "radius {r} beyond model limit {r_max}"
                    )));
                }
                let theta = invert_radius(&k, r, self.theta_max)?;
                let s = theta.sin();
                Ok(Vector3::new(s * dx / r, s * dy / r, theta.cos()))
            }
        }
    }
}

fn check_size(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "degenerate camera size {width}x{height}"
        )));
    }
    Ok(())
}

fn poly(k: &[f64; 4], t: f64) -> f64 {
    t * (k[0] + t * (k[1] + t * (k[2] + t * k[3])))
}

fn poly_derivative(k: &[f64; 4], t: f64) -> f64 {
    k[0] + t * (2.0 * k[1] + t * (3.0 * k[2] + t * 4.0 * k[3]))
}

/// Largest angle in `(0, π]` up to which `r'(θ) > 0`.
fn monotone_limit(dr: &impl Fn(f64) -> f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut t = 0.0;
    while t < pi {
        let next = (t + SCAN_STEP).min(pi);
        if dr(next) <= 0.0 {
            // derivative crosses zero inside (t, next]
            return bisect(dr, t, next);
        }
        t = next;
    }
    pi
}

/// Root of `f` in `[lo, hi]` assuming `f(lo) < 0 <= f(hi)` or the reverse.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    lo
}

/// Solves `r(θ) = target` on `[0, theta_max]` by Newton steps kept inside a
/// shrinking bracket (bisection when a step leaves it).
fn invert_radius(k: &[f64; 4], target: f64, theta_max: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, theta_max);
    let mut theta = (target / k[0]).clamp(lo, hi);
    for _ in 0..50 {
        let f = poly(k, theta) - target;
        if f < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let d = poly_derivative(k, theta);
        let mut next = theta - f / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - theta).abs();
        theta = next;
        if step < 1e-10 {
            // final polish step
            let f = poly(k, theta) - target;
            let refined = theta - f / poly_derivative(k, theta);
            return Ok(if refined.is_finite() { refined.clamp(0.0, theta_max) } else { theta });
        }
    }
    Err(Error::Convergence(format!("radius {target} did not invert in 50 iterations")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CameraJson {
    kind: String,
    width: usize,
    height: usize,
    cx: f64,
    cy: f64,
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_max: Option<f64>,
}

impl TryFrom<CameraJson> for CameraModel {
    type Error = Error;

    fn try_from(j: CameraJson) -> Result<Self> {
        match (j.kind.to_ascii_lowercase().as_str(), j.params.as_slice()) {
            ("pinhole", &[fx, fy]) => CameraModel::pinhole(j.width, j.height, fx, fy, j.cx, j.cy),
            ("poly4", &[k1, k2, k3, k4]) => {
                CameraModel::poly4(j.width, j.height, j.cx, j.cy, [k1, k2, k3, k4], j.theta_max)
            }
            (kind, params) => Err(Error::Format(format!(
                "camera kind `{kind}` with {} params is not supported",
                params.len()
            ))),
        }
    }
}

impl From<CameraModel> for CameraJson {
    fn from(c: CameraModel) -> Self {
        let (kind, params, theta_max) = match c.projection {
            Projection::Pinhole { fx, fy } => ("pinhole", vec![fx, fy], None),
            Projection::Poly4 { k } => ("poly4", k.to_vec(), Some(c.theta_max)),
        };
        CameraJson {
            kind: kind.into(),
            width: c.width,
            height: c.height,
            cx: c.cx,
            cy: c.cy,
            params,
            theta_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn equidistant() -> CameraModel {
        CameraModel::poly4(640, 480, 320.0, 240.0, [100.0, 0.0, 0.0, 0.0], Some(FRAC_PI_2)).unwrap()
    }

    #[test]
    fn pinhole_examples() {
        let cam = CameraModel::pinhole(10, 10, 100.0, 100.0, 0.0, 0.0).unwrap();
        assert_eq!(cam.project(Vector3::new(0.0, 0.0, 1.0)).unwrap(), (0.0, 0.0));
        assert_eq!(cam.project(Vector3::new(1.0, 0.0, 1.0)).unwrap(), (100.0, 0.0));
        assert!(matches!(cam.project(Vector3::new(0.0, 0.0, -1.0)), Err(Error::BehindCamera)));
        assert!(cam.project(Vector3::zeros()).is_err());
        assert_eq!(cam.unproject((0.0, 0.0)).unwrap(), Vector3::z());
    }

    #[test]
    fn equidistant_closed_forms() {
        let cam = equidistant();
        let p = Vector3::new(FRAC_PI_4.sin(), 0.0, FRAC_PI_4.cos());
        let (x, y) = cam.project(p).unwrap();
        assert!((x - 320.0 - 100.0 * FRAC_PI_4).abs() < 1e-12);
        assert!((y - 240.0).abs() < 1e-12);

        let ray = cam.unproject((320.0, 240.0 + 100.0 * FRAC_PI_6)).unwrap();
        assert!(ray.x.abs() < 1e-12);
        assert!((ray.y - FRAC_PI_6.sin()).abs() < 1e-10);
        assert!((ray.z - FRAC_PI_6.cos()).abs() < 1e-10);
        assert_eq!(cam.unproject((320.0, 240.0)).unwrap(), Vector3::z());
    }

    #[test]
    fn out_of_model_errors() {
        let cam = equidistant();
        assert!(matches!(cam.project(Vector3::new(1.0, 0.0, -0.1)), Err(Error::OutOfModel(_))));
        assert!(matches!(cam.unproject((320.0 + 200.0, 240.0)), Err(Error::OutOfModel(_))));
    }

    #[test]
    fn theta_max_from_image_corner() {
        let cam = CameraModel::poly4(200, 100, 99.5, 49.5, [80.0, 0.0, 0.0, 0.0], None).unwrap();
        let corner = 100.0f64.hypot(50.0);
        assert!((cam.radius(cam.theta_max()).unwrap() - corner).abs() < 1e-9);
    }

    #[test]
    fn theta_max_stops_where_radius_turns() {
        // r'(θ) = 100 − 60θ vanishes at 5/3 rad
        let cam = CameraModel::poly4(4000, 4000, 2000.0, 2000.0, [100.0, -30.0, 0.0, 0.0], None)
            .unwrap();
        assert!((cam.theta_max() - 5.0 / 3.0).abs() < 1e-9);
        assert!(CameraModel::poly4(10, 10, 5.0, 5.0, [100.0, -30.0, 0.0, 0.0], Some(2.0)).is_err());
        assert!(CameraModel::poly4(10, 10, 5.0, 5.0, [0.0, 1.0, 0.0, 0.0], None).is_err());
    }

    #[test]
    fn round_trip_on_distorted_model() {
        let cam = CameraModel::poly4(800, 600, 401.3, 297.8, [300.0, -12.0, 8.5, -1.7], None).unwrap();
        for i in 0..50 {
            let x = 5.0 + (i * 97 % 790) as f64 + 0.37;
            let y = 3.0 + (i * 61 % 590) as f64 + 0.11;
            let ray = cam.unproject((x, y)).unwrap();
            assert!((ray.norm() - 1.0).abs() < 1e-12);
            let (px, py) = cam.project(ray).unwrap();
            assert!((px - x).abs() < 1e-6 && (py - y).abs() < 1e-6);
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind":"poly4","width":64,"height":48,"cx":31.5,"cy":23.5,"params":[40,0,0,0]}"#;
        let cam: CameraModel = serde_json::from_str(text).unwrap();
        assert!(cam.is_fisheye());
        let back: CameraModel = serde_json::from_str(&serde_json::to_string(&cam).unwrap()).unwrap();
        assert_eq!(back, cam);
        let bad = r#"{"kind":"pinhole","width":4,"height":4,"cx":0,"cy":0,"params":[1]}"#;
        assert!(serde_json::from_str::<CameraModel>(bad).is_err());
    }
}
