//! Procedural textured plane used to synthesize frames with exact depth.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::raster::Image;

use super::camera::CameraModel;
use super::depth::DepthMap;
use super::pose::RigidPose;

/// Lambertian plane `n·X = offset` in reference-camera coordinates with
/// intensity `0.5 + contrast · sin(2πa/P) · sin(2πb/P)`, where `(a, b)` are
/// in-plane coordinates in meters and `P` is the texture period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneScene {
    pub normal: [f64; 3],
    pub offset: f64,
    pub period: f64,
    pub contrast: f64,
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub image: Image,
    pub depth: DepthMap,
}

impl PlaneScene {
    /// Fronto-parallel plane `distance` meters ahead of the reference camera.
    pub fn fronto_parallel(distance: f64, period: f64, contrast: f64) -> Self {
        Self {
            normal: [0.0, 0.0, 1.0],
            offset: distance,
            period,
            contrast,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = Vector3::from(self.normal);
        ensure(n.norm() > 1e-12, || "plane normal must be nonzero".into())?;
        ensure(self.period > 0.0, || format!("texture period {} must be positive", self.period))?;
        ensure((0.0..=0.5).contains(&self.contrast), || {
            format!("contrast {} outside [0, 0.5]", self.contrast)
        })
    }

    fn basis(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let n = Vector3::from(self.normal).normalize();
        let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = (helper - n * n.dot(&helper)).normalize();
        let e2 = n.cross(&e1);
        (n, e1, e2)
    }

    /// Intensity at a point on the plane.
    pub fn texture(&self, p: &Vector3<f64>) -> f64 {
        let (_, e1, e2) = self.basis();
        self.shade(p.dot(&e1), p.dot(&e2))
    }

    fn shade(&self, a: f64, b: f64) -> f64 {
        0.5 + self.contrast * (TAU * a / self.period).sin() * (TAU * b / self.period).sin()
    }

    /// Renders the view of a camera whose coordinates relate to the
    /// reference camera by `pose` (`X_cam = R·X_ref + t`). Pixels whose ray
    /// misses the plane are black with invalid depth.
    pub fn render(&self, cam: &CameraModel, pose: &RigidPose) -> Result<Rendered> {
        self.validate()?;
        let (n, e1, e2) = self.basis();
        let offset = self.offset / Vector3::from(self.normal).norm();
        let inv = pose.inverse();
        let center = inv.apply(&Vector3::zeros());
        let (w, h) = (cam.width(), cam.height());
        let mut pixels = vec![0.0f32; w * h];
        let mut depth = vec![f64::NAN; w * h];
        for y in 0..h {
            for x in 0..w {
                let Ok(ray) = cam.unproject((x as f64, y as f64)) else {
                    continue;
                };
                let dir = inv.rotation() * ray;
                let denom = n.dot(&dir);
                if denom.abs() < 1e-12 {
                    continue;
                }
                let s = (offset - n.dot(&center)) / denom;
                if s <= 0.0 {
                    continue;
                }
                let p = center + dir * s;
                pixels[y * w + x] = self.shade(p.dot(&e1), p.dot(&e2)) as f32;
                depth[y * w + x] = s;
            }
        }
        Ok(Rendered {
            image: Image::new(w, h, 1, pixels)?,
            depth: DepthMap::new(w, h, depth)?,
        })
    }
}
