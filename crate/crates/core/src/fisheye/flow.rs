use crate::error::{Error, Result};
use crate::flow::FlowField;

use super::camera::CameraModel;
use super::depth::DepthMap;
use super::pose::RigidPose;

/// Exact flow induced by a rigid camera motion over a static scene.
///
/// Each pixel is lifted to `depth · unproject(p)`, moved by `pose` and
/// reprojected. Pixels with invalid depth, or whose moved point cannot be
/// projected, are invalid in the result.
pub fn analytic_flow(depth: &DepthMap, pose: &RigidPose, cam: &CameraModel) -> Result<FlowField> {
    if depth.width() != cam.width() || depth.height() != cam.height() {
        return Err(Error::DimensionMismatch(format!(
            "depth {}x{} vs camera {}x{}",
            depth.width(),
            depth.height(),
            cam.width(),
            cam.height()
        )));
    }
    Ok(FlowField::from_fn(cam.width(), cam.height(), |x, y| {
        let d = depth.get(x, y)?;
        let p = (x as f64, y as f64);
        let ray = cam.unproject(p).ok()?;
        let moved = pose.apply(&(ray * d));
        let q = cam.project(moved).ok()?;
        Some((q.0 - p.0, q.1 - p.1))
    }))
}
