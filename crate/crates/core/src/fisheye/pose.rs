use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rigid motion from source-camera to destination-camera coordinates,
/// `X' = R·X + t`, translation in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseJson", into = "PoseJson")]
pub struct RigidPose {
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
}

impl RigidPose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::new(UnitQuaternion::identity(), t)
    }

    /// Rotation by `angle` radians about `axis`, no translation.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        Self::new(
            UnitQuaternion::from_scaled_axis(axis.normalize() * angle),
            Vector3::zeros(),
        )
    }

    /// Quaternion given as `(w, x, y, z)`. Inputs within 1e-6 of unit norm are
    /// renormalized; anything further off is rejected.
    pub fn from_wxyz(q: [f64; 4], translation: [f64; 3]) -> Result<Self> {
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        let norm = quat.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "quaternion {q:?} has norm {norm}, expected 1"
            )));
        }
        if translation.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite translation".into()));
        }
        Ok(Self::new(
            UnitQuaternion::from_quaternion(quat),
            Vector3::from(translation),
        ))
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.inverse();
        Self::new(inv, -(inv * self.translation))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PoseJson {
    quaternion_wxyz: [f64; 4],
    translation_m: [f64; 3],
}

impl TryFrom<PoseJson> for RigidPose {
    type Error = Error;

    fn try_from(j: PoseJson) -> Result<Self> {
        RigidPose::from_wxyz(j.quaternion_wxyz, j.translation_m)
    }
}

impl From<RigidPose> for PoseJson {
    fn from(p: RigidPose) -> Self {
        let q = p.rotation.quaternion();
        PoseJson {
            quaternion_wxyz: [q.w, q.i, q.j, q.k],
            translation_m: [p.translation.x, p.translation.y, p.translation.z],
        }
    }
}
