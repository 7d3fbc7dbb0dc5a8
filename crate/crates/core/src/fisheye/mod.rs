//! Camera geometry: pinhole and 4th-order angle-polynomial fisheye models,
//! analytic flow from depth and relative pose, and fisheye-to-pinhole
//! rectification.

mod camera;
mod depth;
mod flow;
mod pose;
mod rectify;
mod scene;

pub use camera::{CameraModel, Projection};
pub use depth::{read_pfm, write_pfm, DepthConvention, DepthMap};
pub use flow::analytic_flow;
pub use pose::RigidPose;
pub use rectify::{pixel_solid_angle, rectify};
pub use scene::{PlaneScene, Rendered};
