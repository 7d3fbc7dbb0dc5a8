//! Optical-flow robustness tooling.
//!
//! The crate bundles the pieces needed to train and evaluate flow estimators
//! that hold up under low light and strong lens distortion, all runnable
//! without a GPU:
//!
//! - [`flowio`]: `.flo` and KITTI 16-bit PNG flow containers, image I/O and
//!   the Middlebury color wheel.
//! - [`metrics`]: endpoint error, pixel confusion proportions and the
//!   case-wise IoU used for glare masks.
//! - [`augment`]: heteroscedastic sensor noise, PSF motion blur, cow-mask
//!   brightness perturbation and the dual-branch pair augmentation.
//! - [`losses`]: the γ-decayed sequence loss and the brightness-consistency
//!   loss, with analytic gradients.
//! - [`fisheye`]: pinhole and polynomial fisheye cameras, analytic flow from
//!   depth and ego-motion, rectification.
//! - [`glare`]: the classical sun-glare detector (luma threshold, morphology,
//!   outer contours, convex hulls).
//! - [`estimator`]: a pluggable estimator trait and a dense pyramidal
//!   Lucas–Kanade baseline.
//! - [`schedule`]: training-schedule configs and seeded mixture sampling.

pub mod augment;
pub mod error;
pub mod estimator;
mod filter;
pub mod fisheye;
pub mod flow;
pub mod flowio;
pub mod glare;
pub mod losses;
pub mod metrics;
pub mod raster;
pub mod rng;
pub mod schedule;

pub use error::{Error, Result};
pub use flow::FlowField;
pub use raster::{BinaryMask, Image};
