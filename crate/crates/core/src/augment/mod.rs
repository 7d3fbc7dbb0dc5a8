//! Low-light degradation stack: sensor noise, PSF motion blur, cow-mask
//! brightness perturbation and the dual-branch pair augmentation.

mod blur;
mod cowmask;
mod noise;
mod pipeline;

pub use blur::{convolve, psf_blur_kernel, BlurSpec, Kernel};
pub use cowmask::{apply_brightness_mask, cow_mask, default_mask_sigma};
pub use noise::{apply_lowlight_noise, NoiseParams};
pub use pipeline::{
    apply_log, augment_pair, glare_cnn_preset, sample_log, AugmentConfig, BlurDraw, BranchLog,
    CropRect, CropSpec, FramePair, MaskDraw, NoiseDraw, SpatialConfig, TransformLog,
};
