//! Dual-branch pair augmentation.
//!
//! Both branches share one spatial transform (crop rectangle, flips,
//! rotation) so that their flow estimates stay pixel-aligned. Each branch
//! draws its own blur and noise; only branch B receives the cow-mask
//! brightness change. Within a branch the order is spatial → blur → noise →
//! brightness mask.
//!
//! Augmentation is split into [`sample_log`], which draws every random
//! decision into a [`TransformLog`], and [`apply_log`], which replays a log
//! deterministically.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::blur::{convolve, psf_blur_kernel, BlurSpec};
use super::cowmask::{apply_brightness_mask, cow_mask, default_mask_sigma};
use super::noise::{apply_lowlight_noise, NoiseParams};
use crate::error::{ensure, Error, Result};
use crate::raster::Image;
use crate::rng;

/// Two consecutive frames with matching geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub first: Image,
    pub second: Image,
}

impl FramePair {
    pub fn new(first: Image, second: Image) -> Result<Self> {
        if !first.same_shape(&second) {
            return Err(Error::DimensionMismatch(format!(
                "frames {}x{}x{} vs {}x{}x{}",
                first.width(),
                first.height(),
                first.channels(),
                second.width(),
                second.height(),
                second.channels()
            )));
        }
        Ok(Self { first, second })
    }

    fn map(&self, f: impl Fn(&Image) -> Result<Image>) -> Result<FramePair> {
        Ok(FramePair {
            first: f(&self.first)?,
            second: f(&self.second)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CropSpec {
    None,
    /// Removes `fraction` of the width and of the height.
    Fraction { fraction: f64 },
    /// Fixed output size.
    Size { height: usize, width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpatialConfig {
    pub crop: CropSpec,
    pub p_crop: f64,
    pub p_hflip: f64,
    pub p_vflip: f64,
    pub p_rot180: f64,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        Self {
            crop: CropSpec::None,
            p_crop: 1.0,
            p_hflip: 0.0,
            p_vflip: 0.0,
            p_rot180: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub p_noise: f64,
    pub p_blur: f64,
    pub p_brighten_true: f64,
    /// Whether branch B receives the cow-mask brightness change.
    pub brightness_mask: bool,
    pub coverage_range: [f64; 2],
    /// Cow-mask smoothing scale; `None` means [`default_mask_sigma`].
    pub mask_sigma: Option<f64>,
    pub gain_range: [f64; 2],
    /// Signal-proportional noise coefficient range, `[0, 1]`-intensity units.
    pub noise_a_range: [f64; 2],
    /// Signal-independent noise variance range, `[0, 1]`-intensity units.
    pub noise_b_range: [f64; 2],
    /// Odd kernel sizes, inclusive.
    pub blur_size_range: [usize; 2],
    pub blur_intensity_range: [f64; 2],
    pub spatial: SpatialConfig,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            p_noise: 0.5,
            p_blur: 0.6,
            p_brighten_true: 0.5,
            brightness_mask: true,
            coverage_range: [0.40, 0.70],
            mask_sigma: None,
            gain_range: [1.5, 3.0],
            noise_a_range: [0.01, 0.12],
            noise_b_range: [0.0001, 0.01],
            blur_size_range: [3, 15],
            blur_intensity_range: [0.0, 1.0],
            spatial: SpatialConfig::default(),
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("p_noise", self.p_noise),
            ("p_blur", self.p_blur),
            ("p_brighten_true", self.p_brighten_true),
            ("p_crop", self.spatial.p_crop),
            ("p_hflip", self.spatial.p_hflip),
            ("p_vflip", self.spatial.p_vflip),
            ("p_rot180", self.spatial.p_rot180),
        ];
        for (name, p) in probs {
            ensure((0.0..=1.0).contains(&p), || format!("{name} = {p} outside [0, 1]"))?;
        }
        let [c0, c1] = self.coverage_range;
        ensure(c0 > 0.0 && c1 < 1.0 && c0 <= c1, || {
            format!("coverage_range {:?} must satisfy 0 < lo <= hi < 1", self.coverage_range)
        })?;
        let ordered = |name: &str, r: [f64; 2], min: f64| {
            ensure(r[0] >= min && r[0] <= r[1] && r[1].is_finite(), || {
                format!("{name} {r:?} must be ordered and >= {min}")
            })
        };
        ordered("gain_range", self.gain_range, f64::MIN_POSITIVE)?;
        ordered("noise_a_range", self.noise_a_range, 0.0)?;
        ordered("noise_b_range", self.noise_b_range, 0.0)?;
        ordered("blur_intensity_range", self.blur_intensity_range, 0.0)?;
        ensure(self.blur_intensity_range[1] <= 1.0, || {
            "blur_intensity_range must lie in [0, 1]".into()
        })?;
        let [s0, s1] = self.blur_size_range;
        ensure(s0 % 2 == 1 && s1 % 2 == 1 && s0 <= s1, || {
            format!("blur_size_range {:?} must be odd and ordered", self.blur_size_range)
        })?;
        if let Some(s) = self.mask_sigma {
            ensure(s > 0.0, || format!("mask_sigma {s} must be > 0"))?;
        }
        match self.spatial.crop {
            CropSpec::Fraction { fraction } => ensure((0.0..1.0).contains(&fraction), || {
                format!("crop fraction {fraction} outside [0, 1)")
            }),
            CropSpec::Size { height, width } => {
                ensure(height > 0 && width > 0, || "crop size must be positive".into())
            }
            CropSpec::None => Ok(()),
        }
    }
}

/// Augmentation used for the sun-glare CNN: a 12% crop on every sample,
/// horizontal/vertical flips and a 180° rotation each with probability 0.5,
/// no photometric changes.
pub fn glare_cnn_preset() -> AugmentConfig {
    AugmentConfig {
        p_noise: 0.0,
        p_blur: 0.0,
        p_brighten_true: 0.5,
        brightness_mask: false,
        gain_range: [1.0, 1.0],
        spatial: SpatialConfig {
            crop: CropSpec::Fraction { fraction: 0.12 },
            p_crop: 1.0,
            p_hflip: 0.5,
            p_vflip: 0.5,
            p_rot180: 0.5,
        },
        ..AugmentConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurDraw {
    pub size: usize,
    pub intensity: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDraw {
    pub a: f64,
    pub b: f64,
    pub seed_first: u64,
    pub seed_second: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskDraw {
    pub coverage: f64,
    pub sigma: f64,
    pub seed: u64,
    pub brighten_true: bool,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchLog {
    pub blur: Option<BlurDraw>,
    pub noise: Option<NoiseDraw>,
    pub mask: Option<MaskDraw>,
}

/// Every random decision of one [`augment_pair`] call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformLog {
    pub seed: u64,
    pub source_width: usize,
    pub source_height: usize,
    pub crop: CropRect,
    pub hflip: bool,
    pub vflip: bool,
    pub rot180: bool,
    pub branch_a: BranchLog,
    pub branch_b: BranchLog,
}

/// Draws all decisions for a `width`×`height` input.
pub fn sample_log(cfg: &AugmentConfig, width: usize, height: usize, seed: u64) -> Result<TransformLog> {
    cfg.validate()?;
    let mut rng = rng::stream(seed);
    let crop = sample_crop(&cfg.spatial, width, height, &mut rng)?;
    let hflip = rng::bernoulli(&mut rng, cfg.spatial.p_hflip);
    let vflip = rng::bernoulli(&mut rng, cfg.spatial.p_vflip);
    let rot180 = rng::bernoulli(&mut rng, cfg.spatial.p_rot180);

    let branch_a = sample_branch(cfg, &crop, false, &mut rng);
    let branch_b = sample_branch(cfg, &crop, cfg.brightness_mask, &mut rng);
    Ok(TransformLog {
        seed,
        source_width: width,
        source_height: height,
        crop,
        hflip,
        vflip,
        rot180,
        branch_a,
        branch_b,
    })
}

fn sample_crop(
    spatial: &SpatialConfig,
    width: usize,
    height: usize,
    rng: &mut rng::Stream,
) -> Result<CropRect> {
    let apply = rng::bernoulli(rng, spatial.p_crop);
    let (cw, ch) = match spatial.crop {
        _ if !apply => (width, height),
        CropSpec::None => (width, height),
        CropSpec::Fraction { fraction } => (
            ((width as f64 * (1.0 - fraction)).round() as usize).clamp(1, width),
            ((height as f64 * (1.0 - fraction)).round() as usize).clamp(1, height),
        ),
        CropSpec::Size { height: h, width: w } => (w, h),
    };
    if cw > width || ch > height {
        return Err(Error::InvalidParameter(format!(
            "crop {cw}x{ch} larger than image {width}x{height}"
        )));
    }
    let x = (rng.next_u64() % (width - cw + 1) as u64) as usize;
    let y = (rng.next_u64() % (height - ch + 1) as u64) as usize;
    Ok(CropRect {
        x,
        y,
        width: cw,
        height: ch,
    })
}

fn sample_branch(
    cfg: &AugmentConfig,
    crop: &CropRect,
    with_mask: bool,
    rng: &mut rng::Stream,
) -> BranchLog {
    // every draw is taken unconditionally so that one probability change
    // does not shift the stream for later decisions
    let blur_on = rng::bernoulli(rng, cfg.p_blur);
    let [s0, s1] = cfg.blur_size_range;
    let size = s0 + 2 * (rng.next_u64() % ((s1 - s0) / 2 + 1) as u64) as usize;
    let intensity = rng::uniform(rng, cfg.blur_intensity_range[0], cfg.blur_intensity_range[1]);
    let blur_seed = rng.next_u64();

    let noise_on = rng::bernoulli(rng, cfg.p_noise);
    let a = rng::uniform(rng, cfg.noise_a_range[0], cfg.noise_a_range[1]);
    let b = rng::uniform(rng, cfg.noise_b_range[0], cfg.noise_b_range[1]);
    let (seed_first, seed_second) = (rng.next_u64(), rng.next_u64());

    let coverage = rng::uniform(rng, cfg.coverage_range[0], cfg.coverage_range[1]);
    let brighten_true = rng::bernoulli(rng, cfg.p_brighten_true);
    let gain = rng::uniform(rng, cfg.gain_range[0], cfg.gain_range[1]);
    let mask_seed = rng.next_u64();

    // a kernel larger than the crop cannot be applied
    let max_size = crop.width.min(crop.height);
    BranchLog {
        blur: (blur_on && size <= max_size).then_some(BlurDraw {
            size,
            intensity,
            seed: blur_seed,
        }),
        noise: noise_on.then_some(NoiseDraw {
            a,
            b,
            seed_first,
            seed_second,
        }),
        mask: with_mask.then(|| MaskDraw {
            coverage,
            sigma: cfg
                .mask_sigma
                .unwrap_or_else(|| default_mask_sigma(crop.width, crop.height)),
            seed: mask_seed,
            brighten_true,
            gain,
        }),
    }
}

/// Replays a log on `pair`, returning `(branch_a, branch_b)`.
pub fn apply_log(pair: &FramePair, log: &TransformLog) -> Result<(FramePair, FramePair)> {
    if pair.first.width() != log.source_width || pair.first.height() != log.source_height {
        return Err(Error::DimensionMismatch(format!(
            "log recorded for {}x{}, pair is {}x{}",
            log.source_width,
            log.source_height,
            pair.first.width(),
            pair.first.height()
        )));
    }
    let c = log.crop;
    let spatial = pair.map(|img| {
        let mut out = img.crop(c.x, c.y, c.width, c.height)?;
        if log.hflip {
            out = out.flip_horizontal();
        }
        if log.vflip {
            out = out.flip_vertical();
        }
        if log.rot180 {
            out = out.rotate_180();
        }
        Ok(out)
    })?;
    Ok((
        apply_branch(&spatial, &log.branch_a)?,
        apply_branch(&spatial, &log.branch_b)?,
    ))
}

fn apply_branch(pair: &FramePair, log: &BranchLog) -> Result<FramePair> {
    let mut out = pair.clone();
    if let Some(b) = log.blur {
        let kernel = psf_blur_kernel(
            BlurSpec {
                size: b.size,
                intensity: b.intensity,
            },
            b.seed,
        )?;
        out = out.map(|img| convolve(img, &kernel))?;
    }
    if let Some(n) = log.noise {
        let params = NoiseParams::new(n.a, n.b)?;
        out = FramePair {
            first: apply_lowlight_noise(&out.first, params, n.seed_first)?,
            second: apply_lowlight_noise(&out.second, params, n.seed_second)?,
        };
    }
    if let Some(m) = log.mask {
        let mask = cow_mask(out.first.width(), out.first.height(), m.coverage, m.sigma, m.seed)?;
        out = out.map(|img| apply_brightness_mask(img, &mask, m.gain, m.brighten_true))?;
    }
    Ok(out)
}

/// Produces the plain branch A, the brightness-perturbed branch B and the
/// log needed to replay both.
pub fn augment_pair(
    pair: &FramePair,
    cfg: &AugmentConfig,
    seed: u64,
) -> Result<(FramePair, FramePair, TransformLog)> {
    let log = sample_log(cfg, pair.first.width(), pair.first.height(), seed)?;
    let (a, b) = apply_log(pair, &log)?;
    Ok((a, b, log))
}
