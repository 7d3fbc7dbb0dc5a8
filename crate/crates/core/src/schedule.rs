//! Training-schedule configuration and seeded dataset-mixture sampling.
//!
//! Crop sizes are `[height, width]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Built-in schedule that pretrains on pinhole data and then finetunes on
/// fisheye data alone.
pub const FINETUNE_SCHEDULE: &str = include_str!("../configs/finetune.json");
/// Built-in schedule whose last stage mixes fisheye and pinhole data.
pub const JOINT_SCHEDULE: &str = include_str!("../configs/joint.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DatasetId {
    /// FlyingChairs
    C,
    /// Synthetic fisheye driving scenes
    W,
    /// Sintel
    S,
    /// FlyingThings3D
    T,
    /// KITTI-2015
    K,
    /// HD1K
    H,
}

impl DatasetId {
    pub const ALL: [DatasetId; 6] = [Self::C, Self::W, Self::S, Self::T, Self::K, Self::H];

    pub fn code(self) -> &'static str {
        match self {
            Self::C => "C",
            Self::W => "W",
            Self::S => "S",
            Self::T => "T",
            Self::K => "K",
            Self::H => "H",
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.code() == s)
            .ok_or_else(|| Error::UnknownDataset(s.to_string()))
    }
}

impl Serialize for DatasetId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureEntry {
    pub dataset: DatasetId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageConfig {
    pub name: String,
    pub init_weights: Option<String>,
    pub mixture: Vec<MixtureEntry>,
    pub lr: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    /// `[height, width]` in pixels.
    pub crop_size: [usize; 2],
}

impl StageConfig {
    pub fn weight_of(&self, dataset: DatasetId) -> Option<f64> {
        self.mixture.iter().find(|e| e.dataset == dataset).map(|e| e.weight)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub stages: Vec<StageConfig>,
}

impl Schedule {
    pub fn stage(&self, name: &str) -> Option<&StageConfig> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    #[serde(default)]
    name: Option<String>,
    stages: Vec<RawStage>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStage {
    name: String,
    #[serde(default)]
    init_weights: Option<String>,
    mixture: Vec<RawEntry>,
    lr: f64,
    batch_size: usize,
    weight_decay: f64,
    crop_size: [usize; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    dataset: String,
    weight: f64,
}

/// Parses and validates a schedule document.
pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let raw: RawSchedule = serde_json::from_str(text)?;
    if raw.stages.is_empty() {
        return Err(Error::Validation("schedule has no stages".into()));
    }
    let mut stages: Vec<StageConfig> = Vec::with_capacity(raw.stages.len());
    for s in raw.stages {
        if stages.iter().any(|p| p.name == s.name) {
            return Err(Error::Validation(format!("duplicate stage `{}`", s.name)));
        }
        if let Some(init) = &s.init_weights {
            if !stages.iter().any(|p| &p.name == init) {
                return Err(Error::Validation(format!(
                    "stage `{}` initializes from `{init}`, which is not an earlier stage",
                    s.name
                )));
            }
        }
        let mixture = s
            .mixture
            .into_iter()
            .map(|e| {
                Ok(MixtureEntry {
                    dataset: e.dataset.parse()?,
                    weight: e.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        validate_mixture(&mixture).map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(format!("stage `{}`: {msg}", s.name)),
            other => other,
        })?;
        for (field, v) in [("lr", s.lr), ("weight_decay", s.weight_decay)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("stage `{}`: {field} {v} must be > 0", s.name)));
            }
        }
        if s.batch_size == 0 {
            return Err(Error::Validation(format!("stage `{}`: batch_size must be >= 1", s.name)));
        }
        if s.crop_size.contains(&0) {
            return Err(Error::Validation(format!("stage `{}`: empty crop size", s.name)));
        }
        stages.push(StageConfig {
            name: s.name,
            init_weights: s.init_weights,
            mixture,
            lr: s.lr,
            batch_size: s.batch_size,
            weight_decay: s.weight_decay,
            crop_size: s.crop_size,
        });
    }
    Ok(Schedule {
        name: raw.name,
        stages,
    })
}

/// Positive weights, no repeated dataset, sum 1 within 1e-9.
pub fn validate_mixture(mixture: &[MixtureEntry]) -> Result<()> {
    if mixture.is_empty() {
        return Err(Error::EmptySet);
    }
    for (i, e) in mixture.iter().enumerate() {
        if !(e.weight.is_finite() && e.weight > 0.0) {
            return Err(Error::Validation(format!("weight {} of {} must be > 0", e.weight, e.dataset)));
        }
        if mixture[..i].iter().any(|p| p.dataset == e.dataset) {
            return Err(Error::Validation(format!("dataset {} listed twice", e.dataset)));
        }
    }
    let total: f64 = mixture.iter().map(|e| e.weight).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("mixture weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// `n` independent draws by cumulative-weight inversion of uniforms from a
/// seeded ChaCha8 stream. The sequence depends only on the mixture order
/// and the seed.
pub fn sample_mixture(mixture: &[MixtureEntry], n: usize, seed: u64) -> Result<Vec<DatasetId>> {
    validate_mixture(mixture)?;
    let mut cumulative = Vec::with_capacity(mixture.len());
    let mut acc = 0.0;
    for e in mixture {
        acc += e.weight;
        cumulative.push(acc);
    }
    let mut stream = rng::stream(seed);
    Ok((0..n)
        .map(|_| {
            let u = rng::unit_f64(&mut stream) * acc;
            let k = cumulative.partition_point(|&c| c <= u).min(mixture.len() - 1);
            mixture[k].dataset
        })
        .collect())
}

pub fn finetune_schedule() -> Schedule {
    parse_schedule(FINETUNE_SCHEDULE).expect("built-in schedule is valid")
}

pub fn joint_schedule() -> Schedule {
    parse_schedule(JOINT_SCHEDULE).expect("built-in schedule is valid")
}
