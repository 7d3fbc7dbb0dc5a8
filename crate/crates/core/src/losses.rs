//! Training objectives as plain numeric functions with analytic gradients.
//!
//! Both norms are reduced by a per-pixel mean rather than a raw sum so the
//! losses do not depend on resolution and can be added directly.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::flow::FlowField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Per-iteration decay, in `(0, 1]`.
    pub gamma: f64,
    /// Number of refinement iterations the predictions come from.
    pub n_iters: usize,
}

impl LossConfig {
    pub fn new(gamma: f64, n_iters: usize) -> Result<Self> {
        let cfg = Self { gamma, n_iters };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gamma > 0.0 && self.gamma <= 1.0, || {
            format!("gamma {} outside (0, 1]", self.gamma)
        })?;
        ensure(self.n_iters >= 1, || "n_iters must be >= 1".into())
    }

    /// Weight of prediction `i` (0-based) in a sequence of `n_iters`.
    pub fn weight(&self, i: usize) -> f64 {
        self.gamma.powi((self.n_iters - 1 - i) as i32)
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            gamma: 0.8,
            n_iters: 12,
        }
    }
}

/// Gradient with the shape of a flow field.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGradient {
    pub width: usize,
    pub height: usize,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl FlowGradient {
    fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            du: vec![0.0; width * height],
            dv: vec![0.0; width * height],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.du.iter().chain(&self.dv).all(|&g| g == 0.0)
    }
}

fn check_sequence(preds: &[FlowField], gt: &FlowField, cfg: &LossConfig) -> Result<usize> {
    cfg.validate()?;
    if preds.is_empty() {
        return Err(Error::InvalidParameter("empty prediction sequence".into()));
    }
    if preds.len() != cfg.n_iters {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for n_iters = {}",
            preds.len(),
            cfg.n_iters
        )));
    }
    for p in preds {
        p.check_size(gt)?;
    }
    match gt.valid().count() {
        0 => Err(Error::EmptySet),
        m => Ok(m),
    }
}

/// `Σ_i γ^{N−i} · mean_valid(|Δu| + |Δv|)` over ground-truth-valid pixels.
pub fn sequence_loss(preds: &[FlowField], gt: &FlowField, cfg: &LossConfig) -> Result<f64> {
    let m = check_sequence(preds, gt, cfg)? as f64;
    Ok(preds
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let l1: f64 = gt
                .iter_valid()
                .map(|(k, gu, gv)| (p.u()[k] - gu).abs() + (p.v()[k] - gv).abs())
                .sum();
            cfg.weight(i) * l1 / m
        })
        .sum())
}

/// Subgradient of [`sequence_loss`] with respect to each prediction.
/// `sign(0)` is taken as 0.
pub fn sequence_loss_grad(
    preds: &[FlowField],
    gt: &FlowField,
    cfg: &LossConfig,
) -> Result<Vec<FlowGradient>> {
    let m = check_sequence(preds, gt, cfg)? as f64;
    let sign = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
    Ok(preds
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let scale = cfg.weight(i) / m;
            let mut g = FlowGradient::zeros(gt.width(), gt.height());
            for (k, gu, gv) in gt.iter_valid() {
                g.du[k] = scale * sign(p.u()[k] - gu);
                g.dv[k] = scale * sign(p.v()[k] - gv);
            }
            g
        })
        .collect())
}

fn joint_valid(f: &FlowField, f_prime: &FlowField) -> Result<Vec<usize>> {
    f.check_size(f_prime)?;
    let idx: Vec<usize> = f
        .valid()
        .data()
        .iter()
        .zip(f_prime.valid().data())
        .enumerate()
        .filter(|(_, (a, b))| **a && **b)
        .map(|(i, _)| i)
        .collect();
    if idx.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(idx)
}

/// Mean squared difference over joint-valid pixels and both components.
pub fn brightness_consistency_loss(f: &FlowField, f_prime: &FlowField) -> Result<f64> {
    let idx = joint_valid(f, f_prime)?;
    let sum: f64 = idx
        .iter()
        .map(|&k| (f.u()[k] - f_prime.u()[k]).powi(2) + (f.v()[k] - f_prime.v()[k]).powi(2))
        .sum();
    Ok(sum / (2 * idx.len()) as f64)
}

/// Gradient of [`brightness_consistency_loss`] with respect to `f`; zero
/// outside the joint-valid set.
pub fn brightness_consistency_grad(f: &FlowField, f_prime: &FlowField) -> Result<FlowGradient> {
    let idx = joint_valid(f, f_prime)?;
    let scale = 2.0 / (2 * idx.len()) as f64;
    let mut g = FlowGradient::zeros(f.width(), f.height());
    for k in idx {
        g.du[k] = scale * (f.u()[k] - f_prime.u()[k]);
        g.dv[k] = scale * (f.v()[k] - f_prime.v()[k]);
    }
    Ok(g)
}

/// `L = L_s + L_b`.
pub fn total_loss(sequence: f64, consistency: f64) -> Result<f64> {
    for (name, v) in [("sequence", sequence), ("consistency", consistency)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} loss {v} must be finite and >= 0"
            )));
        }
    }
    Ok(sequence + consistency)
}
