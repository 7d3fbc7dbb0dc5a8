use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Dense displacement field in pixels with a per-pixel validity mask.
///
/// Components are kept in `f64` so that losses and their gradients can be
/// checked numerically; the on-disk containers store `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    valid: BinaryMask,
}

impl FlowField {
    pub fn new(
        width: usize,
        height: usize,
        u: Vec<f64>,
        v: Vec<f64>,
        valid: BinaryMask,
    ) -> Result<Self> {
        let n = width * height;
        if u.len() != n || v.len() != n || valid.width() != width || valid.height() != height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} flow with u={} v={} valid={}x{}",
                u.len(),
                v.len(),
                valid.width(),
                valid.height()
            )));
        }
        for i in 0..n {
            if valid.data()[i] && !(u[i].is_finite() && v[i].is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite flow at valid index {i}"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            u,
            v,
            valid,
        })
    }

    /// Field that is valid everywhere.
    pub fn dense(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::new(width, height, u, v, BinaryMask::filled(width, height, true))
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, 0.0, 0.0)
    }

    pub fn constant(width: usize, height: usize, u: f64, v: f64) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            u: vec![u; n],
            v: vec![v; n],
            valid: BinaryMask::filled(width, height, true),
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> Option<(f64, f64)>) -> Self {
        let n = width * height;
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        let mut valid = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                match f(x, y) {
                    Some((a, b)) if a.is_finite() && b.is_finite() => {
                        u.push(a);
                        v.push(b);
                        valid.push(true);
                    }
                    _ => {
                        u.push(0.0);
                        v.push(0.0);
                        valid.push(false);
                    }
                }
            }
        }
        Self {
            width,
            height,
            u,
            v,
            valid: BinaryMask::new(width, height, valid).expect("sizes agree"),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn valid(&self) -> &BinaryMask {
        &self.valid
    }

    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid.get(x, y)
    }

    pub fn same_size(&self, other: &FlowField) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_size(&self, other: &FlowField) -> Result<()> {
        if !self.same_size(other) {
            return Err(Error::DimensionMismatch(format!(
                "flow {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// Returns a copy with the validity mask replaced.
    pub fn with_valid(&self, valid: BinaryMask) -> Result<FlowField> {
        FlowField::new(self.width, self.height, self.u.clone(), self.v.clone(), valid)
    }

    /// Largest vector length among valid pixels, `0` when none are valid.
    pub fn max_magnitude(&self) -> f64 {
        self.iter_valid()
            .map(|(_, u, v)| u.hypot(v))
            .fold(0.0, f64::max)
    }

    /// Iterates `(index, u, v)` over valid pixels.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.valid
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok)
            .map(|(i, _)| (i, self.u[i], self.v[i]))
    }
}
