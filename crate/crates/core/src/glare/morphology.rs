use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::raster::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphOp {
    Erode,
    Dilate,
    /// Dilation followed by erosion.
    Close,
}

/// Binary morphology with a `kernel_px`-wide square structuring element.
/// Pixels outside the image count as false.
pub fn morphology(mask: &BinaryMask, op: MorphOp, kernel_px: usize) -> Result<BinaryMask> {
    ensure(kernel_px % 2 == 1, || format!("kernel {kernel_px} must be odd"))?;
    let r = kernel_px / 2;
    Ok(match op {
        MorphOp::Erode => square_filter(mask, r, false),
        MorphOp::Dilate => square_filter(mask, r, true),
        MorphOp::Close => square_filter(&square_filter(mask, r, true), r, false),
    })
}

/// Separable max (`any`) or min (`!any`) filter over a `(2r+1)²` window.
fn square_filter(mask: &BinaryMask, r: usize, any: bool) -> BinaryMask {
    if r == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let src = mask.data();
    let pass = |get: &dyn Fn(usize) -> bool, n: usize, i: usize| -> bool {
        let lo = i as isize - r as isize;
        let hi = i + r;
        if any {
            (lo.max(0) as usize..=hi.min(n - 1)).any(get)
        } else {
            lo >= 0 && hi < n && (lo as usize..=hi).all(get)
        }
    };
    let mut rows = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            rows[y * w + x] = pass(&|k| src[y * w + k], w, x);
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = pass(&|k| rows[k * w + x], h, y);
        }
    }
    BinaryMask::new(w, h, out).expect("same size")
}
