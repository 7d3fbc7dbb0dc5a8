//! Flow and mask evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::raster::BinaryMask;

/// Mean endpoint error over `gt.valid ∧ mask`.
pub fn epe(pred: &FlowField, gt: &FlowField, mask: Option<&BinaryMask>) -> Result<f64> {
    pred.check_size(gt)?;
    if let Some(m) = mask {
        m.check_shape(gt.valid())?;
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, gu, gv) in gt.iter_valid() {
        if mask.is_some_and(|m| !m.data()[i]) {
            continue;
        }
        sum += (pred.u()[i] - gu).hypot(pred.v()[i] - gv);
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySet);
    }
    Ok(sum / count as f64)
}

/// Pixel proportions with glare as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<Confusion> {
    pred.check_shape(gt)?;
    let mut counts = [0usize; 4];
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        let slot = match (p, g) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        counts[slot] += 1;
    }
    let n = pred.len().max(1) as f64;
    Ok(Confusion {
        tp: counts[0] as f64 / n,
        fp: counts[1] as f64 / n,
        fn_: counts[2] as f64 / n,
        tn: counts[3] as f64 / n,
    })
}

/// `(precision, recall)`; `None` when the denominator is zero.
pub fn precision_recall(c: &Confusion) -> (Option<f64>, Option<f64>) {
    let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
    (ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn_))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IouCase {
    /// Ground truth contains glare and background.
    BothPresent,
    /// Clean ground truth, clean prediction.
    CleanCorrect,
    /// Clean ground truth, glare predicted somewhere.
    FalseGlareOnClean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IouReport {
    pub case: IouCase,
    /// Percent.
    pub iou_background: f64,
    /// Percent.
    pub iou_glare: f64,
}

/// Per-class IoU with the degenerate-case conventions for clean frames:
/// a clean frame predicted clean scores 100/100, a clean frame with any
/// predicted glare scores 0/0. A class absent from both masks scores 100.
pub fn iou_cases(pred: &BinaryMask, gt: &BinaryMask) -> Result<IouReport> {
    pred.check_shape(gt)?;
    if !gt.any() {
        return Ok(if pred.any() {
            IouReport {
                case: IouCase::FalseGlareOnClean,
                iou_background: 0.0,
                iou_glare: 0.0,
            }
        } else {
            IouReport {
                case: IouCase::CleanCorrect,
                iou_background: 100.0,
                iou_glare: 100.0,
            }
        });
    }
    let class_iou = |positive: bool| {
        let mut inter = 0usize;
        let mut union = 0usize;
        for (&p, &g) in pred.data().iter().zip(gt.data()) {
            let (p, g) = (p == positive, g == positive);
            inter += (p && g) as usize;
            union += (p || g) as usize;
        }
        if union == 0 {
            100.0
        } else {
            100.0 * inter as f64 / union as f64
        }
    };
    Ok(IouReport {
        case: IouCase::BothPresent,
        iou_background: class_iou(false),
        iou_glare: class_iou(true),
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(w: usize, h: usize, bits: &[u8]) -> BinaryMask {
        BinaryMask::new(w, h, bits.iter().map(|&b| b != 0).collect()).unwrap()
    }

    #[test]
    fn epe_examples() {
        let gt = FlowField::from_fn(4, 3, |x, y| Some((x as f64, -(y as f64))));
        assert_eq!(epe(&gt, &gt, None).unwrap(), 0.0);
        let shifted = FlowField::from_fn(4, 3, |x, y| Some((x as f64 + 3.0, 4.0 - y as f64)));
        assert!((epe(&shifted, &gt, None).unwrap() - 5.0).abs() < 1e-12);
        let pred = FlowField::dense(2, 1, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(epe(&pred, &FlowField::zeros(2, 1), None).unwrap(), 0.5);
    }

    #[test]
    fn epe_respects_mask_and_validity() {
        let pred = FlowField::dense(2, 1, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let gt = FlowField::zeros(2, 1);
        assert_eq!(epe(&pred, &gt, Some(&mask(2, 1, &[1, 0]))).unwrap(), 1.0);
        assert!(matches!(epe(&pred, &gt, Some(&mask(2, 1, &[0, 0]))), Err(Error::EmptySet)));
        assert!(matches!(
            epe(&pred, &FlowField::zeros(1, 2), None),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn confusion_examples() {
        let all = BinaryMask::filled(3, 3, true);
        let c = confusion(&all, &all).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1.0, 0.0, 0.0, 0.0));
        let gt = mask(2, 2, &[1, 0, 1, 0]);
        let c = confusion(&gt.complement(), &gt).unwrap();
        assert_eq!((c.tp, c.tn), (0.0, 0.0));
        let c = confusion(&mask(2, 2, &[1, 1, 0, 0]), &gt).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (0.25, 0.25, 0.25, 0.25));
        assert_eq!(precision_recall(&c), (Some(0.5), Some(0.5)));
    }

    #[test]
    fn precision_recall_undefined() {
        let c = Confusion {
            tp: 0.0,
            fp: 0.0,
            fn_: 0.5,
            tn: 0.5,
        };
        assert_eq!(precision_recall(&c), (None, Some(0.0)));
        let perfect = Confusion {
            tp: 1.0,
            fp: 0.0,
            fn_: 0.0,
            tn: 0.0,
        };
        assert_eq!(precision_recall(&perfect), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn iou_case_conventions() {
        let clean = BinaryMask::filled(2, 2, false);
        let r = iou_cases(&clean, &clean).unwrap();
        assert_eq!((r.case, r.iou_background, r.iou_glare), (IouCase::CleanCorrect, 100.0, 100.0));
        let r = iou_cases(&mask(2, 2, &[0, 0, 0, 1]), &clean).unwrap();
        assert_eq!((r.case, r.iou_background, r.iou_glare), (IouCase::FalseGlareOnClean, 0.0, 0.0));
    }

    #[test]
    fn iou_both_present_by_hand() {
        let gt = mask(2, 2, &[1, 0, 0, 0]);
        let pred = mask(2, 2, &[1, 1, 0, 0]);
        let r = iou_cases(&pred, &gt).unwrap();
        assert_eq!(r.case, IouCase::BothPresent);
        assert!((r.iou_glare - 50.0).abs() < 1e-12);
        assert!((r.iou_background - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn iou_all_glare_ground_truth() {
        let gt = BinaryMask::filled(2, 1, true);
        let r = iou_cases(&gt, &gt).unwrap();
        assert_eq!((r.iou_background, r.iou_glare), (100.0, 100.0));
        let r = iou_cases(&mask(2, 1, &[1, 0]), &gt).unwrap();
        assert_eq!((r.iou_background, r.iou_glare), (0.0, 50.0));
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(mean(&[]), None);
    }
}
