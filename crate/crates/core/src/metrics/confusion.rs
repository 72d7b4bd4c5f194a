use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::framecore::{BinaryMask, FrameError, Label, TriStateMask};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Pixel confusion of a prediction against ground truth; don't-care pixels
/// are not counted.
pub fn confusion(pred: &BinaryMask, gt: &TriStateMask) -> Result<ConfusionCounts, MetricsError> {
    if (pred.width(), pred.height()) != (gt.width(), gt.height()) {
        return Err(FrameError::Dimension {
            expected: (gt.width(), gt.height()),
            found: (pred.width(), pred.height()),
        }
        .into());
    }
    let mut c = ConfusionCounts::default();
    for (&p, &l) in pred.bits().iter().zip(gt.labels()) {
        match (l, p) {
            (Label::DontCare, _) => {}
            (Label::Foreground, true) => c.tp += 1,
            (Label::Foreground, false) => c.fn_ += 1,
            (Label::Background, true) => c.fp += 1,
            (Label::Background, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Harmonic mean of precision and recall.
///
/// `None` when precision or recall has a zero denominator (nothing predicted
/// or nothing to find). When both are defined but `tp == 0` the limit 0 is
/// returned.
pub fn f_measure(c: &ConfusionCounts) -> Option<f64> {
    let (pr, re) = (c.precision()?, c.recall()?);
    if pr + re == 0.0 {
        return Some(0.0);
    }
    Some(2.0 * pr * re / (pr + re))
}
