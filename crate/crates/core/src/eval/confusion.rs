use serde::{Deserialize, Serialize};

use crate::data::{FeatureDataset, NoiseMask};
use crate::error::{Error, Result};
use crate::pipeline::CoresetResult;

/// Selection quality against the noise ground truth.
///
/// Positive means *kept*; the reference is clean versus corrupted. Rates
/// whose denominator is zero are `None` (serialised as `null`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub tnr: Option<f64>,
    pub fnr: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl SelectionConfusion {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let clean = tp + fn_;
        let corrupted = fp + tn;
        Self {
            tp,
            fp,
            tn,
            fn_,
            tpr: ratio(tp, clean),
            fpr: ratio(fp, corrupted),
            tnr: ratio(tn, corrupted),
            fnr: ratio(fn_, clean),
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn tally(kept: bool, corrupted: bool, counts: &mut [usize; 4]) {
        let cell = match (kept, corrupted) {
            (true, false) => 0,
            (true, true) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        counts[cell] += 1;
    }
}

fn kept_flags(coreset: &CoresetResult, n: usize) -> Result<Vec<bool>> {
    let mut kept = vec![false; n];
    for i in coreset.classes.iter().flat_map(|c| c.kept.iter().copied()) {
        if i >= n {
            return Err(Error::Argument(format!("coreset index {i} out of range {n}")));
        }
        kept[i] = true;
    }
    Ok(kept)
}

/// Pooled confusion over all `n` samples.
pub fn selection_confusion(coreset: &CoresetResult, mask: &NoiseMask, n: usize) -> Result<SelectionConfusion> {
    let kept = kept_flags(coreset, n)?;
    let corrupted = mask.corrupted_flags(n)?;
    let mut counts = [0usize; 4];
    for (&k, &c) in kept.iter().zip(&corrupted) {
        SelectionConfusion::tally(k, c, &mut counts);
    }
    Ok(SelectionConfusion::from_counts(counts[0], counts[1], counts[2], counts[3]))
}

/// One confusion per (possibly corrupted) label class of `ds`.
pub fn selection_confusion_by_class(
    coreset: &CoresetResult,
    mask: &NoiseMask,
    ds: &FeatureDataset,
) -> Result<Vec<SelectionConfusion>> {
    let kept = kept_flags(coreset, ds.len())?;
    let corrupted = mask.corrupted_flags(ds.len())?;
    let mut counts = vec![[0usize; 4]; ds.num_classes()];
    for i in 0..ds.len() {
        SelectionConfusion::tally(kept[i], corrupted[i], &mut counts[ds.label(i)]);
    }
    Ok(counts
        .into_iter()
        .map(|c| SelectionConfusion::from_counts(c[0], c[1], c[2], c[3]))
        .collect())
}
