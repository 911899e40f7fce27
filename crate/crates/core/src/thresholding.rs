//! Per-class cutoffs on conformity scores.
//!
//! For a candidate `τ`, TPR is the fraction of in-class distances `<= τ` and
//! FPR the fraction of out-of-class distances `<= τ`. The adaptive cutoff
//! maximises `J = TPR − FPR` over the in-class distances themselves; the
//! fixed cutoff keeps a prescribed share of each class.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted conformity scores for one class model.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistances {
    class_id: usize,
    /// `(sample index, distance)`, ascending by distance then index.
    in_distances: Vec<(usize, f64)>,
    /// Ascending.
    out_distances: Vec<f64>,
}

fn check_distance(d: f64) -> Result<()> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(Error::Numeric(format!("distance {d} must be finite and >= 0")))
    }
}

impl ClassDistances {
    pub fn new(class_id: usize, mut in_distances: Vec<(usize, f64)>, mut out_distances: Vec<f64>) -> Result<Self> {
        for &(_, d) in &in_distances {
            check_distance(d)?;
        }
        for &d in &out_distances {
            check_distance(d)?;
        }
        in_distances.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out_distances.sort_by(f64::total_cmp);
        Ok(Self {
            class_id,
            in_distances,
            out_distances,
        })
    }

    /// Splits per-sample distances by whether `labels[i] == class_id`.
    pub fn from_labelled(class_id: usize, distances: &[f64], labels: &[u32]) -> Result<Self> {
        if distances.len() != labels.len() {
            return Err(Error::shape("distance vector", labels.len(), distances.len()));
        }
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        for (i, (&d, &l)) in distances.iter().zip(labels).enumerate() {
            if l as usize == class_id {
                ins.push((i, d));
            } else {
                outs.push(d);
            }
        }
        Self::new(class_id, ins, outs)
    }

    /// Convenience for index-free use; in-class samples get indices `0..n`.
    pub fn from_values(class_id: usize, in_values: &[f64], out_values: &[f64]) -> Result<Self> {
        Self::new(
            class_id,
            in_values.iter().copied().enumerate().collect(),
            out_values.to_vec(),
        )
    }

    pub fn class_id(&self) -> usize {
        self.class_id
    }

    pub fn in_distances(&self) -> &[(usize, f64)] {
        &self.in_distances
    }

    pub fn out_distances(&self) -> &[f64] {
        &self.out_distances
    }

    pub fn n_in(&self) -> usize {
        self.in_distances.len()
    }

    pub fn n_out(&self) -> usize {
        self.out_distances.len()
    }

    /// Sample indices of the `count` closest in-class samples, in distance order.
    pub fn closest(&self, count: usize) -> Vec<usize> {
        self.in_distances.iter().take(count).map(|&(i, _)| i).collect()
    }

    fn require_both(&self) -> Result<()> {
        let reason = match (self.in_distances.is_empty(), self.out_distances.is_empty()) {
            (true, _) => "no in-class distances",
            (_, true) => "no out-of-class distances",
            _ => return Ok(()),
        };
        Err(Error::DegenerateClass {
            class_id: self.class_id,
            reason: reason.into(),
        })
    }
}

/// Conformity scores of every class model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistanceTable {
    pub rows: Vec<ClassDistances>,
}

impl DistanceTable {
    pub fn row(&self, class_id: usize) -> Option<&ClassDistances> {
        self.rows.iter().find(|r| r.class_id == class_id)
    }

    pub fn total_in(&self) -> usize {
        self.rows.iter().map(ClassDistances::n_in).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub class_id: usize,
    pub tau: f64,
    /// Always `tpr - fpr`.
    pub j_value: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub mode: SelectionMode,
    /// Size of the kept prefix of the class's sorted in-class list.
    pub kept_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoudenPoint {
    pub tau: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub j: f64,
    /// In-class distances `<= tau`.
    pub in_count: usize,
    /// Out-of-class distances `<= tau`.
    pub out_count: usize,
}

#[inline]
fn rate(count: usize, total: usize) -> f64 {
    count as f64 / total as f64
}

/// `(TPR, FPR)` at `tau`, counting `d <= tau` on both sides.
pub fn compute_rates(row: &ClassDistances, tau: f64) -> Result<(f64, f64)> {
    row.require_both()?;
    let tp = row.in_distances.partition_point(|&(_, d)| d <= tau);
    let fp = row.out_distances.partition_point(|&d| d <= tau);
    Ok((rate(tp, row.n_in()), rate(fp, row.n_out())))
}

/// `J` at every distinct in-class distance, by one merged pass over the two sorted lists.
pub fn youden_curve(row: &ClassDistances) -> Result<Vec<YoudenPoint>> {
    row.require_both()?;
    let (n_in, n_out) = (row.n_in(), row.n_out());
    let outs = &row.out_distances;
    let mut curve = Vec::new();
    let mut j = 0usize;
    for (i, &(_, tau)) in row.in_distances.iter().enumerate() {
        if i + 1 < n_in && row.in_distances[i + 1].1 == tau {
            continue;
        }
        while j < n_out && outs[j] <= tau {
            j += 1;
        }
        let (tpr, fpr) = (rate(i + 1, n_in), rate(j, n_out));
        curve.push(YoudenPoint {
            tau,
            tpr,
            fpr,
            j: tpr - fpr,
            in_count: i + 1,
            out_count: j,
        });
    }
    Ok(curve)
}

/// Orders two curve points by exact `J`, compared as integers to avoid rounding ties.
fn cmp_exact_j(a: &YoudenPoint, b: &YoudenPoint, n_in: usize, n_out: usize) -> Ordering {
    let key = |p: &YoudenPoint| p.in_count as i128 * n_out as i128 - p.out_count as i128 * n_in as i128;
    key(a).cmp(&key(b))
}

/// The in-class distance maximising `J`; among equal `J`, the largest `τ`.
pub fn select_adaptive_threshold(row: &ClassDistances) -> Result<ThresholdResult> {
    let curve = youden_curve(row)?;
    let (n_in, n_out) = (row.n_in(), row.n_out());
    let best = curve
        .iter()
        .reduce(|best, p| {
            if cmp_exact_j(p, best, n_in, n_out) != Ordering::Less {
                p
            } else {
                best
            }
        })
        .expect("curve has at least one point");
    Ok(ThresholdResult {
        class_id: row.class_id,
        tau: best.tau,
        j_value: best.j,
        tpr: best.tpr,
        fpr: best.fpr,
        mode: SelectionMode::Adaptive,
        kept_count: best.in_count,
    })
}

/// `max(1, round_half_up((1 - alpha) * n))`, capped at `n`.
pub fn fixed_keep_count(n: usize, alpha: f64) -> usize {
    // the small offset absorbs representation error in (1 - alpha) * n at exact halves
    let raw = ((1.0 - alpha) * n as f64 + 0.5 + 1e-9).floor() as usize;
    raw.clamp(1, n.max(1))
}

/// Keeps the `(1 - alpha)` share of closest in-class samples; ties at the
/// boundary go to the lower sample index.
pub fn select_fixed_threshold(row: &ClassDistances, alpha: f64) -> Result<ThresholdResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("pruning ratio {alpha} must lie in (0, 1)")));
    }
    if row.in_distances.is_empty() {
        return Err(Error::DegenerateClass {
            class_id: row.class_id,
            reason: "no in-class distances".into(),
        });
    }
    let kept_count = fixed_keep_count(row.n_in(), alpha);
    let tau = row.in_distances[kept_count - 1].1;
    let tpr = rate(row.in_distances.partition_point(|&(_, d)| d <= tau), row.n_in());
    let fpr = if row.out_distances.is_empty() {
        0.0
    } else {
        rate(row.out_distances.partition_point(|&d| d <= tau), row.n_out())
    };
    Ok(ThresholdResult {
        class_id: row.class_id,
        tau,
        j_value: tpr - fpr,
        tpr,
        fpr,
        mode: SelectionMode::Fixed,
        kept_count,
    })
}
