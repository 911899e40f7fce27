//! Coreset assembly: one model per class, trained and thresholded
//! independently, then unioned.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FeatureDataset;
use crate::error::{Error, Result};
use crate::hypersphere::{score_distances, train_class_model, TrainConfig};
use crate::thresholding::{
    compute_rates, select_adaptive_threshold, select_fixed_threshold, ClassDistances, DistanceTable,
    SelectionMode, ThresholdResult,
};

pub const BUDGET_RULE: &str =
    "farthest-first round-robin across classes; an add-on to per-class thresholding, not part of it";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PruneMode {
    Adaptive,
    Fixed { alpha: f64 },
}

impl PruneMode {
    pub fn selection_mode(self) -> SelectionMode {
        match self {
            PruneMode::Adaptive => SelectionMode::Adaptive,
            PruneMode::Fixed { .. } => SelectionMode::Fixed,
        }
    }

    pub fn alpha(self) -> Option<f64> {
        match self {
            PruneMode::Adaptive => None,
            PruneMode::Fixed { alpha } => Some(alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSelection {
    pub threshold: ThresholdResult,
    /// Kept sample indices, ascending.
    pub kept: Vec<usize>,
    pub warning: Option<String>,
}

/// Settings echoed into every coreset file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub hidden: usize,
    pub hidden_layers: usize,
    pub emb_dim: usize,
    pub alpha: Option<f64>,
}

impl RunConfig {
    pub fn new(train: &TrainConfig, mode: PruneMode) -> Self {
        Self {
            seed: train.seed,
            epochs: train.epochs,
            lr: train.lr,
            batch_size: train.batch_size,
            hidden: train.hidden,
            hidden_layers: train.hidden_layers,
            emb_dim: train.emb_dim,
            alpha: mode.alpha(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetInfo {
    pub fraction: f64,
    pub max_samples: usize,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoresetResult {
    pub mode: PruneMode,
    pub n_samples: usize,
    /// One entry per class, in class-id order.
    pub classes: Vec<ClassSelection>,
    pub config: RunConfig,
    pub budget: Option<BudgetInfo>,
}

impl CoresetResult {
    pub fn total_kept(&self) -> usize {
        self.classes.iter().map(|c| c.kept.len()).sum()
    }

    /// `1 - |S| / N`
    pub fn alpha_realized(&self) -> f64 {
        1.0 - self.total_kept() as f64 / self.n_samples as f64
    }

    /// The union of per-class keeps, ascending.
    pub fn kept_indices(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.classes.iter().flat_map(|c| c.kept.iter().copied()).collect();
        all.sort_unstable();
        all
    }

    pub fn thresholds(&self) -> Vec<ThresholdResult> {
        self.classes.iter().map(|c| c.threshold).collect()
    }

    /// Checks that every kept index is in range, carries its class label, and appears once.
    pub fn validate_against(&self, ds: &FeatureDataset) -> Result<()> {
        if self.n_samples != ds.len() {
            return Err(Error::Argument(format!(
                "coreset built for {} samples, dataset has {}",
                self.n_samples,
                ds.len()
            )));
        }
        let mut seen = HashSet::new();
        for c in &self.classes {
            for &i in &c.kept {
                if i >= ds.len() {
                    return Err(Error::Argument(format!("kept index {i} out of range {}", ds.len())));
                }
                if ds.label(i) != c.threshold.class_id {
                    return Err(Error::Argument(format!(
                        "sample {i} kept for class {} but labelled {}",
                        c.threshold.class_id,
                        ds.label(i)
                    )));
                }
                if !seen.insert(i) {
                    return Err(Error::Argument(format!("sample {i} kept twice")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CoresetFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CoresetFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Per-class outcome plus the distances it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetRun {
    pub coreset: CoresetResult,
    pub distances: DistanceTable,
    /// Mean loss per epoch for each trained class model.
    pub train_logs: Vec<Vec<f64>>,
}

fn kept_from(row: &ClassDistances, count: usize) -> Vec<usize> {
    let mut kept = row.closest(count);
    kept.sort_unstable();
    kept
}

/// Keeps every in-class sample of a class whose thresholding failed.
fn keep_all(row: &ClassDistances, mode: SelectionMode, warning: String) -> ClassSelection {
    let tau = row.in_distances().last().map_or(0.0, |&(_, d)| d);
    let (tpr, fpr) = compute_rates(row, tau).unwrap_or((if row.n_in() > 0 { 1.0 } else { 0.0 }, 0.0));
    ClassSelection {
        threshold: ThresholdResult {
            class_id: row.class_id(),
            tau,
            j_value: tpr - fpr,
            tpr,
            fpr,
            mode,
            kept_count: row.n_in(),
        },
        kept: kept_from(row, row.n_in()),
        warning: Some(warning),
    }
}

fn select_class(row: &ClassDistances, mode: PruneMode) -> ClassSelection {
    let selection_mode = mode.selection_mode();
    let all_equal = row
        .in_distances()
        .iter()
        .map(|&(_, d)| d)
        .chain(row.out_distances().iter().copied())
        .try_fold(None, |first: Option<f64>, d| match first {
            Some(f) if f != d => Err(()),
            _ => Ok(Some(d)),
        })
        .is_ok();
    if all_equal {
        return keep_all(row, selection_mode, "all distances identical; no signal to prune on".into());
    }
    let result = match mode {
        PruneMode::Adaptive => select_adaptive_threshold(row),
        PruneMode::Fixed { alpha } => select_fixed_threshold(row, alpha),
    };
    match result {
        Ok(threshold) => {
            let warning = (mode == PruneMode::Adaptive && threshold.j_value <= 0.0)
                .then(|| format!("best Youden J is {}; threshold no better than chance", threshold.j_value));
            ClassSelection {
                threshold,
                kept: kept_from(row, threshold.kept_count),
                warning,
            }
        }
        Err(e) => keep_all(row, selection_mode, format!("thresholding failed ({e}); kept every sample")),
    }
}

/// Trains, scores and thresholds every class, `workers` classes at a time.
///
/// The result is identical for every `workers >= 1`.
pub fn build_coreset_run(
    ds: &FeatureDataset,
    mode: PruneMode,
    train_cfg: &TrainConfig,
    workers: usize,
) -> Result<CoresetRun> {
    train_cfg.validate()?;
    if workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    if let PruneMode::Fixed { alpha } = mode {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha {alpha} must lie in (0, 1)")));
        }
    }
    let counts = ds.class_counts();
    if counts.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::Config("coreset selection needs at least two non-empty classes".into()));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let per_class: Vec<Result<(ClassSelection, ClassDistances, Vec<f64>)>> = pool.install(|| {
        (0..ds.num_classes())
            .into_par_iter()
            .map(|c| {
                if counts[c] == 0 {
                    let row = ClassDistances::from_labelled(c, &vec![0.0; ds.len()], ds.labels())?;
                    let sel = keep_all(&row, mode.selection_mode(), "class has no samples".into());
                    return Ok((sel, row, Vec::new()));
                }
                let model = train_class_model(ds, c, train_cfg)?;
                let row = score_distances(&model, ds)?;
                Ok((select_class(&row, mode), row, model.train_log))
            })
            .collect()
    });

    let mut classes = Vec::with_capacity(per_class.len());
    let mut rows = Vec::with_capacity(per_class.len());
    let mut train_logs = Vec::with_capacity(per_class.len());
    for r in per_class {
        let (sel, row, log) = r?;
        classes.push(sel);
        rows.push(row);
        train_logs.push(log);
    }
    Ok(CoresetRun {
        coreset: CoresetResult {
            mode,
            n_samples: ds.len(),
            classes,
            config: RunConfig::new(train_cfg, mode),
            budget: None,
        },
        distances: DistanceTable { rows },
        train_logs,
    })
}

pub fn build_coreset(
    ds: &FeatureDataset,
    mode: PruneMode,
    train_cfg: &TrainConfig,
    workers: usize,
) -> Result<CoresetResult> {
    Ok(build_coreset_run(ds, mode, train_cfg, workers)?.coreset)
}

/// Caps `|S|` at `floor(budget_fraction * N)` by repeatedly removing the
/// farthest remaining sample of each class in turn, never emptying a class.
pub fn enforce_global_budget(
    result: &CoresetResult,
    distances: &DistanceTable,
    budget_fraction: f64,
) -> Result<CoresetResult> {
    if !(budget_fraction > 0.0 && budget_fraction < 1.0) {
        return Err(Error::Config(format!("budget fraction {budget_fraction} must lie in (0, 1)")));
    }
    let budget = (budget_fraction * result.n_samples as f64).floor() as usize;
    let live = result.classes.iter().filter(|c| !c.kept.is_empty()).count();
    if budget < live {
        return Err(Error::Config(format!(
            "budget of {budget} samples cannot keep one sample in each of {live} classes"
        )));
    }

    // kept lists in ascending distance order
    let mut ordered: Vec<Vec<(usize, f64)>> = Vec::with_capacity(result.classes.len());
    for c in &result.classes {
        let row = distances.row(c.threshold.class_id).ok_or_else(|| {
            Error::Argument(format!("no distances for class {}", c.threshold.class_id))
        })?;
        let kept: HashSet<usize> = c.kept.iter().copied().collect();
        let list: Vec<(usize, f64)> = row.in_distances().iter().copied().filter(|(i, _)| kept.contains(i)).collect();
        if list.len() != c.kept.len() {
            return Err(Error::Argument(format!(
                "kept samples of class {} are missing from its distance row",
                c.threshold.class_id
            )));
        }
        ordered.push(list);
    }

    let mut total: usize = ordered.iter().map(Vec::len).sum();
    'rounds: while total > budget {
        let mut dropped = false;
        for list in ordered.iter_mut() {
            if total <= budget {
                break 'rounds;
            }
            if list.len() > 1 {
                list.pop();
                total -= 1;
                dropped = true;
            }
        }
        if !dropped {
            break;
        }
    }

    let mut out = result.clone();
    for ((sel, list), row) in out.classes.iter_mut().zip(&ordered).zip(
        result
            .classes
            .iter()
            .map(|c| distances.row(c.threshold.class_id).expect("checked above")),
    ) {
        if list.len() == sel.kept.len() {
            continue;
        }
        let tau = list.last().map_or(0.0, |&(_, d)| d);
        let t = &mut sel.threshold;
        t.tau = tau;
        t.kept_count = list.len();
        if let Ok((tpr, fpr)) = compute_rates(row, tau) {
            t.tpr = tpr;
            t.fpr = fpr;
            t.j_value = tpr - fpr;
        }
        let mut kept: Vec<usize> = list.iter().map(|&(i, _)| i).collect();
        kept.sort_unstable();
        sel.kept = kept;
    }
    out.budget = Some(BudgetInfo {
        fraction: budget_fraction,
        max_samples: budget,
        rule: BUDGET_RULE.into(),
    });
    Ok(out)
}

/// Mean and population standard deviation of the per-class thresholds.
pub fn radii_statistics(thresholds: &[ThresholdResult]) -> Result<(f64, f64)> {
    if thresholds.is_empty() {
        return Err(Error::Argument("radii statistics need at least one threshold".into()));
    }
    let n = thresholds.len() as f64;
    let mean = thresholds.iter().map(|t| t.tau).sum::<f64>() / n;
    let var = thresholds.iter().map(|t| (t.tau - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassEntry {
    class_id: usize,
    tau: f64,
    j: f64,
    tpr: f64,
    fpr: f64,
    kept: Vec<usize>,
    warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CoresetFile {
    mode: SelectionMode,
    alpha_realized: f64,
    n_samples: usize,
    total_kept: usize,
    classes: Vec<ClassEntry>,
    config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    budget: Option<BudgetInfo>,
}

impl From<&CoresetResult> for CoresetFile {
    fn from(r: &CoresetResult) -> Self {
        Self {
            mode: r.mode.selection_mode(),
            alpha_realized: r.alpha_realized(),
            n_samples: r.n_samples,
            total_kept: r.total_kept(),
            classes: r
                .classes
                .iter()
                .map(|c| ClassEntry {
                    class_id: c.threshold.class_id,
                    tau: c.threshold.tau,
                    j: c.threshold.j_value,
                    tpr: c.threshold.tpr,
                    fpr: c.threshold.fpr,
                    kept: c.kept.clone(),
                    warning: c.warning.clone(),
                })
                .collect(),
            config: r.config,
            budget: r.budget.clone(),
        }
    }
}

impl TryFrom<CoresetFile> for CoresetResult {
    type Error = Error;

    fn try_from(f: CoresetFile) -> Result<Self> {
        let mode = match (f.mode, f.config.alpha) {
            (SelectionMode::Adaptive, _) => PruneMode::Adaptive,
            (SelectionMode::Fixed, Some(alpha)) => PruneMode::Fixed { alpha },
            (SelectionMode::Fixed, None) => {
                return Err(Error::Format {
                    offset: 0,
                    message: "fixed-mode coreset without config.alpha".into(),
                })
            }
        };
        let total: usize = f.classes.iter().map(|c| c.kept.len()).sum();
        if total != f.total_kept || f.n_samples == 0 {
            return Err(Error::Format {
                offset: 0,
                message: format!("total_kept {} disagrees with class lists ({total})", f.total_kept),
            });
        }
        let classes = f
            .classes
            .into_iter()
            .map(|c| ClassSelection {
                threshold: ThresholdResult {
                    class_id: c.class_id,
                    tau: c.tau,
                    j_value: c.j,
                    tpr: c.tpr,
                    fpr: c.fpr,
                    mode: f.mode,
                    kept_count: c.kept.len(),
                },
                kept: c.kept,
                warning: c.warning,
            })
            .collect();
        Ok(CoresetResult {
            mode,
            n_samples: f.n_samples,
            classes,
            config: f.config,
            budget: f.budget,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_gaussian_mixture;

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            batch_size: 8,
            lr: 1e-3,
            seed: 1,
            hidden: 8,
            hidden_layers: 1,
            emb_dim: 4,
        }
    }

    fn manual(rows: Vec<ClassDistances>, n: usize) -> (CoresetResult, DistanceTable) {
        let classes = rows
            .iter()
            .map(|r| ClassSelection {
                threshold: ThresholdResult {
                    class_id: r.class_id(),
                    tau: r.in_distances().last().unwrap().1,
                    j_value: 1.0,
                    tpr: 1.0,
                    fpr: 0.0,
                    mode: SelectionMode::Adaptive,
                    kept_count: r.n_in(),
                },
                kept: kept_from(r, r.n_in()),
                warning: None,
            })
            .collect();
        let result = CoresetResult {
            mode: PruneMode::Adaptive,
            n_samples: n,
            classes,
            config: RunConfig::new(&tiny_cfg(), PruneMode::Adaptive),
            budget: None,
        };
        (result, DistanceTable { rows })
    }

    fn two_class_table() -> (CoresetResult, DistanceTable) {
        let r0 = ClassDistances::new(0, (0..6).map(|i| (i, i as f64)).collect(), vec![10.0]).unwrap();
        let r1 = ClassDistances::new(1, (6..10).map(|i| (i, (10 - i) as f64)).collect(), vec![10.0]).unwrap();
        manual(vec![r0, r1], 20)
    }

    #[test]
    fn fixed_mode_keeps_exact_counts() {
        let ds = synth_gaussian_mixture(2, 10, 3, 4.0, 2).unwrap();
        let r = build_coreset(&ds, PruneMode::Fixed { alpha: 0.5 }, &tiny_cfg(), 2).unwrap();
        assert!(r.classes.iter().all(|c| c.kept.len() == 5));
        assert_eq!(r.total_kept(), 10);
        assert_eq!(r.alpha_realized(), 0.5);
        r.validate_against(&ds).unwrap();
    }

    #[test]
    fn single_class_is_config_error() {
        let ds = FeatureDataset::new(1, 2, vec![0.0; 3], vec![0; 3]).unwrap();
        assert!(matches!(
            build_coreset(&ds, PruneMode::Adaptive, &tiny_cfg(), 1),
            Err(Error::Config(_))
        ));
        let ds = synth_gaussian_mixture(2, 5, 2, 1.0, 0).unwrap();
        assert!(build_coreset(&ds, PruneMode::Adaptive, &tiny_cfg(), 0).is_err());
    }

    #[test]
    fn empty_class_gets_fallback_entry() {
        let base = synth_gaussian_mixture(2, 12, 3, 4.0, 4).unwrap();
        let ds = FeatureDataset::new(3, 3, base.features().to_vec(), base.labels().to_vec()).unwrap();
        let r = build_coreset(&ds, PruneMode::Adaptive, &tiny_cfg(), 1).unwrap();
        assert_eq!(r.classes.len(), 3);
        assert!(r.classes[2].kept.is_empty());
        assert!(r.classes[2].warning.is_some());
    }

    #[test]
    fn identical_distances_keep_everything() {
        let row = ClassDistances::from_values(0, &[1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        let sel = select_class(&row, PruneMode::Fixed { alpha: 0.5 });
        assert_eq!(sel.kept.len(), 2);
        assert!(sel.warning.is_some());
    }

    #[test]
    fn budget_noop_when_large_enough() {
        let (r, t) = two_class_table();
        let b = enforce_global_budget(&r, &t, 0.6).unwrap();
        assert_eq!(b.classes, r.classes);
        assert!(b.budget.is_some());
    }

    #[test]
    fn budget_round_robin() {
        let (r, t) = two_class_table();
        let b = enforce_global_budget(&r, &t, 0.4).unwrap();
        assert_eq!(b.classes[0].kept, vec![0, 1, 2, 3, 4]);
        assert_eq!(b.classes[1].kept, vec![7, 8, 9]);
        assert_eq!(b.classes[1].threshold.tau, 3.0);
        assert_eq!(b.total_kept(), 8);
    }

    #[test]
    fn budget_floor_keeps_closest() {
        let (r, t) = two_class_table();
        let b = enforce_global_budget(&r, &t, 0.1).unwrap();
        assert_eq!(b.classes[0].kept, vec![0]);
        assert_eq!(b.classes[1].kept, vec![9]);
        assert!(enforce_global_budget(&r, &t, 0.05).is_err());
    }

    #[test]
    fn radii_examples() {
        let mk = |tau| ThresholdResult {
            class_id: 0,
            tau,
            j_value: 0.0,
            tpr: 0.0,
            fpr: 0.0,
            mode: SelectionMode::Adaptive,
            kept_count: 0,
        };
        assert_eq!(radii_statistics(&[mk(2.0)]).unwrap(), (2.0, 0.0));
        assert_eq!(radii_statistics(&[mk(1.0), mk(3.0)]).unwrap(), (2.0, 1.0));
        assert!(radii_statistics(&[]).is_err());
    }

    #[test]
    fn coreset_json_round_trip_and_keys() {
        let (r, t) = two_class_table();
        let r = enforce_global_budget(&r, &t, 0.4).unwrap();
        let text = r.to_json().unwrap();
        assert_eq!(CoresetResult::from_json(&text).unwrap(), r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["mode"], "adaptive");
        assert_eq!(v["alpha_realized"], 0.6);
        assert!(v["classes"][0]["warning"].is_null());
        for key in ["class_id", "tau", "j", "tpr", "fpr", "kept"] {
            assert!(v["classes"][0].get(key).is_some(), "{key}");
        }
        assert_eq!(v["config"]["seed"], 1);
    }
}
