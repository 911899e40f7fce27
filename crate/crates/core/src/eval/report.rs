use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::confusion::{selection_confusion, selection_confusion_by_class, SelectionConfusion};
use super::knn::knn_probe;
use crate::data::{FeatureDataset, NoiseMask};
use crate::error::{Error, Result};
use crate::pipeline::{radii_statistics, CoresetResult, RunConfig};
use crate::thresholding::SelectionMode;

pub const PROBE_NOTE: &str = "downstream accuracy is a k-NN probe on feature vectors (Euclidean, \
plurality vote), used in place of training a deep network on the selected subset";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class_id: usize,
    pub n_in: usize,
    pub kept: usize,
    pub removed_fraction: Option<f64>,
    pub tau: f64,
    pub j: f64,
    pub warning: Option<String>,
    /// Present when a noise mask was supplied.
    pub selection: Option<SelectionConfusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownstreamReport {
    pub k: usize,
    pub test_samples: usize,
    pub accuracy_coreset: f64,
    pub accuracy_full: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: SelectionMode,
    pub n_samples: usize,
    pub total_kept: usize,
    /// `1 - |S| / N`
    pub removed_fraction: f64,
    pub youden_j_mean: f64,
    pub radii_mean: f64,
    pub radii_std: f64,
    /// Pooled over all samples; `None` without a noise mask.
    pub selection: Option<SelectionConfusion>,
    pub classes: Vec<ClassReport>,
    pub downstream: Option<DownstreamReport>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Gathers the selection and downstream metrics for one coreset.
pub fn evaluate(
    ds: &FeatureDataset,
    coreset: &CoresetResult,
    mask: Option<&NoiseMask>,
    test: Option<&FeatureDataset>,
    k: usize,
) -> Result<EvalReport> {
    coreset.validate_against(ds)?;
    let thresholds = coreset.thresholds();
    let (radii_mean, radii_std) = radii_statistics(&thresholds)?;
    let youden_j_mean = thresholds.iter().map(|t| t.j_value).sum::<f64>() / thresholds.len() as f64;

    let (selection, per_class) = match mask {
        Some(m) => (
            Some(selection_confusion(coreset, m, ds.len())?),
            Some(selection_confusion_by_class(coreset, m, ds)?),
        ),
        None => (None, None),
    };
    let counts = ds.class_counts();
    let classes = coreset
        .classes
        .iter()
        .map(|c| {
            let id = c.threshold.class_id;
            let n_in = counts.get(id).copied().unwrap_or(0);
            ClassReport {
                class_id: id,
                n_in,
                kept: c.kept.len(),
                removed_fraction: (n_in > 0).then(|| 1.0 - c.kept.len() as f64 / n_in as f64),
                tau: c.threshold.tau,
                j: c.threshold.j_value,
                warning: c.warning.clone(),
                selection: per_class.as_ref().and_then(|p| p.get(id).copied()),
            }
        })
        .collect();

    let downstream = match test {
        Some(test) => {
            let subset = ds.subset(&coreset.kept_indices())?;
            Some(DownstreamReport {
                k,
                test_samples: test.len(),
                accuracy_coreset: knn_probe(&subset, test, k)?,
                accuracy_full: knn_probe(ds, test, k)?,
                note: PROBE_NOTE.into(),
            })
        }
        None => None,
    };

    Ok(EvalReport {
        mode: coreset.mode.selection_mode(),
        n_samples: ds.len(),
        total_kept: coreset.total_kept(),
        removed_fraction: coreset.alpha_realized(),
        youden_j_mean,
        radii_mean,
        radii_std,
        selection,
        classes,
        downstream,
        config: coreset.config,
    })
}

const CSV_HEADER: [&str; 15] = [
    "class_id",
    "n_in",
    "kept",
    "removed_fraction",
    "tau",
    "j",
    "tp",
    "fp",
    "tn",
    "fn",
    "tpr",
    "fpr",
    "tnr",
    "fnr",
    "warning",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn confusion_cells(c: Option<&SelectionConfusion>) -> [String; 8] {
    match c {
        Some(c) => [
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
            opt(c.tpr),
            opt(c.fpr),
            opt(c.tnr),
            opt(c.fnr),
        ],
        None => Default::default(),
    }
}

impl EvalReport {
    /// One row per class, then an `all` row with pooled values; the summary
    /// row's `tau` and `j` are the class means.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Argument(format!("csv: {e}"));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for c in &self.classes {
            let mut row = vec![
                c.class_id.to_string(),
                c.n_in.to_string(),
                c.kept.to_string(),
                opt(c.removed_fraction),
                c.tau.to_string(),
                c.j.to_string(),
            ];
            row.extend(confusion_cells(c.selection.as_ref()));
            row.push(c.warning.clone().unwrap_or_default());
            w.write_record(&row).map_err(csv_err)?;
        }
        let mut row = vec![
            "all".to_string(),
            self.n_samples.to_string(),
            self.total_kept.to_string(),
            self.removed_fraction.to_string(),
            self.radii_mean.to_string(),
            self.youden_j_mean.to_string(),
        ];
        row.extend(confusion_cells(self.selection.as_ref()));
        row.push(String::new());
        w.write_record(&row).map_err(csv_err)?;
        let bytes = w.into_inner().map_err(|e| Error::Argument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn emit_report(report: &EvalReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Json => serde_json::to_string_pretty(report)?,
        ReportFormat::Csv => report.to_csv()?,
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{inject_label_noise, synth_gaussian_mixture, synth_test_split, NoiseSpec};
    use crate::hypersphere::TrainConfig;
    use crate::pipeline::{build_coreset, PruneMode};

    fn sample_report(with_mask: bool) -> EvalReport {
        let clean = synth_gaussian_mixture(3, 20, 4, 5.0, 2).unwrap();
        let (ds, mask) = inject_label_noise(&clean, NoiseSpec::new(if with_mask { 0.1 } else { 0.0 }, 3).unwrap()).unwrap();
        let test = synth_test_split(3, 10, 4, 5.0, 2).unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 8,
            lr: 1e-3,
            seed: 4,
            hidden: 8,
            hidden_layers: 1,
            emb_dim: 3,
        };
        let coreset = build_coreset(&ds, PruneMode::Adaptive, &cfg, 1).unwrap();
        evaluate(&ds, &coreset, Some(&mask), Some(&test), 3).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample_report(true);
        let text = serde_json::to_string(&r).unwrap();
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn not_applicable_rates_are_null() {
        let r = sample_report(false);
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["selection"]["fpr"].is_null());
        assert!(v["selection"]["tnr"].is_null());
        assert!(!v["selection"]["tpr"].is_null());
    }

    #[test]
    fn csv_has_class_rows_plus_summary() {
        let r = sample_report(true);
        let text = r.to_csv().unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3 + 1);
        assert_eq!(&rows[3][0], "all");
    }

    #[test]
    fn removed_fraction_matches_kept() {
        let r = sample_report(true);
        assert_eq!(r.removed_fraction, 1.0 - r.total_kept as f64 / r.n_samples as f64);
        let sel = r.selection.unwrap();
        assert_eq!(sel.total(), r.n_samples);
    }
}
