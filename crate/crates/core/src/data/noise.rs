use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::FeatureDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Config(format!("noise rate {rate} must lie in [0, 1]")));
        }
        Ok(Self { rate, seed })
    }

    pub fn flip_count(&self, n: usize) -> usize {
        ((self.rate * n as f64).round() as usize).min(n)
    }
}

/// Which labels were corrupted and what they were before.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseMask {
    pub rate: f64,
    pub seed: u64,
    pub flipped: Vec<usize>,
    pub original_labels: Vec<u32>,
}

impl NoiseMask {
    pub fn empty(rate: f64, seed: u64) -> Self {
        Self {
            rate,
            seed,
            flipped: Vec::new(),
            original_labels: Vec::new(),
        }
    }

    /// Per-sample corruption flags for a dataset of `n` samples.
    pub fn corrupted_flags(&self, n: usize) -> Result<Vec<bool>> {
        let mut flags = vec![false; n];
        for &i in &self.flipped {
            if i >= n {
                return Err(Error::Argument(format!("mask index {i} out of range {n}")));
            }
            flags[i] = true;
        }
        Ok(flags)
    }

    /// Writes the original labels back over the corrupted ones.
    pub fn restore(&self, corrupted: &FeatureDataset) -> Result<FeatureDataset> {
        if self.flipped.len() != self.original_labels.len() {
            return Err(Error::Argument("mask arrays are not index-aligned".into()));
        }
        let mut labels = corrupted.labels().to_vec();
        for (&i, &l) in self.flipped.iter().zip(&self.original_labels) {
            if i >= labels.len() {
                return Err(Error::Argument(format!("mask index {i} out of range {}", labels.len())));
            }
            labels[i] = l;
        }
        corrupted.with_labels(labels)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_vec_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mask: Self = serde_json::from_slice(&bytes)?;
        if mask.flipped.len() != mask.original_labels.len() {
            return Err(Error::Format {
                offset: 0,
                message: "noise mask arrays differ in length".into(),
            });
        }
        Ok(mask)
    }
}

/// Reassigns exactly `round(rate * N)` distinct, uniformly chosen samples to a
/// uniformly chosen *different* class.
pub fn inject_label_noise(ds: &FeatureDataset, spec: NoiseSpec) -> Result<(FeatureDataset, NoiseMask)> {
    let c = ds.num_classes();
    if c < 2 {
        return Err(Error::Config("label noise needs at least 2 classes".into()));
    }
    let spec = NoiseSpec::new(spec.rate, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut flipped = rand::seq::index::sample(&mut rng, ds.len(), spec.flip_count(ds.len())).into_vec();
    flipped.sort_unstable();

    let mut labels = ds.labels().to_vec();
    let mut original_labels = Vec::with_capacity(flipped.len());
    for &i in &flipped {
        let orig = labels[i];
        let shift = rng.random_range(1..c as u32);
        labels[i] = (orig + shift) % c as u32;
        original_labels.push(orig);
    }
    let mask = NoiseMask {
        rate: spec.rate,
        seed: spec.seed,
        flipped,
        original_labels,
    };
    Ok((ds.with_labels(labels)?, mask))
}

/// Targeted variant: every corrupted sample is relabelled to `target`. The
/// `round(rate * N)` victims are drawn from samples not already in `target`.
/// This is an extension beyond the uniform-flip protocol.
pub fn inject_targeted_label_noise(
    ds: &FeatureDataset,
    spec: NoiseSpec,
    target: usize,
) -> Result<(FeatureDataset, NoiseMask)> {
    if ds.num_classes() < 2 {
        return Err(Error::Config("label noise needs at least 2 classes".into()));
    }
    if target >= ds.num_classes() {
        return Err(Error::Config(format!("target class {target} out of range")));
    }
    let spec = NoiseSpec::new(spec.rate, spec.seed)?;
    let candidates: Vec<usize> = (0..ds.len()).filter(|&i| ds.label(i) != target).collect();
    let m = spec.flip_count(ds.len());
    if m > candidates.len() {
        return Err(Error::Config(format!(
            "{m} flips requested but only {} samples lie outside class {target}",
            candidates.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut flipped: Vec<usize> = rand::seq::index::sample(&mut rng, candidates.len(), m)
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    flipped.sort_unstable();
    let mut labels = ds.labels().to_vec();
    let original_labels = flipped
        .iter()
        .map(|&i| std::mem::replace(&mut labels[i], target as u32))
        .collect();
    let mask = NoiseMask {
        rate: spec.rate,
        seed: spec.seed,
        flipped,
        original_labels,
    };
    Ok((ds.with_labels(labels)?, mask))
}
