use crate::error::{Error, Result};

/// `N` labelled feature vectors of dimension `d` in `C` classes.
///
/// Features are kept as `f32` (the on-disk precision) and widened on access
/// by the training code.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    dim: usize,
    num_classes: usize,
    features: Vec<f32>,
    labels: Vec<u32>,
    name: Option<String>,
}

impl FeatureDataset {
    pub fn new(dim: usize, num_classes: usize, features: Vec<f32>, labels: Vec<u32>) -> Result<Self> {
        if dim == 0 || num_classes == 0 {
            return Err(Error::Config("feature dim and class count must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::Config("dataset must contain at least one sample".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::shape("feature matrix", labels.len() * dim, features.len()));
        }
        if let Some(i) = labels.iter().position(|&l| l as usize >= num_classes) {
            return Err(Error::Config(format!(
                "label {} of sample {i} is not below class count {num_classes}",
                labels[i]
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("feature {} of sample {}", i % dim, i / dim)));
        }
        Ok(Self {
            dim,
            num_classes,
            features,
            labels,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    #[inline]
    pub fn sample(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Sample `i` widened to `f64`, written into `out`.
    #[inline]
    pub fn sample_f64_into(&self, i: usize, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(self.sample(i)) {
            *o = f64::from(v);
        }
    }

    /// Indices of the samples labelled `class_id`, ascending.
    pub fn class_indices(&self, class_id: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l as usize == class_id)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Same features, new labels.
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::shape("label vector", self.len(), labels.len()));
        }
        let mut out = Self::new(self.dim, self.num_classes, self.features.clone(), labels)?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// The samples at `indices`, in the given order, keeping the class count.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Argument(format!("sample index {i} out of range {}", self.len())));
            }
            features.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Self::new(self.dim, self.num_classes, features, labels)
    }
}
