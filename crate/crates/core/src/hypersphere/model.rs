use serde::{Deserialize, Serialize};

use super::batches::BalancedSampler;
use super::loss::loss_and_grad_into;
use crate::data::FeatureDataset;
use crate::error::{Error, Result};
use crate::numerics::{adam_step, norm, AdamState, MlpParams};
use crate::rng::class_rng;
use crate::thresholding::ClassDistances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Even; half in-class, half out-of-class.
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub hidden: usize,
    pub hidden_layers: usize,
    pub emb_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 128,
            lr: 1e-4,
            seed: 0,
            hidden: 128,
            hidden_layers: 2,
            emb_dim: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size < 2 || !self.batch_size.is_multiple_of(2) {
            return Err(Error::Config(format!("batch size {} must be even and >= 2", self.batch_size)));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be finite and >= 0", self.lr)));
        }
        if self.emb_dim == 0 || (self.hidden_layers > 0 && self.hidden == 0) {
            return Err(Error::Config("network widths must be positive".into()));
        }
        Ok(())
    }

    /// `[d_in, hidden, ..., hidden, emb_dim]`
    pub fn layer_dims(&self, input_dim: usize) -> Vec<usize> {
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat_n(self.hidden, self.hidden_layers));
        dims.push(self.emb_dim);
        dims
    }
}

/// Embedding network for one class; conformity is the embedding norm.
#[derive(Debug, Clone, PartialEq)]
pub struct HypersphereModel {
    pub class_id: usize,
    pub params: MlpParams,
    /// Mean batch loss per epoch.
    pub train_log: Vec<f64>,
}

impl HypersphereModel {
    pub fn new(class_id: usize, params: MlpParams) -> Self {
        Self {
            class_id,
            params,
            train_log: Vec::new(),
        }
    }

    /// `‖φ(x)‖` for every sample of `ds`, in index order.
    pub fn embedding_norms(&self, ds: &FeatureDataset) -> Result<Vec<f64>> {
        if ds.dim() != self.params.input_dim() {
            return Err(Error::shape("model input", self.params.input_dim(), ds.dim()));
        }
        let mut cache = self.params.new_cache();
        let mut x = vec![0.0; ds.dim()];
        (0..ds.len())
            .map(|i| {
                ds.sample_f64_into(i, &mut x);
                self.params.forward_into(&x, &mut cache)?;
                let d = norm(cache.embedding());
                if d.is_finite() {
                    Ok(d)
                } else {
                    Err(Error::Numeric(format!("embedding norm of sample {i}")))
                }
            })
            .collect()
    }
}

/// Trains the class-`class_id` network with Adam on balanced batches.
///
/// Initialisation and batching draw from one generator seeded by
/// `(config.seed, class_id)`, so the result does not depend on which worker
/// runs it.
pub fn train_class_model(ds: &FeatureDataset, class_id: usize, config: &TrainConfig) -> Result<HypersphereModel> {
    config.validate()?;
    if ds.num_classes() < 2 {
        return Err(Error::Config("training needs at least two classes".into()));
    }
    let sampler = BalancedSampler::new(ds, class_id, config.batch_size)?;
    let mut rng = class_rng(config.seed, class_id);
    let mut params = MlpParams::init_uniform(&config.layer_dims(ds.dim()), &mut rng)?;
    let mut adam = AdamState::new(&params, config.lr)?;

    let mut grads = params.zeros_like();
    let mut cache = params.new_cache();
    let mut x = vec![0.0; ds.dim()];
    let mut g_emb = vec![0.0; config.emb_dim];
    let mut train_log = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let diverged = || Error::Training { class_id, epoch };
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for batch in sampler.epoch(&mut rng) {
            let scale = 1.0 / batch.len() as f64;
            grads.fill_zero();
            let mut batch_loss = 0.0;
            for &(i, y) in &batch {
                ds.sample_f64_into(i, &mut x);
                params.forward_into(&x, &mut cache)?;
                let loss = loss_and_grad_into(cache.embedding(), y, scale, &mut g_emb).map_err(|_| diverged())?;
                batch_loss += loss;
                params.accumulate_backward(&mut cache, &g_emb, &mut grads)?;
            }
            let mean = batch_loss * scale;
            if !mean.is_finite() {
                return Err(diverged());
            }
            adam_step(&mut params, &grads, &mut adam).map_err(|e| match e {
                Error::Numeric(_) => diverged(),
                other => other,
            })?;
            loss_sum += mean;
            batches += 1;
        }
        train_log.push(loss_sum / batches as f64);
    }

    Ok(HypersphereModel {
        class_id,
        params,
        train_log,
    })
}

/// Conformity scores of every sample under the class model, split into
/// in-class (labelled `model.class_id`) and out-of-class lists.
pub fn score_distances(model: &HypersphereModel, ds: &FeatureDataset) -> Result<ClassDistances> {
    let norms = model.embedding_norms(ds)?;
    ClassDistances::from_labelled(model.class_id, &norms, ds.labels())
}
