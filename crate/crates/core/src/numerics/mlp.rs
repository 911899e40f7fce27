//! Feed-forward network with rectifier hidden layers and a linear output.
//!
//! Weights are stored `(out_dim, in_dim)` row-major. Forward passes record the
//! per-layer inputs and pre-activations in a [`ForwardCache`], which
//! [`MlpParams::backward`] consumes to produce exact gradients.

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::matrix::{axpy, DenseMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub(crate) weight: DenseMatrix,
    pub(crate) bias: Vec<f64>,
}

impl Layer {
    pub fn new(weight: DenseMatrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::shape("layer bias", weight.rows(), bias.len()));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric("layer bias".into()));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: DenseMatrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
        }
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn weight(&self) -> &DenseMatrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }
}

/// Parameters of the embedding network. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Layer>,
}

impl MlpParams {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shape(
                    format!("layer {} input", k + 1),
                    pair[0].out_dim(),
                    pair[1].in_dim(),
                ));
            }
        }
        if layers.iter().any(|l| l.in_dim() == 0 || l.out_dim() == 0) {
            return Err(Error::Config("layer dimensions must be positive".into()));
        }
        Ok(Self { layers })
    }

    /// All-zero network with the given layer widths `[d_in, h_1, ..., d_emb]`.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config("need input and output dimension".into()));
        }
        Self::new(dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect())
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init_uniform<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut params = Self::zeros(dims)?;
        for layer in &mut params.layers {
            let limit = (6.0 / (layer.in_dim() + layer.out_dim()) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit)
                .map_err(|e| Error::Config(format!("init range: {e}")))?;
            for w in layer.weight.values_mut() {
                *w = dist.sample(rng);
            }
        }
        Ok(params)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Layer widths `[d_in, h_1, ..., d_emb]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Layer::out_dim));
        dims
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim(), l.out_dim()))
                .collect(),
        }
    }

    pub fn same_shape(&self, other: &MlpParams) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.in_dim() == b.in_dim() && a.out_dim() == b.out_dim())
    }

    pub fn fill_zero(&mut self) {
        for l in &mut self.layers {
            l.weight.values_mut().fill(0.0);
            l.bias.fill(0.0);
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.values().len() + l.bias.len())
            .sum()
    }

    /// Every parameter, layer by layer, weights before biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weight.values());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    /// Inverse of [`MlpParams::to_flat`].
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::shape("flat parameters", self.num_params(), flat.len()));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("flat parameters".into()));
        }
        let mut rest = flat;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weight.values().len());
            l.weight.values_mut().copy_from_slice(w);
            let (b, tail) = tail.split_at(l.bias.len());
            l.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    pub fn new_cache(&self) -> ForwardCache {
        ForwardCache {
            inputs: self.layers.iter().map(|l| vec![0.0; l.in_dim()]).collect(),
            pre: self.layers.iter().map(|l| vec![0.0; l.out_dim()]).collect(),
            delta: self.layers.iter().map(|l| vec![0.0; l.out_dim()]).collect(),
            dims: self.dims(),
        }
    }

    /// Runs the network, filling `cache`. The embedding is `cache.embedding()`.
    pub fn forward_into(&self, input: &[f64], cache: &mut ForwardCache) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::shape("layer 0 input", self.input_dim(), input.len()));
        }
        if cache.dims != self.dims() {
            return Err(Error::State("forward cache built for another network".into()));
        }
        cache.inputs[0].copy_from_slice(input);
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer
                .weight
                .affine_into(&cache.inputs[k], &layer.bias, &mut cache.pre[k])?;
            if k < last {
                let next = &mut cache.inputs[k + 1];
                for (dst, &z) in next.iter_mut().zip(&cache.pre[k]) {
                    *dst = z.max(0.0);
                }
            }
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let mut cache = self.new_cache();
        self.forward_into(input, &mut cache)?;
        Ok((cache.embedding().to_vec(), cache))
    }

    /// Adds `dL/dW` for the cached forward pass into `grads`.
    pub fn accumulate_backward(
        &self,
        cache: &mut ForwardCache,
        grad_embedding: &[f64],
        grads: &mut MlpParams,
    ) -> Result<()> {
        if cache.dims != self.dims() {
            return Err(Error::State("forward cache built for another network".into()));
        }
        if !grads.same_shape(self) {
            return Err(Error::State("gradient buffer shape differs from network".into()));
        }
        if grad_embedding.len() != self.output_dim() {
            return Err(Error::shape(
                "embedding gradient",
                self.output_dim(),
                grad_embedding.len(),
            ));
        }
        let last = self.layers.len() - 1;
        cache.delta[last].copy_from_slice(grad_embedding);
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let g = &mut grads.layers[k];
            let delta = &cache.delta[k];
            let input = &cache.inputs[k];
            for (i, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    axpy(d, input, g.weight.row_mut(i));
                    g.bias[i] += d;
                }
            }
            if k > 0 {
                let (lower, upper) = cache.delta.split_at_mut(k);
                let below = &mut lower[k - 1];
                below.fill(0.0);
                for (i, &d) in upper[0].iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, layer.weight.row(i), below);
                    }
                }
                for (b, &z) in below.iter_mut().zip(&cache.pre[k - 1]) {
                    if z <= 0.0 {
                        *b = 0.0;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn backward(&self, cache: &ForwardCache, grad_embedding: &[f64]) -> Result<MlpParams> {
        let mut grads = self.zeros_like();
        let mut cache = cache.clone();
        self.accumulate_backward(&mut cache, grad_embedding, &mut grads)?;
        Ok(grads)
    }

    pub(crate) fn check_finite(&self, what: &str) -> Result<()> {
        for (k, l) in self.layers.iter().enumerate() {
            if l.weight.values().iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("{what}, layer {k}")));
            }
        }
        Ok(())
    }
}

/// Per-layer inputs and pre-activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
    dims: Vec<usize>,
}

impl ForwardCache {
    pub fn embedding(&self) -> &[f64] {
        &self.pre[self.pre.len() - 1]
    }

    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }

    pub fn layer_inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }
}
