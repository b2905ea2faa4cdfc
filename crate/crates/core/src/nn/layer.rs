use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::matrix::{dot, Matrix};
use super::{init::glorot_init, Precision};
use crate::rng::SeededRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu { slope: f64 },
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::LeakyRelu { slope } => {
                if x >= 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative at pre-activation `x`. LReLU uses 1 at exactly zero.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::LeakyRelu { slope } => {
                if x >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Activation::LeakyRelu { slope } if !(slope > 0.0 && slope < 1.0) => Err(
                Error::invalid(format!("leaky relu slope must lie in (0, 1), got {slope}")),
            ),
            _ => Ok(()),
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Non-zero positions of a wide, mostly-zero row (one-hot inputs). Skipped
/// terms are exact zeros, so sums match the dense path.
fn sparse_support(x: &[f64]) -> Option<Vec<usize>> {
    if x.len() < 64 {
        return None;
    }
    let nnz = x.iter().filter(|v| **v != 0.0).count();
    (nnz * 8 <= x.len()).then(|| (0..x.len()).filter(|&i| x[i] != 0.0).collect())
}

/// Fully connected layer `y = act(W x + b)` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::shape("layer bias", weights.rows(), bias.len()));
        }
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::invalid("layer dimensions must be non-zero"));
        }
        activation.validate()?;
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights and zero bias.
    pub fn glorot(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let weights = glorot_init(fan_in, fan_out, rng)?;
        Self::new(weights, vec![0.0; fan_out], activation)
    }

    pub fn input_width(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn is_finite(&self) -> bool {
        self.weights.is_finite() && self.bias.iter().all(|b| b.is_finite())
    }
}

/// Per-layer activations kept from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    revision: u64,
    inputs: Vec<Matrix>,
    pre_activations: Vec<Matrix>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.inputs.first().map_or(0, Matrix::rows)
    }

    /// Pre-activations of layer `layer`, one row per batch element.
    pub fn pre_activation(&self, layer: usize) -> &Matrix {
        &self.pre_activations[layer]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Parameter gradients of an [`Mlp`], one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradients {
                    weights: Matrix::zeros(l.output_width(), l.input_width()),
                    bias: vec![0.0; l.output_width()],
                })
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    pub fn is_zero(&self) -> bool {
        self.buffers().iter().all(|b| b.iter().all(|&v| v == 0.0))
    }

    /// Flat views in the same order as [`Mlp::param_buffers_mut`].
    pub fn buffers(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &self.layers {
            out.push(l.weights.as_slice());
            out.push(l.bias.as_slice());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::shape("gradient layers", self.layers.len(), other.layers.len()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.add_scaled(&b.weights, 1.0)?;
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
        Ok(())
    }
}

/// A stack of dense layers. Equality compares parameters only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
    #[serde(default)]
    precision: Precision,
    #[serde(skip)]
    revision: u64,
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.precision == other.precision
    }
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].output_width() != pair[1].input_width() {
                return Err(Error::shape(
                    "layer chain",
                    pair[0].output_width(),
                    pair[1].input_width(),
                ));
            }
        }
        Ok(Self {
            layers,
            precision: Precision::F64,
            revision: 0,
        })
    }

    /// Glorot-initialized stack over `widths` (input width first). Every
    /// layer uses `hidden` except the last, which uses `output`.
    pub fn glorot(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::invalid("need at least input and output widths"));
        }
        let n = widths.len() - 1;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::glorot(w[0], w[1], act, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        for l in &mut self.layers {
            precision.round_slice(l.weights.as_mut_slice());
            precision.round_slice(&mut l.bias);
        }
        self
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Mutable access to the layers. Invalidates outstanding forward caches.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        self.revision += 1;
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].output_width()
    }

    /// Neuron counts, input width first.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_width()];
        w.extend(self.layers.iter().map(DenseLayer::output_width));
        w
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(DenseLayer::is_finite)
    }

    /// Flat mutable parameter views, `[w0, b0, w1, b1, ...]`.
    pub fn param_buffers_mut(&mut self) -> Vec<&mut [f64]> {
        self.revision += 1;
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            out.push(l.weights.as_mut_slice());
            out.push(l.bias.as_mut_slice());
        }
        out
    }

    /// Round parameters to the configured storage precision.
    pub fn apply_precision(&mut self) {
        let p = self.precision;
        if p == Precision::F64 {
            return;
        }
        for buf in self.param_buffers_mut() {
            p.round_slice(buf);
        }
    }

    fn layer_forward(&self, layer: &DenseLayer, input: &Matrix) -> (Matrix, Matrix) {
        let rows = input.rows();
        let out_w = layer.output_width();
        let mut pre = Matrix::zeros(rows, out_w);
        let mut post = Matrix::zeros(rows, out_w);
        for r in 0..rows {
            let x = input.row(r);
            let pre_row = pre.row_mut(r);
            match sparse_support(x) {
                Some(support) => {
                    for (o, p) in pre_row.iter_mut().enumerate() {
                        let w = layer.weights.row(o);
                        *p = layer.bias[o] + support.iter().map(|&i| w[i] * x[i]).sum::<f64>();
                    }
                }
                None => {
                    for (o, p) in pre_row.iter_mut().enumerate() {
                        *p = layer.bias[o] + dot(layer.weights.row(o), x);
                    }
                }
            }
            let post_row = post.row_mut(r);
            for (q, &p) in post_row.iter_mut().zip(pre.row(r)) {
                *q = self.precision.round(layer.activation.apply(p));
            }
        }
        (pre, post)
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols() != self.input_width() {
            return Err(Error::shape("network input", self.input_width(), input.cols()));
        }
        Ok(())
    }

    /// Forward pass over a batch, keeping what the backward pass needs.
    pub fn forward_batch(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(input)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut current = input.clone();
        for layer in &self.layers {
            let (pre, post) = self.layer_forward(layer, &current);
            inputs.push(current);
            pres.push(pre);
            current = post;
        }
        Ok((
            current,
            ForwardCache {
                revision: self.revision,
                inputs,
                pre_activations: pres,
            },
        ))
    }

    /// Forward pass without a cache.
    pub fn predict_batch(&self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let mut current = None;
        for layer in &self.layers {
            let (_, post) = self.layer_forward(layer, current.as_ref().unwrap_or(input));
            current = Some(post);
        }
        Ok(current.expect("at least one layer"))
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let m = Matrix::from_vec(1, input.len(), input.to_vec())?;
        let (out, cache) = self.forward_batch(&m)?;
        Ok((out.into_vec(), cache))
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        let m = Matrix::from_vec(1, input.len(), input.to_vec())?;
        Ok(self.predict_batch(&m)?.into_vec())
    }

    fn check_cache(&self, cache: &ForwardCache, upstream: &Matrix) -> Result<()> {
        if cache.revision != self.revision {
            return Err(Error::ContractViolation(format!(
                "forward cache is stale (network revision {} vs cache {})",
                self.revision, cache.revision
            )));
        }
        if cache.inputs.len() != self.layers.len() || cache.pre_activations.len() != self.layers.len()
        {
            return Err(Error::ContractViolation(format!(
                "forward cache has {} layers, network has {}",
                cache.inputs.len(),
                self.layers.len()
            )));
        }
        for (layer, (inp, pre)) in self
            .layers
            .iter()
            .zip(cache.inputs.iter().zip(&cache.pre_activations))
        {
            if inp.cols() != layer.input_width() || pre.cols() != layer.output_width() {
                return Err(Error::ContractViolation(
                    "forward cache widths do not match the network".into(),
                ));
            }
        }
        if upstream.rows() != cache.batch_size() || upstream.cols() != self.output_width() {
            return Err(Error::shape(
                "upstream gradient",
                cache.batch_size() * self.output_width(),
                upstream.rows() * upstream.cols(),
            ));
        }
        Ok(())
    }

    /// Backpropagate `upstream` (dLoss/dOutput, one row per batch element)
    /// and add the parameter gradients into `grads`. Returns dLoss/dInput
    /// when `want_input_grad` is set.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        upstream: &Matrix,
        grads: &mut Gradients,
        want_input_grad: bool,
    ) -> Result<Option<Matrix>> {
        self.check_cache(cache, upstream)?;
        if grads.layers.len() != self.layers.len() {
            return Err(Error::shape("gradient layers", self.layers.len(), grads.layers.len()));
        }
        let rows = upstream.rows();
        let mut delta = upstream.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let pre = &cache.pre_activations[idx];
            let input = &cache.inputs[idx];
            for r in 0..rows {
                for (d, &p) in delta.row_mut(r).iter_mut().zip(pre.row(r)) {
                    *d *= layer.activation.derivative(p);
                }
            }
            let g = &mut grads.layers[idx];
            for r in 0..rows {
                let x = input.row(r);
                let support = sparse_support(x);
                for (o, &d) in delta.row(r).iter().enumerate() {
                    if d != 0.0 {
                        g.bias[o] += d;
                        let gw = g.weights.row_mut(o);
                        match &support {
                            Some(idx) => idx.iter().for_each(|&i| gw[i] += d * x[i]),
                            None => {
                                for (w, &xi) in gw.iter_mut().zip(x) {
                                    *w += d * xi;
                                }
                            }
                        }
                    }
                }
            }
            if idx == 0 && !want_input_grad {
                return Ok(None);
            }
            let mut next = Matrix::zeros(rows, layer.input_width());
            for r in 0..rows {
                let next_row = next.row_mut(r);
                for (o, &d) in delta.row(r).iter().enumerate() {
                    if d != 0.0 {
                        for (n, &w) in next_row.iter_mut().zip(layer.weights.row(o)) {
                            *n += d * w;
                        }
                    }
                }
            }
            delta = next;
        }
        Ok(Some(delta))
    }

    pub fn backward_batch(&self, cache: &ForwardCache, upstream: &Matrix) -> Result<(Gradients, Matrix)> {
        let mut grads = Gradients::zeros_like(self);
        let input_grad = self
            .backward_accumulate(cache, upstream, &mut grads, true)?
            .expect("input gradient requested");
        Ok((grads, input_grad))
    }

    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let m = Matrix::from_vec(1, upstream.len(), upstream.to_vec())?;
        let (g, input_grad) = self.backward_batch(cache, &m)?;
        Ok((g, input_grad.into_vec()))
    }
}
