//! Small dense feedforward networks in double precision.
//!
//! Weights are stored row-major (`out_dim x in_dim`) per layer. Batches are
//! slices of input vectors; internally every layer's activations are kept as
//! one flat `batch x dim` buffer.

mod adam;
mod checkpoint;
mod gradcheck;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_network, save_network, FORMAT_VERSION};
pub use gradcheck::{finite_diff_check, finite_diff_input_check, relative_error, Loss};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `y`.
    #[inline]
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            activation,
        }
    }
}

/// Builds the spec list for an MLP with `hidden` widths, one activation for
/// every hidden layer and another for the output layer.
pub fn mlp_specs(
    in_dim: usize,
    hidden: &[usize],
    out_dim: usize,
    hidden_act: Activation,
    out_act: Activation,
) -> Vec<LayerSpec> {
    let mut dims = Vec::with_capacity(hidden.len() + 2);
    dims.push(in_dim);
    dims.extend_from_slice(hidden);
    dims.push(out_dim);
    let last = dims.len() - 2;
    dims.windows(2)
        .enumerate()
        .map(|(k, w)| LayerSpec::new(w[0], w[1], if k == last { out_act } else { hidden_act }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    /// Row-major `out_dim x in_dim`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.in_dim + col]
    }

    fn forward_into(&self, x: &[f64], batch: usize, pre: &mut Vec<f64>, post: &mut Vec<f64>) {
        pre.clear();
        post.clear();
        pre.reserve(batch * self.out_dim);
        post.reserve(batch * self.out_dim);
        for xn in x.chunks_exact(self.in_dim) {
            for (row, &b) in self.weights.chunks_exact(self.in_dim).zip(&self.biases) {
                let z = b + row.iter().zip(xn).map(|(w, v)| w * v).sum::<f64>();
                pre.push(z);
                post.push(self.activation.apply(z));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "checkpoint::NetworkRecord",
    into = "checkpoint::NetworkRecord"
)]
pub struct Network {
    layers: Vec<Layer>,
}

/// Per-layer pre-activations and activations from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    /// `acts[0]` is the input, `acts[k + 1]` the output of layer `k`.
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.batch
    }

    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Gradients with the same layout as a [`Network`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    /// Flat iteration in the canonical parameter order (per layer: weights, then biases).
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn matches(&self, net: &Network) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.len() == l.weights.len() && g.biases.len() == l.biases.len()
            })
    }
}

fn check_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Config("network needs at least one layer".into()));
    }
    for (k, s) in specs.iter().enumerate() {
        if s.in_dim == 0 || s.out_dim == 0 {
            return Err(Error::Config(format!("layer {k} has a zero dimension")));
        }
    }
    for (k, pair) in specs.windows(2).enumerate() {
        if pair[0].out_dim != pair[1].in_dim {
            return Err(Error::Config(format!(
                "layer {k} outputs {} values but layer {} expects {}",
                pair[0].out_dim,
                k + 1,
                pair[1].in_dim
            )));
        }
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases.
pub fn init_network(specs: &[LayerSpec], seed: u64) -> Result<Network> {
    check_chain(specs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = specs
        .iter()
        .map(|s| {
            let limit = (6.0 / (s.in_dim + s.out_dim) as f64).sqrt();
            let weights = (0..s.in_dim * s.out_dim)
                .map(|_| rng.random_range(-limit..=limit))
                .collect();
            Layer {
                in_dim: s.in_dim,
                out_dim: s.out_dim,
                activation: s.activation,
                weights,
                biases: vec![0.0; s.out_dim],
            }
        })
        .collect();
    Ok(Network { layers })
}

impl Network {
    /// Assembles a network from explicit layers, checking shapes and finiteness.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let specs: Vec<_> = layers.iter().map(Layer::spec).collect();
        check_chain(&specs)?;
        for (k, l) in layers.iter().enumerate() {
            if l.weights.len() != l.in_dim * l.out_dim || l.biases.len() != l.out_dim {
                return Err(Error::Config(format!(
                    "layer {k}: declared {}x{} but has {} weights and {} biases",
                    l.out_dim,
                    l.in_dim,
                    l.weights.len(),
                    l.biases.len()
                )));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::Config(format!(
                    "layer {k} has non-finite parameters"
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn same_shape(&self, other: &Network) -> bool {
        self.specs() == other.specs()
    }

    fn flatten_input(&self, input: &[Vec<f64>]) -> Result<Vec<f64>> {
        let d = self.in_dim();
        let mut flat = Vec::with_capacity(input.len() * d);
        for (n, x) in input.iter().enumerate() {
            if x.len() != d {
                return Err(Error::Domain(format!(
                    "input {n} has {} features, network expects {d}",
                    x.len()
                )));
            }
            flat.extend_from_slice(x);
        }
        Ok(flat)
    }

    /// Evaluates a batch and keeps what [`Network::backward`] needs.
    pub fn forward(&self, input: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, ForwardCache)> {
        let cache = self.forward_cache(input)?;
        let out = cache
            .output()
            .chunks_exact(self.out_dim())
            .map(<[f64]>::to_vec)
            .collect();
        Ok((out, cache))
    }

    pub fn forward_cache(&self, input: &[Vec<f64>]) -> Result<ForwardCache> {
        let batch = input.len();
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        acts.push(self.flatten_input(input)?);
        for layer in &self.layers {
            let mut z = Vec::new();
            let mut y = Vec::new();
            layer.forward_into(acts.last().unwrap(), batch, &mut z, &mut y);
            pre.push(z);
            acts.push(y);
        }
        Ok(ForwardCache { batch, acts, pre })
    }

    /// Single-input evaluation without a cache.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim() {
            return Err(Error::Domain(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.in_dim()
            )));
        }
        let mut cur = x.to_vec();
        let (mut z, mut y) = (Vec::new(), Vec::new());
        for layer in &self.layers {
            layer.forward_into(&cur, 1, &mut z, &mut y);
            std::mem::swap(&mut cur, &mut y);
        }
        Ok(cur)
    }

    /// Reverse-mode gradients of a scalar loss given `d_out = dL/d(output)`
    /// for every batch row. Parameter gradients are summed over the batch;
    /// input gradients are returned per row.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_out: &[Vec<f64>],
    ) -> Result<(Gradients, Vec<Vec<f64>>)> {
        if cache.acts.len() != self.layers.len() + 1
            || cache
                .acts
                .iter()
                .zip(std::iter::once(self.in_dim()).chain(self.layers.iter().map(|l| l.out_dim)))
                .any(|(a, d)| a.len() != cache.batch * d)
        {
            return Err(Error::Domain(
                "forward cache does not match this network".into(),
            ));
        }
        if d_out.len() != cache.batch {
            return Err(Error::Domain(format!(
                "got {} output gradients for a batch of {}",
                d_out.len(),
                cache.batch
            )));
        }
        let out_dim = self.out_dim();
        let mut delta = Vec::with_capacity(cache.batch * out_dim);
        for g in d_out {
            if g.len() != out_dim {
                return Err(Error::Domain(format!(
                    "output gradient has {} entries, network outputs {out_dim}",
                    g.len()
                )));
            }
            delta.extend_from_slice(g);
        }

        let mut grads = Gradients::zeros_like(self);
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let (z, y, x) = (&cache.pre[k], &cache.acts[k + 1], &cache.acts[k]);
            for ((d, &zi), &yi) in delta.iter_mut().zip(z).zip(y) {
                *d *= layer.activation.derivative(zi, yi);
            }
            let g = &mut grads.layers[k];
            let mut d_in = vec![0.0; cache.batch * layer.in_dim];
            for ((dn, xn), din) in delta
                .chunks_exact(layer.out_dim)
                .zip(x.chunks_exact(layer.in_dim))
                .zip(d_in.chunks_exact_mut(layer.in_dim))
            {
                for (o, &d) in dn.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    g.biases[o] += d;
                    let row = o * layer.in_dim..(o + 1) * layer.in_dim;
                    for ((gw, &w), (&xi, di)) in g.weights[row.clone()]
                        .iter_mut()
                        .zip(&layer.weights[row])
                        .zip(xn.iter().zip(din.iter_mut()))
                    {
                        *gw += d * xi;
                        *di += d * w;
                    }
                }
            }
            delta = d_in;
        }
        let d_input = delta
            .chunks_exact(self.in_dim())
            .map(<[f64]>::to_vec)
            .collect();
        Ok((grads, d_input))
    }
}

impl Layer {
    pub fn spec(&self) -> LayerSpec {
        LayerSpec::new(self.in_dim, self.out_dim, self.activation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(weights: Vec<f64>, biases: Vec<f64>, in_dim: usize, act: Activation) -> Network {
        let out_dim = biases.len();
        Network::from_layers(vec![Layer {
            in_dim,
            out_dim,
            activation: act,
            weights,
            biases,
        }])
        .unwrap()
    }

    #[test]
    fn init_bounds_and_determinism() {
        let specs = [LayerSpec::new(2, 1, Activation::Identity)];
        for seed in 0..20 {
            let net = init_network(&specs, seed).unwrap();
            let l = &net.layers()[0];
            assert_eq!(l.weights.len(), 2);
            assert!(l.weights.iter().all(|w| w.abs() <= 2f64.sqrt() + 1e-15));
            assert_eq!(l.biases, vec![0.0]);
            assert_eq!(net, init_network(&specs, seed).unwrap());
        }
    }

    #[test]
    fn init_rejects_broken_chain() {
        let specs = [
            LayerSpec::new(2, 4, Activation::Relu),
            LayerSpec::new(3, 1, Activation::Identity),
        ];
        assert!(matches!(init_network(&specs, 0), Err(Error::Config(_))));
    }

    #[test]
    fn mlp_specs_chain() {
        let s = mlp_specs(2, &[64, 64], 1, Activation::Relu, Activation::Tanh);
        assert_eq!(
            s,
            vec![
                LayerSpec::new(2, 64, Activation::Relu),
                LayerSpec::new(64, 64, Activation::Relu),
                LayerSpec::new(64, 1, Activation::Tanh),
            ]
        );
    }

    #[test]
    fn forward_examples() {
        let id = single(
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0],
            2,
            Activation::Identity,
        );
        assert_eq!(
            id.forward(&[vec![3.0, -1.0]]).unwrap().0,
            vec![vec![3.0, -1.0]]
        );

        let relu = single(
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0],
            2,
            Activation::Relu,
        );
        assert_eq!(
            relu.forward(&[vec![-5.0, 2.0]]).unwrap().0,
            vec![vec![0.0, 2.0]]
        );
        assert_eq!(relu.predict(&[-5.0, 2.0]).unwrap(), vec![0.0, 2.0]);

        let tanh = single(vec![0.0; 6], vec![0.0; 2], 3, Activation::Tanh);
        assert_eq!(tanh.predict(&[9.0, -4.0, 1.0]).unwrap(), vec![0.0, 0.0]);

        assert!(matches!(id.forward(&[vec![1.0]]), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_layer_gradients() {
        // y = W x, L = sum(y): dL/dW_ij = x_j, dL/dx_j = sum_i W_ij.
        let w = vec![1.0, 2.0, 3.0, -4.0, 5.0, -6.0];
        let net = single(w, vec![0.5, -0.5], 3, Activation::Identity);
        let x = vec![0.3, -1.2, 2.0];
        let (_, cache) = net.forward(std::slice::from_ref(&x)).unwrap();
        let (g, dx) = net.backward(&cache, &[vec![1.0, 1.0]]).unwrap();
        assert_eq!(g.layers[0].weights, [x.clone(), x].concat());
        assert_eq!(g.layers[0].biases, vec![1.0, 1.0]);
        assert_eq!(dx, vec![vec![1.0 - 4.0, 2.0 + 5.0, 3.0 - 6.0]]);
    }

    #[test]
    fn zero_upstream_gradient_gives_zeros() {
        let net = init_network(
            &mlp_specs(2, &[8], 1, Activation::Tanh, Activation::Identity),
            3,
        )
        .unwrap();
        let (_, cache) = net.forward(&[vec![0.1, 0.2], vec![-0.4, 0.9]]).unwrap();
        let (g, dx) = net.backward(&cache, &[vec![0.0], vec![0.0]]).unwrap();
        assert!(g.values().all(|&v| v == 0.0));
        assert!(dx.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_rejects_mismatched_shapes() {
        let net = init_network(
            &mlp_specs(2, &[4], 1, Activation::Relu, Activation::Identity),
            1,
        )
        .unwrap();
        let other = init_network(
            &mlp_specs(3, &[4], 1, Activation::Relu, Activation::Identity),
            1,
        )
        .unwrap();
        let (_, cache) = other.forward(&[vec![0.0, 0.0, 0.0]]).unwrap();
        assert!(net.backward(&cache, &[vec![1.0]]).is_err());
        let (_, cache) = net.forward(&[vec![0.0, 0.0]]).unwrap();
        assert!(net.backward(&cache, &[vec![1.0, 2.0]]).is_err());
        assert!(net.backward(&cache, &[vec![1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn forward_is_pure() {
        let net = init_network(
            &mlp_specs(2, &[16, 16], 1, Activation::Relu, Activation::Tanh),
            9,
        )
        .unwrap();
        let x = vec![vec![0.25, -0.75]];
        let a = net.forward(&x).unwrap().0;
        let b = net.forward(&x).unwrap().0;
        assert_eq!(a, b);
        assert_eq!(a[0], net.predict(&x[0]).unwrap());
    }
}
