#![allow(dead_code)]

use rand::Rng;
use setpoint::nn::{init_network, Activation, LayerSpec, Network};

pub const ACTIVATIONS: [Activation; 3] = [Activation::Relu, Activation::Tanh, Activation::Identity];

/// A random MLP with 1-3 layers, every width in 1..=16 and random activations.
pub fn random_network<R: Rng>(rng: &mut R) -> Network {
    let depth = rng.random_range(1..=3);
    let mut dims = vec![rng.random_range(1..=16)];
    for _ in 0..depth {
        dims.push(rng.random_range(1..=16));
    }
    let specs: Vec<LayerSpec> = dims
        .windows(2)
        .map(|w| LayerSpec::new(w[0], w[1], ACTIVATIONS[rng.random_range(0..3)]))
        .collect();
    let mut net = init_network(&specs, rng.random()).unwrap();
    // Non-zero biases so relu units are not all switched at the same point.
    for l in 0..net.layers().len() {
        let n = net.layers()[l].biases.len();
        let biases: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let mut layers = net.layers().to_vec();
        layers[l].biases = biases;
        net = Network::from_layers(layers).unwrap();
    }
    net
}

pub fn random_batch<R: Rng>(rng: &mut R, dim: usize, rows: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}
