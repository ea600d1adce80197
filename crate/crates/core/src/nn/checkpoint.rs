//! JSON checkpoints: `{"layers":[{"in","out","activation","w","b"}],"format_version":1}`.
//!
//! Floats are written by `serde_json` in shortest round-trip form, so a
//! save/load cycle reproduces every finite parameter bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, Layer, Network};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct LayerRecord {
    #[serde(rename = "in")]
    in_dim: usize,
    #[serde(rename = "out")]
    out_dim: usize,
    activation: Activation,
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct NetworkRecord {
    layers: Vec<LayerRecord>,
    format_version: u32,
}

impl From<Network> for NetworkRecord {
    fn from(net: Network) -> Self {
        NetworkRecord {
            layers: net
                .layers
                .into_iter()
                .map(|l| LayerRecord {
                    in_dim: l.in_dim,
                    out_dim: l.out_dim,
                    activation: l.activation,
                    w: l.weights,
                    b: l.biases,
                })
                .collect(),
            format_version: FORMAT_VERSION,
        }
    }
}

impl TryFrom<NetworkRecord> for Network {
    type Error = String;

    fn try_from(rec: NetworkRecord) -> std::result::Result<Self, String> {
        if rec.format_version != FORMAT_VERSION {
            return Err(format!(
                "unsupported network format_version {} (expected {FORMAT_VERSION})",
                rec.format_version
            ));
        }
        if rec.layers.is_empty() {
            return Err("network has no layers".into());
        }
        for (k, l) in rec.layers.iter().enumerate() {
            if l.in_dim == 0 || l.out_dim == 0 {
                return Err(format!("layer {k}: zero dimension"));
            }
            if l.w.len() != l.in_dim * l.out_dim {
                return Err(format!(
                    "layer {k}: declared {}x{} needs {} weights, found {}",
                    l.out_dim,
                    l.in_dim,
                    l.in_dim * l.out_dim,
                    l.w.len()
                ));
            }
            if l.b.len() != l.out_dim {
                return Err(format!(
                    "layer {k}: declared out {} but found {} biases",
                    l.out_dim,
                    l.b.len()
                ));
            }
        }
        for (k, pair) in rec.layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(format!(
                    "layer {}: in {} does not match previous out {}",
                    k + 1,
                    pair[1].in_dim,
                    pair[0].out_dim
                ));
            }
        }
        let layers = rec
            .layers
            .into_iter()
            .map(|l| Layer {
                in_dim: l.in_dim,
                out_dim: l.out_dim,
                activation: l.activation,
                weights: l.w,
                biases: l.b,
            })
            .collect();
        Network::from_layers(layers).map_err(|e| e.to_string())
    }
}

impl Network {
    pub fn to_json(&self) -> Result<String> {
        if self.params().any(|p| !p.is_finite()) {
            return Err(Error::Domain(
                "cannot checkpoint a network with non-finite parameters".into(),
            ));
        }
        serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn save_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, net.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Network::from_json(&text)
}
