//! Versioned JSON checkpoint format for networks and their optimizer state.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::mlp::{Activation, Dense, Mlp};
use crate::error::{Error, Result};

pub const NET_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activations {
    pub hidden: Activation,
    pub output: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatLayers {
    /// Row-major `out × in` weights per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerCheckpoint {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    pub first: FlatLayers,
    pub second: FlatLayers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetCheckpoint {
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub activations: Activations,
    #[serde(flatten)]
    pub params: FlatLayers,
    pub optimizer: Option<OptimizerCheckpoint>,
}

fn flatten(layers: &[Dense]) -> FlatLayers {
    FlatLayers {
        weights: layers.iter().map(|l| l.weight.iter().copied().collect()).collect(),
        biases: layers.iter().map(|l| l.bias.to_vec()).collect(),
    }
}

fn unflatten(sizes: &[usize], flat: &FlatLayers) -> Result<Vec<Dense>> {
    let n = sizes.len().saturating_sub(1);
    if flat.weights.len() != n || flat.biases.len() != n {
        return Err(Error::Shape {
            context: "checkpoint layer count",
            expected: n,
            actual: flat.weights.len(),
        });
    }
    sizes
        .windows(2)
        .zip(flat.weights.iter().zip(&flat.biases))
        .map(|(w, (wv, bv))| {
            let weight = Array2::from_shape_vec((w[1], w[0]), wv.clone()).map_err(|_| Error::Shape {
                context: "checkpoint weight",
                expected: w[0] * w[1],
                actual: wv.len(),
            })?;
            if bv.len() != w[1] {
                return Err(Error::Shape {
                    context: "checkpoint bias",
                    expected: w[1],
                    actual: bv.len(),
                });
            }
            Ok(Dense {
                weight,
                bias: Array1::from(bv.clone()),
            })
        })
        .collect()
}

impl NetCheckpoint {
    pub fn capture(net: &Mlp, optimizer: Option<&AdamState>) -> Self {
        Self {
            version: NET_FORMAT_VERSION,
            layer_sizes: net.layer_sizes(),
            activations: Activations {
                hidden: Activation::Relu,
                output: net.output_activation,
            },
            params: flatten(&net.layers),
            optimizer: optimizer.map(|o| OptimizerCheckpoint {
                lr: o.lr,
                beta1: o.beta1,
                beta2: o.beta2,
                epsilon: o.epsilon,
                step: o.step,
                first: flatten(&o.first),
                second: flatten(&o.second),
            }),
        }
    }

    pub fn restore(&self) -> Result<(Mlp, Option<AdamState>)> {
        if self.version != NET_FORMAT_VERSION {
            return Err(Error::Manifest(format!(
                "unsupported network format version {} (expected {NET_FORMAT_VERSION})",
                self.version
            )));
        }
        if self.activations.hidden != Activation::Relu {
            return Err(Error::Manifest("only relu hidden layers are supported".into()));
        }
        let net = Mlp {
            layers: unflatten(&self.layer_sizes, &self.params)?,
            output_activation: self.activations.output,
        };
        let opt = self
            .optimizer
            .as_ref()
            .map(|o| -> Result<AdamState> {
                Ok(AdamState {
                    lr: o.lr,
                    beta1: o.beta1,
                    beta2: o.beta2,
                    epsilon: o.epsilon,
                    step: o.step,
                    first: unflatten(&self.layer_sizes, &o.first)?,
                    second: unflatten(&self.layer_sizes, &o.second)?,
                })
            })
            .transpose()?;
        Ok((net, opt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{AdamHyper, Gradients};

    #[test]
    fn json_round_trip_is_exact() {
        let mut net = Mlp::new(&[5, 7, 3], Activation::Tanh, 42).unwrap();
        let mut opt = AdamState::new(&net, AdamHyper::default());
        let mut g = Gradients::zeros_like(&net);
        g.layers[0].weight.fill(0.123456789);
        opt.step(&mut net, &g);

        let ck = NetCheckpoint::capture(&net, Some(&opt));
        let text = serde_json::to_string(&ck).unwrap();
        let back: NetCheckpoint = serde_json::from_str(&text).unwrap();
        let (net2, opt2) = back.restore().unwrap();
        assert_eq!(net2, net);
        assert_eq!(opt2.unwrap(), opt);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let net = Mlp::new(&[2, 2], Activation::Identity, 0).unwrap();
        let mut ck = NetCheckpoint::capture(&net, None);
        ck.version = 99;
        assert!(matches!(ck.restore(), Err(Error::Manifest(_))));
    }

    #[test]
    fn truncated_weights_are_rejected() {
        let net = Mlp::new(&[2, 3, 1], Activation::Identity, 0).unwrap();
        let mut ck = NetCheckpoint::capture(&net, None);
        ck.params.weights[0].pop();
        assert!(matches!(ck.restore(), Err(Error::Shape { .. })));
    }
}
