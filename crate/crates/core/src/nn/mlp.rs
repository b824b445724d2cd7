use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Fully connected layer, `weight` is `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }
}

/// Multilayer perceptron with ReLU hidden layers and a configurable head.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub output_activation: Activation,
}

/// Per-layer activations retained by a forward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    /// `inputs[l]` is the batch fed into layer `l`.
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl Cache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }
}

/// Parameter gradients laid out like [`Mlp::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Dense {
                    weight: Array2::zeros(l.weight.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weight *= s;
            l.bias *= s;
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weight.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }
}

impl Mlp {
    /// Builds a network with uniform `±1/√fan_in` initialization.
    pub fn new(layer_sizes: &[usize], output_activation: Activation, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {layer_sizes:?}")));
        }
        let mut rng = seed::rng(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weight = Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-bound..bound));
                let bias = Array1::from_shape_fn(fan_out, |_| rng.random_range(-bound..bound));
                Dense { weight, bias }
            })
            .collect();
        Ok(Self {
            layers,
            output_activation,
        })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs()];
        sizes.extend(self.layers.iter().map(Dense::outputs));
        sizes
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map(Dense::outputs).unwrap_or(0)
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            Activation::Relu
        }
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Cache)> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        let cache = self.forward_batch(x)?;
        Ok((cache.output.row(0).to_vec(), cache))
    }

    /// Inference without retaining a cache.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input).map(|(y, _)| y)
    }

    /// Batched forward pass; rows are samples.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Cache> {
        if x.ncols() != self.input_len() {
            return Err(Error::Shape {
                context: "mlp input",
                expected: self.input_len(),
                actual: x.ncols(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let z = a.dot(&layer.weight.t()) + &layer.bias;
            let act = self.activation(l);
            let next = z.mapv(|v| act.apply(v));
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        Ok(Cache {
            inputs,
            pre,
            output: a,
        })
    }

    /// Reverse-mode pass. Returns parameter gradients and the gradient with
    /// respect to the network input, for the loss whose output gradient is
    /// `output_grad` (same shape as the cached output).
    pub fn backward(&self, cache: &Cache, output_grad: ArrayView2<f64>) -> Result<(Gradients, Array2<f64>)> {
        if cache.inputs.len() != self.layers.len() {
            return Err(Error::Shape {
                context: "cache layer count",
                expected: self.layers.len(),
                actual: cache.inputs.len(),
            });
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if cache.inputs[l].ncols() != layer.inputs() || cache.pre[l].ncols() != layer.outputs() {
                return Err(Error::Shape {
                    context: "stale cache",
                    expected: layer.inputs(),
                    actual: cache.inputs[l].ncols(),
                });
            }
        }
        if output_grad.dim() != cache.output.dim() {
            return Err(Error::Shape {
                context: "output gradient",
                expected: cache.output.len(),
                actual: output_grad.len(),
            });
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = output_grad.to_owned();
        for l in (0..self.layers.len()).rev() {
            let act = self.activation(l);
            let z = &cache.pre[l];
            let out = if l + 1 == self.layers.len() {
                &cache.output
            } else {
                &cache.inputs[l + 1]
            };
            let mut dz = upstream;
            ndarray::Zip::from(&mut dz)
                .and(z)
                .and(out)
                .for_each(|g, &zv, &av| *g *= act.derivative(zv, av));
            let weight = dz.t().dot(&cache.inputs[l]);
            let bias = dz.sum_axis(Axis(0));
            upstream = dz.dot(&self.layers[l].weight);
            grads.push(Dense { weight, bias });
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, upstream))
    }

    /// Polyak averaging `self ← τ·source + (1−τ)·self`.
    pub fn soft_update_from(&mut self, source: &Mlp, tau: f64) {
        for (t, s) in self.layers.iter_mut().zip(&source.layers) {
            ndarray::Zip::from(&mut t.weight)
                .and(&s.weight)
                .for_each(|u, &th| *u = tau * th + (1.0 - tau) * *u);
            ndarray::Zip::from(&mut t.bias)
                .and(&s.bias)
                .for_each(|u, &th| *u = tau * th + (1.0 - tau) * *u);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend(l.weight.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }
}
