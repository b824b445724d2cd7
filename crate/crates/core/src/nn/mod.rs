//! Tiny dense-network substrate: forward, reverse-mode gradients and Adam.

mod adam;
mod checkpoint;
mod mlp;
mod normalizer;

pub use adam::{AdamHyper, AdamState};
pub use checkpoint::{Activations, FlatLayers, NetCheckpoint, OptimizerCheckpoint, NET_FORMAT_VERSION};
pub use mlp::{Activation, Cache, Dense, Gradients, Mlp};
pub use normalizer::Normalizer;
