//! Dense feed-forward networks with exact input jets and parameter gradients.

mod activation;
mod checkpoint;
pub mod jet;
mod objective;
mod params;

pub use activation::Activation;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use jet::{
    backward_batch, forward_batch, forward_jet, Jet, JetBatch, JetChannels, JetRead, JetSource, JetWrite, Tape,
};
pub use objective::{loss_gradient, loss_value, JetObjective};
pub use params::{init_params, parameter_count, InitScheme, InputScaling, NetworkParams};
