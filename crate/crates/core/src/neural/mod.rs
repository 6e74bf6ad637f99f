//! From-scratch trainable networks: a four-layer tanh MLP and a single-layer
//! tanh RNN, with backpropagation, Adam and a binary weight format.

mod adam;
mod io;
mod mlp;
mod params;
mod rnn;

pub use adam::{adam_train, AdamConfig};
pub use io::{
    decode_network, encode_network, load_network, load_params_mlp, load_params_rnn, save_network,
    save_params_mlp, save_params_rnn, Network, KIND_MLP, KIND_RNN, WEIGHT_MAGIC,
};
pub use mlp::{mlp_forward, mlp_loss_and_grad, MlpActivations, MlpParams, TrainingPair};
pub use params::{scale_to_unit_rms, ParamSet};
pub use rnn::{rnn_forward, rnn_loss_and_grad, RnnParams, RnnTrace, SequencePair};

pub(crate) use io::Reader;
