//! Synthetic downlink massive-MIMO scenes, their compressed-sensing form, and
//! channel estimation with any of the solvers.
//!
//! The channel is built in the angular domain: unitary DFT bases at both
//! ends and a few transmit-angle bins shared by every receive antenna, with
//! complex normal gains.

mod estimate;
mod scene;

pub use estimate::{
    estimate_channel, real_problem, stopping_rule, ChannelEstimate, ChannelSolver, EstimateConfig,
    GammaPolicy,
};
pub use scene::{
    dft_matrix, generate_pilot, generate_scene, generate_scene_with_pilot, nmse,
    pilot_sensing_matrix, ChannelScene, CsForm, NoiseLevel, SceneParams,
};
