//! Per-UE deep Q-learning.

pub mod checkpoint;
pub mod dqn;
pub mod fleet;
pub mod network;
pub mod replay;
pub mod state;

pub use dqn::{
    loss_and_gradient, select_action, sync_target, td_target, train_batch, DqnAgent, Hyperparams, RewardMode,
};
pub use fleet::DqnFleet;
pub use network::{Dense, Gradient, QNetwork};
pub use replay::{Experience, ReplayBuffer};
pub use state::{StateEncoder, StateVector};
