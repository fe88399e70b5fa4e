//! Cellular load-balancing testbed.
//!
//! Every UE runs its own deep Q-learning agent that picks a serving base
//! station from its measured SINRs, its last RB share and the broadcast BS
//! loads. A controller validates and executes the resulting handovers each
//! epoch, and a MAX-SINR policy serves as the load-blind baseline.
//!
//! * [`channel`]: UMa-NLOS path loss, received power, SINR.
//! * [`simcore`]: base stations, commuter traces, round-robin scheduling.
//! * [`agent`]: the per-UE Q-network, replay memory and training.
//! * [`coordinator`]: load table, handover validation, epoch protocol.
//! * [`baseline`]: MAX-SINR association.
//! * [`harness`]: experiment sweeps and report files.

pub mod agent;
pub mod baseline;
pub mod channel;
pub mod coordinator;
pub mod error;
pub mod harness;
pub mod seed;
pub mod simcore;

pub use error::{Error, Result};
