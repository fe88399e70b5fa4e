//! The discrete-time cellular environment.

pub mod config;
pub mod scheduler;
pub mod trace;
pub mod world;

pub use config::{Rect, SimConfig, Window};
pub use scheduler::{allocate_epoch, allocate_round_robin, Allocation, SlotTotals};
pub use trace::{generate_trace, load_trace, Trace, TraceRow, Zone};
pub use world::{achieved_rate, qos_ratio, BaseStationState, EpochReport, UeOutcome, UserEquipment, World};
