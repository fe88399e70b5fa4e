//! MAX-SINR association: attach to the strongest cell, ignore load.

use crate::channel::linear_to_db;
use crate::coordinator::{AttachmentPolicy, Observation};
use crate::error::{Error, Result};
use crate::simcore::world::argmax;

/// Picks the BS with the highest linear SINR (lowest index on ties).
///
/// With `hysteresis_db > 0` the UE stays on `current_bs` unless the best
/// alternative beats it by more than the margin.
pub fn max_sinr_action(sinrs: &[f64], current_bs: usize, hysteresis_db: f64) -> Result<usize> {
    if sinrs.is_empty() {
        return Err(Error::InvalidInput("no SINR measurements".into()));
    }
    if sinrs.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite SINR".into()));
    }
    if !(hysteresis_db >= 0.0) {
        return Err(Error::InvalidInput(format!("hysteresis {hysteresis_db} dB")));
    }
    let best = argmax(sinrs);
    if hysteresis_db == 0.0 || best == current_bs || current_bs >= sinrs.len() {
        return Ok(best);
    }
    if linear_to_db(sinrs[best]) - linear_to_db(sinrs[current_bs]) > hysteresis_db {
        Ok(best)
    } else {
        Ok(current_bs)
    }
}

#[derive(Debug, Clone, Default)]
pub struct MaxSinrPolicy {
    pub hysteresis_db: f64,
}

impl AttachmentPolicy for MaxSinrPolicy {
    fn name(&self) -> &str {
        "max_sinr"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<usize> {
        max_sinr_action(obs.sinrs, obs.current_bs, self.hysteresis_db)
    }
}
