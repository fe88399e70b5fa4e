//! Observation encoding: per-BS SINRs, own RB share and per-BS loads.

use crate::channel;
use crate::error::{Error, Result};

/// dB span mapped onto [-1, 1] for the SINR entries.
pub const SINR_DB_SCALE: f64 = 50.0;

/// Normalized observation of length `2m + 1`:
/// `[sinr_1..sinr_m, own_rb, load_1..load_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Turns raw UE measurements into a [`StateVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateEncoder {
    pub num_bs: usize,
    pub num_ue: usize,
    pub rb_per_bs: u32,
    pub noise_dbm: f64,
    pub interference: bool,
}

impl StateEncoder {
    pub fn dim(&self) -> usize {
        2 * self.num_bs + 1
    }

    /// `rxp_dbm` is the received power from each BS, `own_rb` the mean RBs
    /// per TTI the UE got last epoch and `loads` the broadcast load table.
    pub fn build_state(&self, rxp_dbm: &[f64], own_rb: f64, loads: &[usize]) -> Result<StateVector> {
        if rxp_dbm.len() != self.num_bs || loads.len() != self.num_bs {
            return Err(Error::Shape(format!(
                "expected {} BS measurements, got {} powers and {} loads",
                self.num_bs,
                rxp_dbm.len(),
                loads.len()
            )));
        }
        if !own_rb.is_finite() || own_rb < 0.0 {
            return Err(Error::InvalidInput(format!("own rb {own_rb}")));
        }
        let sinrs = channel::sinr_all(rxp_dbm, self.noise_dbm, self.interference)?;
        let mut v = Vec::with_capacity(self.dim());
        v.extend(
            sinrs
                .iter()
                .map(|&s| (channel::linear_to_db(s) / SINR_DB_SCALE).clamp(-1.0, 1.0)),
        );
        v.push((own_rb / f64::from(self.rb_per_bs)).min(1.0));
        v.extend(loads.iter().map(|&l| (l as f64 / self.num_ue as f64).min(1.0)));
        Ok(StateVector(v))
    }
}
