use std::collections::VecDeque;

use super::config::SimConfig;
use super::scheduler;
use super::trace::{Trace, TraceRow, Zone};
use crate::channel::{self, LinkGeometry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UserEquipment {
    pub id: usize,
    pub position: (f64, f64),
    pub zone: Zone,
    pub serving_bs: usize,
    pub demand_bits: f64,
    /// Mean RBs per TTI received over the last epoch.
    pub rb_obtained_last_epoch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStationState {
    pub id: usize,
    pub position: (f64, f64),
    pub rb_budget: u32,
    /// Round-robin service order; exactly the attached UEs.
    pub rr_queue: VecDeque<usize>,
}

impl BaseStationState {
    pub fn load(&self) -> usize {
        self.rr_queue.len()
    }

    pub fn attached(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.rr_queue.iter().copied().collect();
        ids.sort_unstable();
        ids
    }

    pub fn detach(&mut self, ue: usize) -> bool {
        match self.rr_queue.iter().position(|&u| u == ue) {
            Some(i) => {
                self.rr_queue.remove(i);
                true
            }
            None => false,
        }
    }
}

/// Per-UE outcome of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct UeOutcome {
    pub ue: usize,
    pub serving_bs: usize,
    pub rbs_per_tti: f64,
    pub sinr: f64,
    pub rate_bps: f64,
    pub achieved_bits: f64,
    pub demand_bits: f64,
    pub qos: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub ues: Vec<UeOutcome>,
    pub loads: Vec<usize>,
}

impl EpochReport {
    /// Bits actually delivered: achieved capacity capped by demand.
    pub fn delivered_bits(&self) -> f64 {
        self.ues.iter().map(|u| u.achieved_bits.min(u.demand_bits)).sum()
    }

    pub fn mean_qos(&self) -> f64 {
        if self.ues.is_empty() {
            return 1.0;
        }
        self.ues.iter().map(|u| u.qos).sum::<f64>() / self.ues.len() as f64
    }
}

/// Shannon rate over `n_rb` resource blocks.
pub fn achieved_rate(n_rb: f64, sinr: f64, rb_bandwidth_hz: f64) -> Result<f64> {
    if !sinr.is_finite() || sinr < 0.0 {
        return Err(Error::InvalidInput(format!("sinr {sinr}")));
    }
    if !(n_rb >= 0.0) {
        return Err(Error::InvalidInput(format!("rb count {n_rb}")));
    }
    Ok(n_rb * rb_bandwidth_hz * (1.0 + sinr).log2())
}

/// Fraction of the demand that was served; 1 when nothing was asked for.
pub fn qos_ratio(achieved_bits: f64, demand_bits: f64) -> f64 {
    if demand_bits <= 0.0 {
        1.0
    } else {
        achieved_bits.min(demand_bits) / demand_bits
    }
}

/// The simulated network: UEs, base stations and the epoch cursor.
#[derive(Debug, Clone)]
pub struct World {
    pub cfg: SimConfig,
    pub ues: Vec<UserEquipment>,
    pub bss: Vec<BaseStationState>,
    next_epoch: usize,
}

impl World {
    /// Places UEs at their epoch-0 trace rows and attaches each to its
    /// strongest BS (queues ordered by UE id).
    pub fn new(cfg: SimConfig, trace: &Trace) -> Result<Self> {
        cfg.validate()?;
        trace.check_against(&cfg)?;
        let bss = cfg
            .bs_positions
            .iter()
            .enumerate()
            .map(|(id, &position)| BaseStationState {
                id,
                position,
                rb_budget: cfg.rb_per_bs,
                rr_queue: VecDeque::new(),
            })
            .collect();
        let mut world = Self {
            cfg,
            ues: Vec::new(),
            bss,
            next_epoch: 0,
        };
        for ue in 0..trace.num_ue() {
            let row = trace.row(ue, 0);
            let mut u = UserEquipment {
                id: ue,
                position: row.position(),
                zone: Zone::of_ue(ue),
                serving_bs: 0,
                demand_bits: row.demand_bits as f64,
                rb_obtained_last_epoch: 0.0,
            };
            let rxp = world.rxp_at(u.position)?;
            let best = argmax(&rxp);
            u.serving_bs = best;
            world.bss[best].rr_queue.push_back(ue);
            world.ues.push(u);
        }
        Ok(world)
    }

    pub fn num_bs(&self) -> usize {
        self.bss.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ues.len()
    }

    /// Epoch index the next call to [`World::run_epoch`] expects.
    pub fn next_epoch(&self) -> usize {
        self.next_epoch
    }

    pub fn loads(&self) -> Vec<usize> {
        self.bss.iter().map(BaseStationState::load).collect()
    }

    pub fn rxp_at(&self, position: (f64, f64)) -> Result<Vec<f64>> {
        self.bss
            .iter()
            .map(|bs| {
                let d2d = (position.0 - bs.position.0).hypot(position.1 - bs.position.1);
                let geom = LinkGeometry::new(d2d, self.cfg.h_bs_m, self.cfg.h_ut_m, self.cfg.fc_ghz)?;
                channel::rx_power(self.cfg.tx_power_dbm, channel::path_loss_uma_nlos(&geom)?)
            })
            .collect()
    }

    /// Received power from every BS at the UE's current position, in dBm.
    pub fn rxp(&self, ue: usize) -> Result<Vec<f64>> {
        self.rxp_at(self.ues[ue].position)
    }

    pub fn sinrs(&self, ue: usize) -> Result<Vec<f64>> {
        channel::sinr_all(&self.rxp(ue)?, self.cfg.noise_dbm, self.cfg.interference)
    }

    /// Moves `ue` to the tail of `target`'s queue. Returns false when it is
    /// already served there.
    pub fn reattach(&mut self, ue: usize, target: usize) -> Result<bool> {
        if ue >= self.ues.len() {
            return Err(Error::UnknownUe(ue));
        }
        if target >= self.bss.len() {
            return Err(Error::IndexOutOfRange {
                index: target,
                len: self.bss.len(),
            });
        }
        let current = self.ues[ue].serving_bs;
        if current == target {
            return Ok(false);
        }
        if !self.bss[current].detach(ue) {
            return Err(Error::Invariant(format!("ue {ue} missing from bs {current} queue")));
        }
        self.bss[target].rr_queue.push_back(ue);
        self.ues[ue].serving_bs = target;
        Ok(true)
    }

    /// Checks that the queues partition the UEs and agree with each UE's
    /// recorded serving BS.
    pub fn check_partition(&self) -> Result<()> {
        let mut seen = vec![false; self.ues.len()];
        for bs in &self.bss {
            for &ue in &bs.rr_queue {
                if ue >= seen.len() || seen[ue] {
                    return Err(Error::Invariant(format!("ue {ue} queued twice or unknown")));
                }
                seen[ue] = true;
                if self.ues[ue].serving_bs != bs.id {
                    return Err(Error::Invariant(format!(
                        "ue {ue} queued at bs {} but records bs {}",
                        bs.id, self.ues[ue].serving_bs
                    )));
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(ue) => Err(Error::Invariant(format!("ue {ue} attached nowhere"))),
            None => Ok(()),
        }
    }

    /// Runs one decision epoch with attachments frozen.
    ///
    /// `rows` are the trace rows for this epoch (one per UE, any order).
    /// Positions and demands are updated first, then each BS's round-robin
    /// schedule over the epoch's TTIs is totalled in closed form.
    pub fn run_epoch(&mut self, rows: &[TraceRow]) -> Result<EpochReport> {
        let epoch = self.next_epoch;
        if rows.len() != self.ues.len() {
            return Err(Error::TraceInvalid(format!(
                "epoch {epoch}: {} rows for {} UEs",
                rows.len(),
                self.ues.len()
            )));
        }
        for row in rows {
            if row.epoch != epoch {
                return Err(Error::TraceInvalid(format!(
                    "expected epoch {epoch}, got row for epoch {}",
                    row.epoch
                )));
            }
            let ue = self.ues.get_mut(row.ue).ok_or(Error::UnknownUe(row.ue))?;
            ue.position = row.position();
            ue.demand_bits = row.demand_bits as f64;
        }

        let ttis = self.cfg.ttis_per_epoch();
        let mut rbs_per_tti = vec![0.0; self.ues.len()];
        for bs in &mut self.bss {
            let totals = scheduler::allocate_epoch(bs.rr_queue.len(), bs.rb_budget, self.cfg.ues_per_tti, ttis);
            for (slot, &ue) in bs.rr_queue.iter().enumerate() {
                rbs_per_tti[ue] = totals[slot].rbs as f64 / ttis as f64;
            }
            let shift = scheduler::rotation_after(bs.rr_queue.len(), self.cfg.ues_per_tti, ttis);
            bs.rr_queue.rotate_left(shift);
        }

        let secs = self.cfg.epoch_seconds();
        let mut outcomes = Vec::with_capacity(self.ues.len());
        for id in 0..self.ues.len() {
            let serving = self.ues[id].serving_bs;
            let sinr = channel::sinr(&self.rxp(id)?, serving, self.cfg.noise_dbm, self.cfg.interference)?;
            let rate = achieved_rate(rbs_per_tti[id], sinr, self.cfg.rb_bandwidth_hz)?;
            let ue = &mut self.ues[id];
            ue.rb_obtained_last_epoch = rbs_per_tti[id];
            let achieved = rate * secs;
            outcomes.push(UeOutcome {
                ue: id,
                serving_bs: serving,
                rbs_per_tti: rbs_per_tti[id],
                sinr,
                rate_bps: rate,
                achieved_bits: achieved,
                demand_bits: ue.demand_bits,
                qos: qos_ratio(achieved, ue.demand_bits),
            });
        }
        self.next_epoch += 1;
        Ok(EpochReport {
            epoch,
            ues: outcomes,
            loads: self.loads(),
        })
    }
}

/// Index of the largest entry, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}
