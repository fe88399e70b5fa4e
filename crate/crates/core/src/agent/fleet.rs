//! One [`DqnAgent`] per UE behind the [`AttachmentPolicy`] interface.

use super::dqn::{DqnAgent, Hyperparams, RewardMode};
use super::replay::Experience;
use super::state::{StateEncoder, StateVector};
use crate::coordinator::{AttachmentPolicy, Observation};
use crate::error::{Error, Result};
use crate::simcore::world::UeOutcome;

pub struct DqnFleet {
    agents: Vec<DqnAgent>,
    encoder: StateEncoder,
    pending: Vec<Option<(StateVector, usize)>>,
    epsilon: f64,
    training: bool,
    epoch_seconds: f64,
    nonfinite_checks: u64,
}

impl DqnFleet {
    pub fn new(encoder: StateEncoder, hp: &Hyperparams, master_seed: u64, epoch_seconds: f64) -> Result<Self> {
        let agents = (0..encoder.num_ue)
            .map(|ue| DqnAgent::new(ue, encoder.dim(), encoder.num_bs, hp.clone(), master_seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            pending: vec![None; agents.len()],
            agents,
            encoder,
            epsilon: hp.epsilon,
            training: true,
            epoch_seconds,
            nonfinite_checks: 0,
        })
    }

    pub fn agents(&self) -> &[DqnAgent] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [DqnAgent] {
        &mut self.agents
    }

    pub fn encoder(&self) -> &StateEncoder {
        &self.encoder
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    pub fn set_training(&mut self, training: bool) {
        self.training = training;
    }

    /// Forget in-flight decisions, e.g. between episodes.
    pub fn reset_episode(&mut self) {
        self.pending.iter_mut().for_each(|p| *p = None);
    }

    /// Number of post-update finiteness checks performed so far.
    pub fn finiteness_checks(&self) -> u64 {
        self.nonfinite_checks
    }

    pub fn all_parameters_finite(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.online().all_finite() && a.target().all_finite())
    }

    fn reward(&self, outcome: &UeOutcome) -> f64 {
        let bps = match self.agents[outcome.ue].hp.reward_mode {
            RewardMode::Rate => outcome.rate_bps,
            RewardMode::DemandCapped => outcome.rate_bps.min(outcome.demand_bits / self.epoch_seconds),
        };
        bps * self.agents[outcome.ue].hp.reward_scale
    }

    fn encode(&self, obs: &Observation<'_>) -> Result<StateVector> {
        self.encoder.build_state(obs.rxp_dbm, obs.own_rb, &obs.loads.loads)
    }
}

impl AttachmentPolicy for DqnFleet {
    fn name(&self) -> &str {
        "dqn"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<usize> {
        let state = self.encode(obs)?;
        let agent = self.agents.get_mut(obs.ue).ok_or(Error::UnknownUe(obs.ue))?;
        let action = agent.act(&state, self.epsilon)?;
        self.pending[obs.ue] = Some((state, action));
        Ok(action)
    }

    fn feedback(&mut self, outcome: &UeOutcome, next: &Observation<'_>) -> Result<()> {
        let Some((state, action)) = self.pending.get_mut(outcome.ue).and_then(Option::take) else {
            return Ok(());
        };
        if !self.training {
            return Ok(());
        }
        let next_state = self.encode(next)?;
        let reward = self.reward(outcome);
        self.agents[outcome.ue].remember(Experience {
            state,
            action,
            reward,
            next_state,
        });
        Ok(())
    }

    fn train(&mut self) -> Result<()> {
        if !self.training {
            return Ok(());
        }
        for agent in &mut self.agents {
            // train_step rejects any update that leaves a non-finite weight.
            if agent.train_step()?.is_some() {
                self.nonfinite_checks += 1;
            }
        }
        Ok(())
    }
}
