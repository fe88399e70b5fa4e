//! Deep Q-learning: action selection, TD targets, minibatch updates and the
//! per-UE agent that ties them together.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::network::{Gradient, QNetwork};
use super::replay::{Experience, ReplayBuffer};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::seed;
use crate::simcore::world::argmax;

/// What the agent is rewarded with each epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardMode {
    /// Achieved rate in bits/s.
    Rate,
    /// Achieved rate capped at the rate needed to meet the epoch's demand.
    DemandCapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub gamma: f64,
    pub memory_capacity: usize,
    pub batch_size: usize,
    /// Probability of acting greedily; the rest of the time the action is
    /// uniform.
    pub epsilon: f64,
    pub episodes: usize,
    /// Training steps between copies of the online net into the target net.
    pub target_sync_interval: u64,
    pub hidden: Vec<usize>,
    /// Multiplier applied to rewards (bits/s) before they are stored.
    pub reward_scale: f64,
    pub reward_mode: RewardMode,
    /// Epsilon for the last, reported episode. `None` keeps `epsilon`.
    pub eval_epsilon: Option<f64>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            gamma: 0.9,
            memory_capacity: 480,
            batch_size: 150,
            epsilon: 0.8,
            episodes: 100,
            target_sync_interval: 20,
            hidden: vec![64, 64, 32],
            reward_scale: 1e-8,
            reward_mode: RewardMode::Rate,
            eval_epsilon: None,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma {} outside [0, 1)", self.gamma));
        }
        for eps in std::iter::once(self.epsilon).chain(self.eval_epsilon) {
            if !(0.0..=1.0).contains(&eps) {
                return bad(format!("epsilon {eps} outside [0, 1]"));
            }
        }
        if self.batch_size == 0 || self.batch_size > self.memory_capacity {
            return bad(format!(
                "batch size {} must be in 1..={}",
                self.batch_size, self.memory_capacity
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {}", self.learning_rate));
        }
        if self.target_sync_interval == 0 || self.episodes == 0 {
            return bad("target_sync_interval and episodes must be positive".into());
        }
        if self.hidden.contains(&0) {
            return bad(format!("hidden widths {:?}", self.hidden));
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad(format!("reward scale {}", self.reward_scale));
        }
        Ok(())
    }

    pub fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        std::iter::once(input)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(output))
            .collect()
    }
}

/// With probability `epsilon` the greedy action (lowest index on ties),
/// otherwise a uniform one. Always draws exactly one uniform first, plus one
/// more when exploring.
pub fn select_action(net: &QNetwork, state: &StateVector, epsilon: f64, rng: &mut impl Rng) -> Result<usize> {
    let u: f64 = rng.gen();
    if u < epsilon {
        Ok(argmax(&net.forward(state.as_slice())?))
    } else {
        Ok(rng.gen_range(0..net.output_dim()))
    }
}

/// `reward + gamma * max_a Q(next_state, a | target)`.
pub fn td_target(reward: f64, next_state: &StateVector, target: &QNetwork, gamma: f64) -> Result<f64> {
    let q = target.forward(next_state.as_slice())?;
    Ok(reward + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Mean squared TD error over the batch and its gradient with respect to the
/// online parameters. Only the taken action's output carries gradient; the
/// target network is treated as a constant.
pub fn loss_and_gradient(
    net: &QNetwork,
    target: &QNetwork,
    batch: &[&Experience],
    gamma: f64,
) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty training batch".into()));
    }
    let (n, dim, m) = (batch.len(), net.input_dim(), net.output_dim());
    if target.sizes() != net.sizes() {
        return Err(Error::Shape("online and target networks differ in shape".into()));
    }
    let mut next = Vec::with_capacity(n * dim);
    for e in batch {
        if e.next_state.len() != dim {
            return Err(Error::Shape(format!("experience state length != {dim}")));
        }
        next.extend_from_slice(e.next_state.as_slice());
    }
    let q_next = target.forward_batch(&next, n);
    let best_next: Vec<f64> = q_next.chunks_exact(m).map(max_of).collect();
    loss_and_gradient_given(net, batch, &best_next, gamma)
}

fn max_of(q: &[f64]) -> f64 {
    q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// [`loss_and_gradient`] with `max_a Q(S', a | target)` already known for
/// each experience.
fn loss_and_gradient_given(
    net: &QNetwork,
    batch: &[&Experience],
    best_next: &[f64],
    gamma: f64,
) -> Result<(f64, Gradient)> {
    let (n, dim, m) = (batch.len(), net.input_dim(), net.output_dim());
    let mut xs = Vec::with_capacity(n * dim);
    for e in batch {
        if e.state.len() != dim {
            return Err(Error::Shape(format!("experience state length != {dim}")));
        }
        if e.action >= m {
            return Err(Error::IndexOutOfRange { index: e.action, len: m });
        }
        xs.extend_from_slice(e.state.as_slice());
    }
    let acts = net.forward_trace(&xs, n);
    let q = &acts[acts.len() - 1];

    let mut loss = 0.0;
    let mut d_out = vec![0.0; n * m];
    for (b, (e, &best)) in batch.iter().zip(best_next).enumerate() {
        let y = e.reward + gamma * best;
        let err = q[b * m + e.action] - y;
        loss += err * err;
        d_out[b * m + e.action] = 2.0 * err / n as f64;
    }
    loss /= n as f64;
    let grad = net.backward(&acts, d_out, n);
    Ok((loss, grad))
}

/// One gradient-descent step on the batch; returns the pre-step loss.
pub fn train_batch(
    net: &mut QNetwork,
    target: &QNetwork,
    batch: &[&Experience],
    lr: f64,
    gamma: f64,
) -> Result<f64> {
    let (loss, grad) = loss_and_gradient(net, target, batch, gamma)?;
    net.apply_gradient(&grad, lr)?;
    Ok(loss)
}

pub fn sync_target(net: &QNetwork, target: &mut QNetwork) -> Result<()> {
    target.copy_from(net)
}

/// One UE's learner. Owns its networks, memory and RNG stream outright.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub ue: usize,
    pub hp: Hyperparams,
    online: QNetwork,
    target: QNetwork,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    train_steps: u64,
    last_loss: Option<f64>,
    /// `max_a Q(S', a | target)` per memory slot, valid until the next sync.
    next_value: VecDeque<Option<f64>>,
}

impl DqnAgent {
    /// The RNG stream, and hence the initial weights, depend only on
    /// `(master_seed, ue)`.
    pub fn new(ue: usize, state_dim: usize, num_actions: usize, hp: Hyperparams, master_seed: u64) -> Result<Self> {
        hp.validate()?;
        let mut rng = seed::rng_for(master_seed, seed::stream::AGENT, ue as u64);
        let online = QNetwork::new(&hp.layer_sizes(state_dim, num_actions), &mut rng)?;
        let target = online.clone();
        Ok(Self {
            ue,
            buffer: ReplayBuffer::new(hp.memory_capacity),
            hp,
            online,
            target,
            rng,
            train_steps: 0,
            last_loss: None,
            next_value: VecDeque::new(),
        })
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.last_loss
    }

    pub fn act(&mut self, state: &StateVector, epsilon: f64) -> Result<usize> {
        select_action(&self.online, state, epsilon, &mut self.rng)
    }

    pub fn remember(&mut self, exp: Experience) {
        if self.hp.memory_capacity == 0 {
            return;
        }
        if self.next_value.len() == self.hp.memory_capacity {
            self.next_value.pop_front();
        }
        self.next_value.push_back(None);
        self.buffer.push(exp);
    }

    /// Trains on one sampled batch if the memory holds enough experience.
    /// Returns the pre-step loss, or `None` when skipped.
    ///
    /// Target values are memoised per memory slot between syncs; the target
    /// network is frozen meanwhile, so this matches [`train_batch`] exactly.
    pub fn train_step(&mut self) -> Result<Option<f64>> {
        let picks = match self.buffer.sample_indices(self.hp.batch_size, &mut self.rng) {
            Ok(p) => p,
            Err(Error::NotReady { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let batch: Vec<&Experience> = picks.iter().map(|&i| self.buffer.get(i).expect("sampled index")).collect();
        let missing: Vec<usize> = picks.iter().copied().filter(|&i| self.next_value[i].is_none()).collect();
        if !missing.is_empty() {
            let dim = self.target.input_dim();
            let mut next = Vec::with_capacity(missing.len() * dim);
            for &i in &missing {
                let s = &self.buffer.get(i).expect("sampled index").next_state;
                if s.len() != dim {
                    return Err(Error::Shape(format!("experience state length != {dim}")));
                }
                next.extend_from_slice(s.as_slice());
            }
            let q = self.target.forward_batch(&next, missing.len());
            for (&i, row) in missing.iter().zip(q.chunks_exact(self.target.output_dim())) {
                self.next_value[i] = Some(max_of(row));
            }
        }
        let best: Vec<f64> = picks.iter().map(|&i| self.next_value[i].expect("filled above")).collect();
        let (loss, grad) = loss_and_gradient_given(&self.online, &batch, &best, self.hp.gamma)?;
        self.online.apply_gradient(&grad, self.hp.learning_rate)?;
        if !self.online.all_finite() {
            return Err(Error::Invariant(format!("ue {} network diverged (loss {loss})", self.ue)));
        }
        self.train_steps += 1;
        if self.train_steps % self.hp.target_sync_interval == 0 {
            sync_target(&self.online, &mut self.target)?;
            self.next_value.iter_mut().for_each(|v| *v = None);
        }
        self.last_loss = Some(loss);
        Ok(Some(loss))
    }

    /// Replaces both networks, e.g. from a checkpoint.
    pub fn load_network(&mut self, net: QNetwork) -> Result<()> {
        self.online.copy_from(&net)?;
        self.next_value.iter_mut().for_each(|v| *v = None);
        self.target.copy_from(&net)
    }
}
