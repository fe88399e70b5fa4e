use std::collections::VecDeque;

use rand::Rng;

use super::state::StateVector;
use crate::error::{Error, Result};

/// One transition `(S, a, r, S')`. The reward is stored already scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: StateVector,
    pub action: usize,
    pub reward: f64,
    pub next_state: StateVector,
}

/// FIFO replay memory.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            items: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.items.iter()
    }

    /// Appends, evicting the oldest item when full.
    pub fn push(&mut self, exp: Experience) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(exp);
    }

    /// `batch_size` distinct items drawn uniformly.
    pub fn sample(&self, batch_size: usize, rng: &mut impl Rng) -> Result<Vec<&Experience>> {
        Ok(self
            .sample_indices(batch_size, rng)?
            .into_iter()
            .map(|i| &self.items[i])
            .collect())
    }

    /// Positions (oldest first = 0) of a uniform batch; same draws as
    /// [`ReplayBuffer::sample`].
    pub fn sample_indices(&self, batch_size: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
        if batch_size == 0 || self.items.len() < batch_size {
            return Err(Error::NotReady {
                have: self.items.len(),
                need: batch_size.max(1),
            });
        }
        Ok(rand::seq::index::sample(rng, self.items.len(), batch_size).into_vec())
    }

    pub fn get(&self, index: usize) -> Option<&Experience> {
        self.items.get(index)
    }
}
