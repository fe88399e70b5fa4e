//! Round-robin resource-block scheduling.
//!
//! Each TTI a base station serves the first `k = min(ues_per_tti, n)` UEs of
//! its queue, splits the RB budget evenly among them (remainder RBs go one
//! each to the earliest-served) and moves them to the tail in order. That is
//! a rotation of the queue by `k`, so over many TTIs the served UEs walk a
//! linear "service stream" `p = t * k + s` whose queue slot is `p mod n` and
//! whose within-TTI rank is `p mod k`. [`allocate_epoch`] counts that stream
//! arithmetically instead of stepping TTI by TTI.

use std::collections::{BTreeMap, VecDeque};

/// RBs granted to one UE in one TTI, keyed by UE id.
pub type Allocation = BTreeMap<usize, u32>;

/// One literal TTI: allocate and rotate `queue` in place.
pub fn allocate_round_robin(
    queue: &mut VecDeque<usize>,
    rb_budget: u32,
    ues_per_tti: usize,
) -> Allocation {
    let served = ues_per_tti.min(queue.len());
    let mut grant = Allocation::new();
    if served == 0 {
        return grant;
    }
    let base = rb_budget / served as u32;
    let extra = (rb_budget % served as u32) as usize;
    for rank in 0..served {
        let ue = queue.pop_front().expect("served <= queue length");
        grant.insert(ue, base + u32::from(rank < extra));
        queue.push_back(ue);
    }
    grant
}

/// Totals for the UE in one queue slot over a run of TTIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlotTotals {
    pub rbs: u64,
    pub services: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Closed-form totals over `ttis` TTIs for a queue of `queue_len` UEs,
/// indexed by queue slot at the start of the run.
pub fn allocate_epoch(queue_len: usize, rb_budget: u32, ues_per_tti: usize, ttis: u64) -> Vec<SlotTotals> {
    let n = queue_len as u64;
    let k = ues_per_tti.min(queue_len) as u64;
    if n == 0 || k == 0 {
        return vec![SlotTotals::default(); queue_len];
    }
    let base = u64::from(rb_budget) / k;
    let extra = u64::from(rb_budget) % k;
    let stream_len = ttis * k;
    // Ranks p mod k seen by slot u repeat every k / gcd(n, k) services.
    let ranks_period = k / gcd(n, k);
    (0..n)
        .map(|slot| {
            let services = if slot < stream_len {
                (stream_len - 1 - slot) / n + 1
            } else {
                0
            };
            let bonus_in = |count: u64| (0..count).filter(|j| (slot + j * n) % k < extra).count() as u64;
            let per_period = bonus_in(ranks_period);
            let bonus = services / ranks_period * per_period + bonus_in(services % ranks_period);
            SlotTotals {
                rbs: services * base + bonus,
                services,
            }
        })
        .collect()
}

/// How far the queue rotates (towards the head) after `ttis` TTIs.
pub fn rotation_after(queue_len: usize, ues_per_tti: usize, ttis: u64) -> usize {
    if queue_len == 0 {
        return 0;
    }
    let k = ues_per_tti.min(queue_len) as u64;
    ((ttis % queue_len as u64) * k % queue_len as u64) as usize
}
