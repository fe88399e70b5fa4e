use std::collections::HashMap;

use rayon::prelude::*;

use super::plan::{CellSpec, ExperimentPlan, Policy, TraceSource};
use crate::agent::{DqnFleet, StateEncoder};
use crate::baseline::MaxSinrPolicy;
use crate::coordinator::{AttachmentPolicy, Coordinator, EventLog};
use crate::error::{Error, Result};
use crate::simcore::{generate_trace, load_trace, SimConfig, Trace, World};

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub rb_per_bs: u32,
    pub num_ue: usize,
    pub seed: u64,
    pub policy: Policy,
    /// Reported episode (the last one for DQN, 0 for the baseline).
    pub episode: usize,
    /// Delivered bits over the episode: per UE and epoch, the lesser of
    /// achieved capacity and demand.
    pub total_throughput_bits: f64,
    pub mean_qos: f64,
    pub total_handovers: u64,
    pub trace_sha256: String,
    /// `None` when the cell completed.
    pub failure: Option<String>,
}

impl ResultRow {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    pub total_throughput_bits: f64,
    pub mean_qos: f64,
    pub handovers: u64,
    /// Mean training loss over the episode's updates, if any happened.
    pub mean_loss: Option<f64>,
}

/// Invariant bookkeeping for one cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CellChecks {
    pub epochs_run: u64,
    /// Epochs after which the BS loads did not sum to the UE count.
    pub load_sum_violations: u64,
    /// Epochs after which some network parameter was non-finite.
    pub nonfinite_epochs: u64,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub spec: CellSpec,
    pub row: ResultRow,
    pub curve: Vec<EpisodeStats>,
    pub checks: CellChecks,
    /// Message log of the reported episode, when the plan records events.
    pub events: Option<Vec<String>>,
}

/// Runs every cell of the plan. A failing cell is recorded with its error;
/// the sweep carries on.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<CellResult>> {
    plan.validate()?;
    let traces = prepare_traces(plan)?;
    Ok(plan
        .cells
        .par_iter()
        .map(|cell| {
            let trace = &traces[&(cell.num_ue, cell.seed)];
            run_cell(plan, cell, trace)
        })
        .collect())
}

type TraceKey = (usize, u64);

fn prepare_traces(plan: &ExperimentPlan) -> Result<HashMap<TraceKey, std::result::Result<Trace, String>>> {
    let mut keys: Vec<TraceKey> = plan.cells.iter().map(|c| (c.num_ue, c.seed)).collect();
    keys.sort_unstable();
    keys.dedup();
    let from_file = match &plan.trace_source {
        TraceSource::File(path) => Some(load_trace(path)?),
        TraceSource::Generated => None,
    };
    Ok(keys
        .into_iter()
        .map(|(num_ue, seed)| {
            let cfg = SimConfig {
                num_ue,
                rng_seed: seed,
                ..plan.base.clone()
            };
            let trace = match &from_file {
                Some(t) => t.check_against(&cfg).map(|()| t.clone()),
                None => generate_trace(&cfg, seed),
            };
            ((num_ue, seed), trace.map_err(|e| e.to_string()))
        })
        .collect())
}

fn failed_row(cell: &CellSpec, trace_sha256: String, msg: String) -> ResultRow {
    ResultRow {
        rb_per_bs: cell.rb_per_bs,
        num_ue: cell.num_ue,
        seed: cell.seed,
        policy: cell.policy,
        episode: 0,
        total_throughput_bits: 0.0,
        mean_qos: 0.0,
        total_handovers: 0,
        trace_sha256,
        failure: Some(msg),
    }
}

fn run_cell(plan: &ExperimentPlan, cell: &CellSpec, trace: &std::result::Result<Trace, String>) -> CellResult {
    let mut checks = CellChecks::default();
    let mut curve = Vec::new();
    let mut events = None;
    let trace = match trace {
        Ok(t) => t,
        Err(msg) => {
            return CellResult {
                spec: *cell,
                row: failed_row(cell, String::new(), msg.clone()),
                curve,
                checks,
                events,
            }
        }
    };
    let hash = trace.content_hash();
    let outcome = simulate_cell(plan, cell, trace, &mut curve, &mut checks, &mut events);
    let row = match outcome {
        Ok(()) => {
            let last = curve.last().expect("at least one episode");
            ResultRow {
                rb_per_bs: cell.rb_per_bs,
                num_ue: cell.num_ue,
                seed: cell.seed,
                policy: cell.policy,
                episode: last.episode,
                total_throughput_bits: last.total_throughput_bits,
                mean_qos: last.mean_qos,
                total_handovers: last.handovers,
                trace_sha256: hash,
                failure: None,
            }
        }
        Err(e) => failed_row(cell, hash, e.to_string()),
    };
    CellResult {
        spec: *cell,
        row,
        curve,
        checks,
        events,
    }
}

fn simulate_cell(
    plan: &ExperimentPlan,
    cell: &CellSpec,
    trace: &Trace,
    curve: &mut Vec<EpisodeStats>,
    checks: &mut CellChecks,
    events: &mut Option<Vec<String>>,
) -> Result<()> {
    let cfg = plan.cell_config(cell);
    cfg.validate()?;
    trace.check_against(&cfg)?;
    match cell.policy {
        Policy::MaxSinr => {
            let mut policy = MaxSinrPolicy {
                hysteresis_db: plan.hysteresis_db,
            };
            let (stats, log) = run_episode(plan, &cfg, trace, &mut policy, 0, plan.record_events, checks)?;
            curve.push(stats);
            *events = log;
        }
        Policy::Dqn => {
            let encoder = StateEncoder {
                num_bs: cfg.num_bs(),
                num_ue: cfg.num_ue,
                rb_per_bs: cfg.rb_per_bs,
                noise_dbm: cfg.noise_dbm,
                interference: cfg.interference,
            };
            let mut fleet = DqnFleet::new(encoder, &plan.hyper, cell.seed, cfg.epoch_seconds())?;
            let episodes = plan.hyper.episodes;
            for episode in 0..episodes {
                let last = episode + 1 == episodes;
                if last {
                    if let Some(eps) = plan.hyper.eval_epsilon {
                        fleet.set_epsilon(eps);
                        fleet.set_training(false);
                    }
                }
                fleet.reset_episode();
                let record = last && plan.record_events;
                let (stats, log) = run_episode(plan, &cfg, trace, &mut fleet, episode, record, checks)?;
                curve.push(stats);
                if record {
                    *events = log;
                }
            }
        }
    }
    Ok(())
}

/// Read-only diagnostics a policy may expose to the harness.
pub trait AttachmentPolicyExt: AttachmentPolicy {
    fn mean_last_loss(&self) -> Option<f64> {
        None
    }

    fn parameters_finite(&self) -> bool {
        true
    }
}

impl AttachmentPolicyExt for MaxSinrPolicy {}

impl AttachmentPolicyExt for DqnFleet {
    fn mean_last_loss(&self) -> Option<f64> {
        let losses: Vec<f64> = self.agents().iter().filter_map(|a| a.last_loss()).collect();
        if losses.is_empty() {
            None
        } else {
            Some(losses.iter().sum::<f64>() / losses.len() as f64)
        }
    }

    fn parameters_finite(&self) -> bool {
        self.all_parameters_finite()
    }
}

fn run_episode<P: AttachmentPolicyExt>(
    plan: &ExperimentPlan,
    cfg: &SimConfig,
    trace: &Trace,
    policy: &mut P,
    episode: usize,
    record: bool,
    checks: &mut CellChecks,
) -> Result<(EpisodeStats, Option<Vec<String>>)> {
    let mut world = World::new(cfg.clone(), trace)?;
    let log = if record {
        EventLog::enabled()
    } else {
        EventLog::disabled()
    };
    let mut coord = Coordinator::new(&world, plan.max_attachment, log);
    let mut delivered = 0.0;
    let mut qos_sum = 0.0;
    let mut losses = Vec::new();
    for epoch in 0..cfg.horizon {
        let out = coord.epoch_protocol(&mut world, policy, &trace.epoch_rows(epoch))?;
        checks.epochs_run += 1;
        if out.report.loads.iter().sum::<usize>() != cfg.num_ue {
            checks.load_sum_violations += 1;
        }
        if !policy.parameters_finite() {
            checks.nonfinite_epochs += 1;
        }
        delivered += out.report.delivered_bits();
        qos_sum += out.report.ues.iter().map(|u| u.qos).sum::<f64>();
        if let Some(loss) = policy.mean_last_loss() {
            losses.push(loss);
        }
    }
    let stats = EpisodeStats {
        episode,
        total_throughput_bits: delivered,
        mean_qos: qos_sum / (cfg.horizon * cfg.num_ue) as f64,
        handovers: coord.handovers(),
        mean_loss: if losses.is_empty() {
            None
        } else {
            Some(losses.iter().sum::<f64>() / losses.len() as f64)
        },
    };
    let log = record.then(|| coord.into_log().into_lines());
    Ok((stats, log))
}

/// Signed handover difference for one `(rb, ue, seed)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandoverDelta {
    pub rb_per_bs: u32,
    pub num_ue: usize,
    pub seed: u64,
    pub dqn: u64,
    pub max_sinr: u64,
    pub delta: i64,
}

/// `dqn - max_sinr` handovers for every cell; both policies must be present
/// and completed.
pub fn handover_delta(rows: &[ResultRow]) -> Result<Vec<HandoverDelta>> {
    let mut keys: Vec<(u32, usize, u64)> = rows.iter().map(|r| (r.rb_per_bs, r.num_ue, r.seed)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .map(|(rb, ue, seed)| {
            let find = |p: Policy| {
                rows.iter()
                    .find(|r| r.rb_per_bs == rb && r.num_ue == ue && r.seed == seed && r.policy == p && r.ok())
                    .ok_or(Error::MissingCounterpart { rb: rb as usize, ue, seed })
            };
            let (d, b) = (find(Policy::Dqn)?, find(Policy::MaxSinr)?);
            Ok(HandoverDelta {
                rb_per_bs: rb,
                num_ue: ue,
                seed,
                dqn: d.total_handovers,
                max_sinr: b.total_handovers,
                delta: d.total_handovers as i64 - b.total_handovers as i64,
            })
        })
        .collect()
}
