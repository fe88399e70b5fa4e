use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::agent::Hyperparams;
use crate::error::{Error, Result};
use crate::simcore::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Policy {
    Dqn,
    MaxSinr,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Dqn => "dqn",
            Policy::MaxSinr => "max_sinr",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dqn" => Ok(Policy::Dqn),
            "max_sinr" => Ok(Policy::MaxSinr),
            other => Err(Error::InvalidInput(format!("unknown policy {other:?}"))),
        }
    }
}

/// One experiment cell: a (bandwidth, population, seed) triple under one
/// policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSpec {
    pub rb_per_bs: u32,
    pub num_ue: usize,
    pub seed: u64,
    pub policy: Policy,
}

impl CellSpec {
    pub fn label(&self) -> String {
        format!("rb{}_ue{}_seed{}_{}", self.rb_per_bs, self.num_ue, self.seed, self.policy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    /// Generated from the cell seed; shared by every cell with the same
    /// `(num_ue, seed)`.
    Generated,
    /// Read from a trace file; its UE count must match the cells.
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub base: SimConfig,
    pub hyper: Hyperparams,
    pub cells: Vec<CellSpec>,
    pub trace_source: TraceSource,
    pub hysteresis_db: f64,
    pub max_attachment: Option<usize>,
    /// Keep the reported episode's message log for every cell.
    pub record_events: bool,
}

pub const PAPER_RB: [u32; 2] = [50, 100];
pub const PAPER_UE: [usize; 6] = [20, 40, 50, 60, 80, 100];

impl ExperimentPlan {
    /// Full cross product, ordered rb, ue, seed, policy.
    pub fn grid(
        base: SimConfig,
        hyper: Hyperparams,
        rbs: &[u32],
        ues: &[usize],
        seeds: &[u64],
        policies: &[Policy],
    ) -> Self {
        let mut cells = Vec::new();
        for &rb_per_bs in rbs {
            for &num_ue in ues {
                for &seed in seeds {
                    for &policy in policies {
                        cells.push(CellSpec {
                            rb_per_bs,
                            num_ue,
                            seed,
                            policy,
                        });
                    }
                }
            }
        }
        Self {
            base,
            hyper,
            cells,
            trace_source: TraceSource::Generated,
            hysteresis_db: 0.0,
            max_attachment: None,
            record_events: false,
        }
    }

    /// `count` replicate seeds derived from a master seed.
    pub fn seeds(master: u64, count: usize) -> Vec<u64> {
        (0..count as u64).map(|i| master.wrapping_add(i)).collect()
    }

    /// Quick sweep: 120-epoch day, 20 episodes, rb {50, 100} x ue {20, 50},
    /// five seeds, both policies.
    pub fn desk_scale(master_seed: u64) -> Self {
        let hyper = Hyperparams {
            episodes: 20,
            eval_epsilon: Some(1.0),
            ..Hyperparams::default()
        };
        Self::grid(
            SimConfig::desk_scale(),
            hyper,
            &PAPER_RB,
            &[20, 50],
            &Self::seeds(master_seed, 5),
            &[Policy::Dqn, Policy::MaxSinr],
        )
    }

    /// Full-day, 100-episode sweep over every bandwidth and population.
    pub fn paper_scale(master_seed: u64) -> Self {
        Self::grid(
            SimConfig::default(),
            Hyperparams {
                eval_epsilon: Some(1.0),
                ..Hyperparams::default()
            },
            &PAPER_RB,
            &PAPER_UE,
            &Self::seeds(master_seed, 1),
            &[Policy::Dqn, Policy::MaxSinr],
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.hyper.validate()?;
        if self.cells.is_empty() {
            return Err(Error::Config("plan has no cells".into()));
        }
        if !(self.hysteresis_db >= 0.0) {
            return Err(Error::Config(format!("hysteresis {} dB", self.hysteresis_db)));
        }
        Ok(())
    }

    /// Environment config for one cell.
    pub fn cell_config(&self, cell: &CellSpec) -> SimConfig {
        SimConfig {
            rb_per_bs: cell.rb_per_bs,
            num_ue: cell.num_ue,
            rng_seed: cell.seed,
            ..self.base.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_grid_cardinality() {
        let plan = ExperimentPlan::paper_scale(1);
        assert_eq!(plan.cells.len(), 24);
        plan.validate().unwrap();
    }

    #[test]
    fn desk_plan_shape() {
        let plan = ExperimentPlan::desk_scale(7);
        assert_eq!(plan.cells.len(), 2 * 2 * 5 * 2);
        assert_eq!(plan.base.horizon, 120);
        assert_eq!(plan.hyper.episodes, 20);
    }

    #[test]
    fn policy_parse() {
        assert_eq!("dqn".parse::<Policy>().unwrap(), Policy::Dqn);
        assert_eq!("max_sinr".parse::<Policy>().unwrap(), Policy::MaxSinr);
        assert!("random".parse::<Policy>().is_err());
    }
}
