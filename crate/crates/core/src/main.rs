use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use cellbalance::harness::{self, ExperimentPlan, Policy, TraceSource};
use cellbalance::simcore::{generate_trace, SimConfig};

#[derive(Parser)]
#[command(name = "cellbalance", version, about = "Multi-agent DQN load balancing against MAX-SINR attachment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Dqn,
    #[value(name = "max_sinr")]
    MaxSinr,
    Both,
}

impl PolicyArg {
    fn policies(self) -> Vec<Policy> {
        match self {
            PolicyArg::Dqn => vec![Policy::Dqn],
            PolicyArg::MaxSinr => vec![Policy::MaxSinr],
            PolicyArg::Both => vec![Policy::Dqn, Policy::MaxSinr],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a mobility and demand trace as CSV.
    GenerateTrace {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Overrides the configured number of UEs.
        #[arg(long)]
        ue: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a sweep and write the report files.
    Run {
        /// Base environment; defaults to the quick 120-epoch day.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of replicate seeds, starting at --seed.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, value_enum, default_value_t = PolicyArg::Both)]
        policy: PolicyArg,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        rb: Vec<u32>,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        ue: Vec<usize>,
        #[arg(long)]
        episodes: Option<usize>,
        /// Full-day environment, 100 episodes, every bandwidth and population.
        #[arg(long)]
        paper_scale: bool,
        /// Replay this trace instead of generating one per seed.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write per-cell event logs.
        #[arg(long)]
        events: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the figure series from an existing results.csv.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>, fallback: SimConfig) -> anyhow::Result<SimConfig> {
    match path {
        Some(p) => Ok(SimConfig::from_file(p)?),
        None => Ok(fallback),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every cell completed.
fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().command {
        Command::GenerateTrace { config, seed, ue, out } => {
            let mut cfg = load_config(config.as_ref(), SimConfig::default())?;
            if let Some(n) = ue {
                cfg.num_ue = n;
            }
            cfg.rng_seed = seed;
            cfg.validate()?;
            let trace = generate_trace(&cfg, seed)?;
            trace.save(&out)?;
            println!("{} rows, sha256 {}", trace.rows().len(), trace.content_hash());
            Ok(true)
        }
        Command::Run {
            config,
            seed,
            seeds,
            policy,
            rb,
            ue,
            episodes,
            paper_scale,
            trace,
            events,
            out,
        } => {
            let defaults = if paper_scale {
                ExperimentPlan::paper_scale(seed)
            } else {
                ExperimentPlan::desk_scale(seed)
            };
            let base = load_config(config.as_ref(), defaults.base.clone())?;
            let mut hyper = defaults.hyper.clone();
            if let Some(n) = episodes {
                hyper.episodes = n;
            }
            let rbs = if rb.is_empty() { unique(defaults.cells.iter().map(|c| c.rb_per_bs)) } else { rb };
            let ues = if ue.is_empty() { unique(defaults.cells.iter().map(|c| c.num_ue)) } else { ue };
            let seed_list = match seeds {
                Some(0) => bail!("--seeds must be at least 1"),
                Some(n) => ExperimentPlan::seeds(seed, n),
                None => unique(defaults.cells.iter().map(|c| c.seed)),
            };
            let mut plan = ExperimentPlan::grid(base, hyper, &rbs, &ues, &seed_list, &policy.policies());
            if let Some(path) = trace {
                plan.trace_source = TraceSource::File(path);
            }
            plan.record_events = events;
            let cells = harness::run_experiment(&plan)?;
            let rows: Vec<_> = cells.iter().map(|c| c.row.clone()).collect();
            for r in rows.iter().filter(|r| !r.ok()) {
                eprintln!(
                    "cell rb={} ue={} seed={} {} failed: {}",
                    r.rb_per_bs,
                    r.num_ue,
                    r.seed,
                    r.policy,
                    r.failure.as_deref().unwrap_or_default()
                );
            }
            let written = harness::emit_report(&rows, &out)?;
            harness::emit_diagnostics(&cells, &out)?;
            for p in written {
                println!("{}", p.display());
            }
            Ok(rows.iter().all(|r| r.ok()))
        }
        Command::Report { results, out } => {
            let text = std::fs::read_to_string(&results).with_context(|| format!("reading {}", results.display()))?;
            let rows = harness::parse_results_csv(&text)?;
            for p in harness::emit_report(&rows, &out)? {
                println!("{}", p.display());
            }
            Ok(rows.iter().all(|r| r.ok()))
        }
    }
}

fn unique<T: Ord>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}
