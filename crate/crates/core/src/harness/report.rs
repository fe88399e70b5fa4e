//! Report files: the results table and one data series per comparison
//! figure (throughput against bandwidth and population, handover delta
//! against bandwidth and population).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::plan::Policy;
use super::run::{handover_delta, CellResult, HandoverDelta, ResultRow};
use crate::error::{Error, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const FIG_THROUGHPUT_VS_RB: &str = "fig5_throughput_vs_rb.csv";
pub const FIG_THROUGHPUT_VS_UE: &str = "fig6_throughput_vs_ue.csv";
pub const FIG_HANDOVER_DELTA_VS_RB: &str = "fig7_handover_delta_vs_rb.csv";
pub const FIG_HANDOVER_DELTA_VS_UE: &str = "fig8_handover_delta_vs_ue.csv";
pub const CURVES_FILE: &str = "learning_curves.csv";

const RESULTS_HEADER: &str =
    "rb_per_bs,num_ue,seed,policy,episode,total_throughput_bits,mean_qos,total_handovers,trace_sha256,status";

/// Population held fixed for the bandwidth series: 100 when swept, else
/// the largest.
const PREFERRED_FIXED_UE: usize = 100;
/// Bandwidth held fixed for the population series: 50 when swept, else the
/// smallest.
const PREFERRED_FIXED_RB: u32 = 50;

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in rows {
        let status = match &r.failure {
            None => "ok".to_string(),
            Some(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.rb_per_bs,
            r.num_ue,
            r.seed,
            r.policy,
            r.episode,
            r.total_throughput_bits,
            r.mean_qos,
            r.total_handovers,
            r.trace_sha256,
            status
        );
    }
    s
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(RESULTS_HEADER) {
        return Err(Error::InvalidInput("results file lacks the expected header".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let err = |m: &str| Error::InvalidInput(format!("results line {}: {m}", i + 2));
            let f: Vec<&str> = line.splitn(10, ',').collect();
            if f.len() != 10 {
                return Err(err("expected 10 fields"));
            }
            let failure = match f[9] {
                "ok" => None,
                s => Some(s.strip_prefix("failed: ").unwrap_or(s).to_string()),
            };
            Ok(ResultRow {
                rb_per_bs: f[0].parse().map_err(|_| err("rb_per_bs"))?,
                num_ue: f[1].parse().map_err(|_| err("num_ue"))?,
                seed: f[2].parse().map_err(|_| err("seed"))?,
                policy: f[3].parse()?,
                episode: f[4].parse().map_err(|_| err("episode"))?,
                total_throughput_bits: f[5].parse().map_err(|_| err("throughput"))?,
                mean_qos: f[6].parse().map_err(|_| err("mean_qos"))?,
                total_handovers: f[7].parse().map_err(|_| err("handovers"))?,
                trace_sha256: f[8].to_string(),
                failure,
            })
        })
        .collect()
}

fn pick_fixed<T: Ord + Copy>(values: impl Iterator<Item = T>, preferred: T, largest: bool) -> Option<T> {
    let mut all: Vec<T> = values.collect();
    all.sort_unstable();
    all.dedup();
    if all.contains(&preferred) {
        Some(preferred)
    } else if largest {
        all.last().copied()
    } else {
        all.first().copied()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Throughput/QoS means over seeds along one axis, the other held fixed.
fn throughput_series(rows: &[ResultRow], fixed_rb: Option<u32>, fixed_ue: Option<usize>) -> String {
    let mut groups: BTreeMap<(u32, usize, Policy), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.ok()) {
        if fixed_rb.is_some_and(|rb| rb != r.rb_per_bs) || fixed_ue.is_some_and(|ue| ue != r.num_ue) {
            continue;
        }
        let g = groups.entry((r.rb_per_bs, r.num_ue, r.policy)).or_default();
        g.0.push(r.total_throughput_bits);
        g.1.push(r.mean_qos);
    }
    let mut s = String::from("rb_per_bs,num_ue,policy,seeds,mean_throughput_bits,mean_qos\n");
    for ((rb, ue, policy), (tp, qos)) in groups {
        let _ = writeln!(s, "{rb},{ue},{policy},{},{},{}", tp.len(), mean(&tp), mean(&qos));
    }
    s
}

fn delta_series(deltas: &[HandoverDelta], fixed_rb: Option<u32>, fixed_ue: Option<usize>) -> String {
    let mut groups: BTreeMap<(u32, usize), Vec<f64>> = BTreeMap::new();
    for d in deltas {
        if fixed_rb.is_some_and(|rb| rb != d.rb_per_bs) || fixed_ue.is_some_and(|ue| ue != d.num_ue) {
            continue;
        }
        groups.entry((d.rb_per_bs, d.num_ue)).or_default().push(d.delta as f64);
    }
    let mut s = String::from("rb_per_bs,num_ue,seeds,mean_handover_delta\n");
    for ((rb, ue), ds) in groups {
        let _ = writeln!(s, "{rb},{ue},{},{}", ds.len(), mean(&ds));
    }
    s
}

/// Deltas for every cell whose two policies both completed.
pub fn complete_deltas(rows: &[ResultRow]) -> Vec<HandoverDelta> {
    let mut out = Vec::new();
    let mut keys: Vec<(u32, usize, u64)> = rows.iter().map(|r| (r.rb_per_bs, r.num_ue, r.seed)).collect();
    keys.sort_unstable();
    keys.dedup();
    for (rb, ue, seed) in keys {
        let pair: Vec<ResultRow> = rows
            .iter()
            .filter(|r| r.rb_per_bs == rb && r.num_ue == ue && r.seed == seed)
            .cloned()
            .collect();
        if let Ok(mut d) = handover_delta(&pair) {
            out.append(&mut d);
        }
    }
    out
}

/// Renders every report file in memory: `(file name, contents)`.
pub fn render_report(rows: &[ResultRow]) -> Result<Vec<(&'static str, String)>> {
    if rows.is_empty() {
        return Err(Error::EmptyResults);
    }
    let fixed_ue = pick_fixed(rows.iter().map(|r| r.num_ue), PREFERRED_FIXED_UE, true);
    let fixed_rb = pick_fixed(rows.iter().map(|r| r.rb_per_bs), PREFERRED_FIXED_RB, false);
    let deltas = complete_deltas(rows);
    Ok(vec![
        (RESULTS_FILE, results_csv(rows)),
        (FIG_THROUGHPUT_VS_RB, throughput_series(rows, None, fixed_ue)),
        (FIG_THROUGHPUT_VS_UE, throughput_series(rows, fixed_rb, None)),
        (FIG_HANDOVER_DELTA_VS_RB, delta_series(&deltas, None, fixed_ue)),
        (FIG_HANDOVER_DELTA_VS_UE, delta_series(&deltas, fixed_rb, None)),
    ])
}

/// Writes the results table and the four figure series into `out_dir`.
/// Nothing is written when `rows` is empty.
pub fn emit_report(rows: &[ResultRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let files = render_report(rows)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    files
        .into_iter()
        .map(|(name, body)| {
            let path = out_dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn learning_curves_csv(cells: &[CellResult]) -> String {
    let mut s = String::from("rb_per_bs,num_ue,seed,policy,episode,total_throughput_bits,mean_qos,handovers,mean_loss\n");
    for c in cells {
        for e in &c.curve {
            let loss = e.mean_loss.map_or_else(String::new, |l| l.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                c.spec.rb_per_bs,
                c.spec.num_ue,
                c.spec.seed,
                c.spec.policy,
                e.episode,
                e.total_throughput_bits,
                e.mean_qos,
                e.handovers,
                loss
            );
        }
    }
    s
}

/// Writes learning curves and, when recorded, one event log per cell.
pub fn emit_diagnostics(cells: &[CellResult], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let curves = out_dir.join(CURVES_FILE);
    std::fs::write(&curves, learning_curves_csv(cells)).map_err(|e| Error::io(&curves, e))?;
    let events_dir = out_dir.join("events");
    for c in cells {
        if let Some(lines) = &c.events {
            std::fs::create_dir_all(&events_dir).map_err(|e| Error::io(&events_dir, e))?;
            let path = events_dir.join(format!("{}.log", c.spec.label()));
            let mut body = lines.join("\n");
            body.push('\n');
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}
