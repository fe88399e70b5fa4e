//! Per-UE mobility and demand traces: generation, file IO and validation.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use sha2::{Digest, Sha256};

use super::config::{Rect, SimConfig};
use crate::error::{Error, Result};
use crate::seed;

pub const TRACE_HEADER: &str = "ue_id,epoch,x_m,y_m,demand_bits";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    Residential,
    Office,
}

impl Zone {
    /// Home zone of a UE; ids alternate so the two zones split evenly.
    pub fn of_ue(ue: usize) -> Self {
        if ue % 2 == 0 {
            Zone::Residential
        } else {
            Zone::Office
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub ue: usize,
    pub epoch: usize,
    pub x: f64,
    pub y: f64,
    pub demand_bits: u64,
}

impl TraceRow {
    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// A validated trace: `num_ue` UEs, each with epochs `0..horizon`, stored
/// UE-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    num_ue: usize,
    horizon: usize,
    rows: Vec<TraceRow>,
}

impl Trace {
    /// Builds a trace from rows in any order, checking that every UE id in
    /// `0..n` has exactly the epochs `0..horizon`.
    pub fn from_rows(mut rows: Vec<TraceRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::TraceInvalid("no rows".into()));
        }
        rows.sort_by_key(|r| (r.ue, r.epoch));
        let num_ue = rows.last().map_or(0, |r| r.ue + 1);
        let mut horizon = None;
        let mut i = 0;
        for ue in 0..num_ue {
            let mut expected = 0usize;
            while i < rows.len() && rows[i].ue == ue {
                let row = &rows[i];
                if row.epoch != expected {
                    return Err(if row.epoch < expected {
                        Error::TraceInvalid(format!("ue {ue}: duplicate epoch {}", row.epoch))
                    } else {
                        Error::TraceInvalid(format!(
                            "ue {ue}: missing epoch {expected} (gap before epoch {})",
                            row.epoch
                        ))
                    });
                }
                if !(row.x.is_finite() && row.y.is_finite()) {
                    return Err(Error::TraceInvalid(format!(
                        "ue {ue} epoch {}: non-finite position",
                        row.epoch
                    )));
                }
                expected += 1;
                i += 1;
            }
            if expected == 0 {
                return Err(Error::TraceInvalid(format!("ue {ue}: no rows (ids must be contiguous)")));
            }
            match horizon {
                None => horizon = Some(expected),
                Some(h) if h != expected => {
                    return Err(Error::TraceInvalid(format!(
                        "ue {ue}: {expected} epochs, expected {h} like ue 0"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(Self {
            num_ue,
            horizon: horizon.unwrap_or(0),
            rows,
        })
    }

    pub fn num_ue(&self) -> usize {
        self.num_ue
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn row(&self, ue: usize, epoch: usize) -> &TraceRow {
        &self.rows[ue * self.horizon + epoch]
    }

    /// All UEs' rows for one epoch, ordered by UE id.
    pub fn epoch_rows(&self, epoch: usize) -> Vec<TraceRow> {
        (0..self.num_ue).map(|ue| *self.row(ue, epoch)).collect()
    }

    /// Checks the trace fits a config: same UE count, enough epochs and all
    /// positions inside the area.
    pub fn check_against(&self, cfg: &SimConfig) -> Result<()> {
        if self.num_ue != cfg.num_ue {
            return Err(Error::TraceInvalid(format!(
                "trace has {} UEs, config expects {}",
                self.num_ue, cfg.num_ue
            )));
        }
        if self.horizon < cfg.horizon {
            return Err(Error::TraceInvalid(format!(
                "trace covers {} epochs, config horizon is {}",
                self.horizon, cfg.horizon
            )));
        }
        let area = cfg.area();
        if let Some(r) = self.rows.iter().find(|r| !area.contains(r.position())) {
            return Err(Error::TraceInvalid(format!(
                "ue {} epoch {}: position ({}, {}) outside area",
                r.ue, r.epoch, r.x, r.y
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.rows.len() * 40);
        s.push_str(TRACE_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.ue, r.epoch, r.x, r.y, r.demand_bits);
        }
        s
    }

    /// SHA-256 of the canonical CSV rendering, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            None => return Err(Error::TraceInvalid("no rows".into())),
            Some((_, h)) if h.trim_end_matches('\r') != TRACE_HEADER => {
                return Err(Error::TraceParse {
                    line: 1,
                    msg: format!("expected header {TRACE_HEADER:?}"),
                })
            }
            Some(_) => {}
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let line_no = n + 1;
            let err = |msg: String| Error::TraceParse { line: line_no, msg };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(err(format!("expected 5 fields, got {}", fields.len())));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad integer {s:?}")));
            let float = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number {s:?}")));
            rows.push(TraceRow {
                ue: int(fields[0])?,
                epoch: int(fields[1])?,
                x: float(fields[2])?,
                y: float(fields[3])?,
                demand_bits: fields[4]
                    .parse()
                    .map_err(|_| err(format!("bad demand {:?}", fields[4])))?,
            });
        }
        Self::from_rows(rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub fn load_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Trace::parse_csv(&text)
}

fn uniform_in(rng: &mut impl Rng, zone: Rect) -> (f64, f64) {
    (rng.gen_range(zone.x0..=zone.x1), rng.gen_range(zone.y0..=zone.y1))
}

fn step_towards(from: (f64, f64), to: (f64, f64), speed: f64) -> (f64, f64) {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let dist = dx.hypot(dy);
    if dist <= speed {
        to
    } else {
        let f = speed / dist;
        (from.0 + dx * f, from.1 + dy * f)
    }
}

/// Generates the commuter trace.
///
/// Each UE starts at a uniform point of its home zone and draws a uniform
/// destination in the other zone. During the morning window it moves towards
/// the destination at the configured fixed speed, during the evening window
/// back towards home; otherwise it stays put. Per-epoch demand is drawn
/// log-uniformly from the configured range. Each UE uses its own RNG stream
/// so a UE's rows do not depend on how many UEs are simulated.
pub fn generate_trace(cfg: &SimConfig, rng_seed: u64) -> Result<Trace> {
    cfg.validate()?;
    let area = cfg.area();
    for (name, z) in [("residential", cfg.residential_zone), ("office", cfg.office_zone)] {
        if !area.contains((z.x0, z.y0)) || !area.contains((z.x1, z.y1)) {
            return Err(Error::Config(format!("{name} zone not inside area")));
        }
    }
    let speed = cfg.commute_speed();
    let (ln_lo, ln_hi) = (cfg.demand_min_bits.ln(), cfg.demand_max_bits.ln());
    let mut rows = Vec::with_capacity(cfg.num_ue * cfg.horizon);
    for ue in 0..cfg.num_ue {
        let mut rng = seed::rng_for(rng_seed, seed::stream::TRACE, ue as u64);
        let (home_zone, away_zone) = match Zone::of_ue(ue) {
            Zone::Residential => (cfg.residential_zone, cfg.office_zone),
            Zone::Office => (cfg.office_zone, cfg.residential_zone),
        };
        let home = uniform_in(&mut rng, home_zone);
        let away = uniform_in(&mut rng, away_zone);
        let mut pos = home;
        for epoch in 0..cfg.horizon {
            if cfg.morning_window.contains(epoch) {
                pos = step_towards(pos, away, speed);
            } else if cfg.evening_window.contains(epoch) {
                pos = step_towards(pos, home, speed);
            }
            let demand = if ln_hi > ln_lo {
                rng.gen_range(ln_lo..ln_hi).exp()
            } else {
                cfg.demand_min_bits
            };
            rows.push(TraceRow {
                ue,
                epoch,
                x: pos.0,
                y: pos.1,
                demand_bits: demand.round() as u64,
            });
        }
    }
    Trace::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(num_ue: usize) -> SimConfig {
        SimConfig {
            num_ue,
            ..SimConfig::default()
        }
    }

    #[test]
    fn full_day_row_count() {
        let trace = generate_trace(&small_cfg(20), 7).unwrap();
        assert_eq!(trace.rows().len(), 20 * 1440);
        let mut per_epoch = vec![0usize; 1440];
        for r in trace.rows() {
            per_epoch[r.epoch] += 1;
        }
        assert!(per_epoch.iter().all(|&c| c == 20));
    }

    #[test]
    fn zero_speed_freezes_positions() {
        let cfg = SimConfig {
            commute_speed_m_per_epoch: Some(0.0),
            ..small_cfg(6)
        };
        let trace = generate_trace(&cfg, 3).unwrap();
        for ue in 0..6 {
            let p0 = trace.row(ue, 0).position();
            assert!((0..1440).all(|t| trace.row(ue, t).position() == p0));
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_trace(&small_cfg(5), 11).unwrap().to_csv();
        let b = generate_trace(&small_cfg(5), 11).unwrap().to_csv();
        assert_eq!(a, b);
        let c = generate_trace(&small_cfg(5), 12).unwrap().to_csv();
        assert_ne!(a, c);
    }

    #[test]
    fn commuters_cross_zones_and_return() {
        let cfg = small_cfg(10);
        let trace = generate_trace(&cfg, 5).unwrap();
        for ue in 0..10 {
            let (home, away) = match Zone::of_ue(ue) {
                Zone::Residential => (cfg.residential_zone, cfg.office_zone),
                Zone::Office => (cfg.office_zone, cfg.residential_zone),
            };
            assert!(home.contains(trace.row(ue, 0).position()));
            assert!(away.contains(trace.row(ue, 600).position()));
            assert!(home.contains(trace.row(ue, 1439).position()));
            assert_eq!(trace.row(ue, 0).position(), trace.row(ue, 1439).position());
        }
    }

    #[test]
    fn demand_within_range() {
        let cfg = small_cfg(4);
        let trace = generate_trace(&cfg, 1).unwrap();
        for r in trace.rows() {
            let d = r.demand_bits as f64;
            assert!(d >= cfg.demand_min_bits - 1.0 && d <= cfg.demand_max_bits + 1.0);
        }
    }

    #[test]
    fn csv_round_trip() {
        let cfg = SimConfig {
            horizon: 30,
            ..small_cfg(2)
        };
        let trace = generate_trace(&cfg, 9).unwrap();
        let back = Trace::parse_csv(&trace.to_csv()).unwrap();
        assert_eq!(back, trace);
        assert_eq!(back.rows().len(), 60);
    }

    #[test]
    fn missing_epoch_is_named() {
        let text = format!("{TRACE_HEADER}\n0,0,1,1,10\n0,1,1,1,10\n0,3,1,1,10\n");
        let err = Trace::parse_csv(&text).unwrap_err();
        assert!(err.to_string().contains("missing epoch 2"), "{err}");
    }

    #[test]
    fn empty_input_rejected() {
        assert!(Trace::parse_csv("").unwrap_err().to_string().contains("no rows"));
        let only_header = format!("{TRACE_HEADER}\n");
        assert!(Trace::parse_csv(&only_header)
            .unwrap_err()
            .to_string()
            .contains("no rows"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = format!("{TRACE_HEADER}\n0,0,1,1,10\n0,1,abc,1,10\n");
        match Trace::parse_csv(&text).unwrap_err() {
            Error::TraceParse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }
}
