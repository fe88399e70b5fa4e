//! Environment configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel;
use crate::error::{Error, Result};

/// Axis-aligned rectangle in meters, `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn is_proper(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0
    }
}

/// A half-open range of epochs `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn contains(&self, epoch: usize) -> bool {
        epoch >= self.start && epoch < self.end
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub bs_positions: Vec<(f64, f64)>,
    pub rb_per_bs: u32,
    pub num_ue: usize,
    pub noise_dbm: f64,
    pub fc_ghz: f64,
    pub h_bs_m: f64,
    pub h_ut_m: f64,
    pub tx_power_dbm: f64,
    pub interference: bool,
    pub tti_ms: u32,
    pub ues_per_tti: usize,
    pub epoch_minutes: u32,
    pub horizon: usize,
    pub rng_seed: u64,
    pub rb_bandwidth_hz: f64,
    pub demand_min_bits: f64,
    pub demand_max_bits: f64,
    pub residential_zone: Rect,
    pub office_zone: Rect,
    pub morning_window: Window,
    pub evening_window: Window,
    /// Fixed commuter speed in meters per epoch; `None` picks the slowest
    /// speed that still reaches any destination within the shorter window.
    pub commute_speed_m_per_epoch: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            area_width_m: 2000.0,
            area_height_m: 1500.0,
            bs_positions: vec![(500.0, 375.0), (1500.0, 375.0), (500.0, 1125.0), (1500.0, 1125.0)],
            rb_per_bs: 50,
            num_ue: 20,
            noise_dbm: -95.0,
            fc_ghz: 3.5,
            h_bs_m: 25.0,
            h_ut_m: 1.5,
            tx_power_dbm: channel::DEFAULT_TX_POWER_DBM,
            interference: false,
            tti_ms: 1,
            ues_per_tti: 10,
            epoch_minutes: 1,
            horizon: 1440,
            rng_seed: 0,
            rb_bandwidth_hz: 360_000.0,
            demand_min_bits: 1e7,
            demand_max_bits: 1e9,
            residential_zone: Rect::new(0.0, 0.0, 1000.0, 750.0),
            office_zone: Rect::new(1000.0, 750.0, 2000.0, 1500.0),
            morning_window: Window { start: 420, end: 540 },
            evening_window: Window { start: 1020, end: 1140 },
            commute_speed_m_per_epoch: None,
        }
    }
}

impl SimConfig {
    /// The shortened day used for quick sweeps: 120 epochs with the commute
    /// windows scaled by the same factor.
    pub fn desk_scale() -> Self {
        Self {
            horizon: 120,
            morning_window: Window { start: 35, end: 45 },
            evening_window: Window { start: 85, end: 95 },
            ..Self::default()
        }
    }

    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn area(&self) -> Rect {
        Rect::new(0.0, 0.0, self.area_width_m, self.area_height_m)
    }

    pub fn epoch_seconds(&self) -> f64 {
        f64::from(self.epoch_minutes) * 60.0
    }

    /// Number of TTIs in one decision epoch.
    pub fn ttis_per_epoch(&self) -> u64 {
        u64::from(self.epoch_minutes) * 60_000 / u64::from(self.tti_ms)
    }

    pub fn commute_speed(&self) -> f64 {
        if let Some(v) = self.commute_speed_m_per_epoch {
            return v;
        }
        let window = self.morning_window.len().min(self.evening_window.len()).max(1);
        let (r, o) = (self.residential_zone, self.office_zone);
        let span_x = r.x1.max(o.x1) - r.x0.min(o.x0);
        let span_y = r.y1.max(o.y1) - r.y0.min(o.y0);
        span_x.hypot(span_y) / window as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.area_width_m > 0.0 && self.area_height_m > 0.0) {
            return bad(format!("area {}x{}", self.area_width_m, self.area_height_m));
        }
        if self.bs_positions.is_empty() {
            return bad("no base stations".into());
        }
        let area = self.area();
        for (j, &p) in self.bs_positions.iter().enumerate() {
            if !area.contains(p) {
                return bad(format!("bs {j} at {p:?} outside area"));
            }
        }
        if self.rb_per_bs == 0 || self.num_ue == 0 || self.ues_per_tti == 0 {
            return bad("rb_per_bs, num_ue and ues_per_tti must be positive".into());
        }
        if self.tti_ms == 0 || self.epoch_minutes == 0 || self.horizon == 0 {
            return bad("tti_ms, epoch_minutes and horizon must be positive".into());
        }
        if 60_000 * self.epoch_minutes % self.tti_ms != 0 {
            return bad("epoch length is not a whole number of TTIs".into());
        }
        for (name, v) in [
            ("noise_dbm", self.noise_dbm),
            ("tx_power_dbm", self.tx_power_dbm),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} not finite"));
            }
        }
        channel::LinkGeometry::new(0.0, self.h_bs_m, self.h_ut_m, self.fc_ghz)?;
        if !channel::nlos_dominates(self.h_ut_m, self.fc_ghz) {
            return bad("UMa-LOS term can exceed NLOS; breakpoint model required".into());
        }
        if !(self.rb_bandwidth_hz > 0.0 && self.rb_bandwidth_hz.is_finite()) {
            return bad(format!("rb_bandwidth_hz {}", self.rb_bandwidth_hz));
        }
        if !(self.demand_min_bits > 0.0 && self.demand_max_bits >= self.demand_min_bits) {
            return bad(format!(
                "demand range [{}, {}]",
                self.demand_min_bits, self.demand_max_bits
            ));
        }
        for (name, z) in [("residential", self.residential_zone), ("office", self.office_zone)] {
            if !z.is_proper() {
                return bad(format!("{name} zone degenerate"));
            }
            if !area.contains((z.x0, z.y0)) || !area.contains((z.x1, z.y1)) {
                return bad(format!("{name} zone outside area"));
            }
        }
        for (name, w) in [("morning", self.morning_window), ("evening", self.evening_window)] {
            if w.start > w.end {
                return bad(format!("{name} window reversed"));
            }
        }
        if let Some(v) = self.commute_speed_m_per_epoch {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("commute speed {v}"));
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines on top of the defaults. `#` starts a
    /// comment; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad number {v:?}"))
        }
        fn list(v: &str) -> std::result::Result<Vec<f64>, String> {
            v.split(',').map(|s| num(s.trim())).collect()
        }
        fn rect(v: &str) -> std::result::Result<Rect, String> {
            match list(v)?.as_slice() {
                &[x0, y0, x1, y1] => Ok(Rect::new(x0, y0, x1, y1)),
                _ => Err("rect needs x0,y0,x1,y1".into()),
            }
        }
        fn window(v: &str) -> std::result::Result<Window, String> {
            let parts: Vec<usize> = v
                .split(',')
                .map(|s| num(s.trim()))
                .collect::<std::result::Result<_, _>>()?;
            match parts.as_slice() {
                &[start, end] => Ok(Window { start, end }),
                _ => Err("window needs start,end".into()),
            }
        }
        match key {
            "area_width_m" => self.area_width_m = num(value)?,
            "area_height_m" => self.area_height_m = num(value)?,
            "bs_positions" => {
                self.bs_positions = value
                    .split(';')
                    .map(|pair| match list(pair)?.as_slice() {
                        &[x, y] => Ok((x, y)),
                        _ => Err(format!("bad bs position {pair:?}")),
                    })
                    .collect::<std::result::Result<_, String>>()?
            }
            "rb_per_bs" => self.rb_per_bs = num(value)?,
            "num_ue" => self.num_ue = num(value)?,
            "noise_dbm" => self.noise_dbm = num(value)?,
            "fc_ghz" => self.fc_ghz = num(value)?,
            "h_bs_m" => self.h_bs_m = num(value)?,
            "h_ut_m" => self.h_ut_m = num(value)?,
            "tx_power_dbm" => self.tx_power_dbm = num(value)?,
            "interference" => self.interference = num(value)?,
            "tti_ms" => self.tti_ms = num(value)?,
            "ues_per_tti" => self.ues_per_tti = num(value)?,
            "epoch_minutes" => self.epoch_minutes = num(value)?,
            "horizon" => self.horizon = num(value)?,
            "rng_seed" => self.rng_seed = num(value)?,
            "rb_bandwidth_hz" => self.rb_bandwidth_hz = num(value)?,
            "demand_min_bits" => self.demand_min_bits = num(value)?,
            "demand_max_bits" => self.demand_max_bits = num(value)?,
            "residential_zone" => self.residential_zone = rect(value)?,
            "office_zone" => self.office_zone = rect(value)?,
            "morning_window" => self.morning_window = window(value)?,
            "evening_window" => self.evening_window = window(value)?,
            "commute_speed_m_per_epoch" => {
                self.commute_speed_m_per_epoch = match value {
                    "auto" => None,
                    v => Some(num(v)?),
                }
            }
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Renders the config in the format accepted by [`SimConfig::parse`].
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let rect = |r: Rect| format!("{},{},{},{}", r.x0, r.y0, r.x1, r.y1);
        let bs: Vec<String> = self.bs_positions.iter().map(|(x, y)| format!("{x},{y}")).collect();
        let _ = writeln!(s, "area_width_m = {}", self.area_width_m);
        let _ = writeln!(s, "area_height_m = {}", self.area_height_m);
        let _ = writeln!(s, "bs_positions = {}", bs.join(";"));
        let _ = writeln!(s, "rb_per_bs = {}", self.rb_per_bs);
        let _ = writeln!(s, "num_ue = {}", self.num_ue);
        let _ = writeln!(s, "noise_dbm = {}", self.noise_dbm);
        let _ = writeln!(s, "fc_ghz = {}", self.fc_ghz);
        let _ = writeln!(s, "h_bs_m = {}", self.h_bs_m);
        let _ = writeln!(s, "h_ut_m = {}", self.h_ut_m);
        let _ = writeln!(s, "tx_power_dbm = {}", self.tx_power_dbm);
        let _ = writeln!(s, "interference = {}", self.interference);
        let _ = writeln!(s, "tti_ms = {}", self.tti_ms);
        let _ = writeln!(s, "ues_per_tti = {}", self.ues_per_tti);
        let _ = writeln!(s, "epoch_minutes = {}", self.epoch_minutes);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        let _ = writeln!(s, "rb_bandwidth_hz = {}", self.rb_bandwidth_hz);
        let _ = writeln!(s, "demand_min_bits = {}", self.demand_min_bits);
        let _ = writeln!(s, "demand_max_bits = {}", self.demand_max_bits);
        let _ = writeln!(s, "residential_zone = {}", rect(self.residential_zone));
        let _ = writeln!(s, "office_zone = {}", rect(self.office_zone));
        let _ = writeln!(
            s,
            "morning_window = {},{}",
            self.morning_window.start, self.morning_window.end
        );
        let _ = writeln!(
            s,
            "evening_window = {},{}",
            self.evening_window.start, self.evening_window.end
        );
        let speed = self
            .commute_speed_m_per_epoch
            .map_or_else(|| "auto".to_string(), |v| v.to_string());
        let _ = writeln!(s, "commute_speed_m_per_epoch = {speed}");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
        SimConfig::desk_scale().validate().unwrap();
        assert_eq!(SimConfig::default().ttis_per_epoch(), 60_000);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = SimConfig::desk_scale();
        cfg.commute_speed_m_per_epoch = Some(12.5);
        cfg.rb_per_bs = 100;
        let back = SimConfig::parse(&cfg.to_config_text()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = SimConfig::parse("num_ue = 5\nwarp_drive = 9\n").unwrap_err();
        assert!(err.to_string().contains("warp_drive"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = SimConfig::parse("# sweep\n\nnum_ue = 40  # forty\n").unwrap();
        assert_eq!(cfg.num_ue, 40);
    }

    #[test]
    fn rejects_bs_outside_area() {
        let err = SimConfig::parse("bs_positions = 500,375;2500,375").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn rejects_zone_outside_area() {
        let mut cfg = SimConfig::default();
        cfg.office_zone = Rect::new(1000.0, 750.0, 2100.0, 1500.0);
        assert!(cfg.validate().is_err());
    }
}
