//! The near-RT controller: authoritative load table, load broadcast,
//! handover validation and execution, and the per-epoch protocol that ties
//! policies to the environment.
//!
//! Messages travel over an in-process bus; every message can be rendered as
//! one line of the event log (`epoch,type,payload...`).

use std::fmt;

use crate::error::{Error, Result};
use crate::simcore::trace::TraceRow;
use crate::simcore::world::{EpochReport, UeOutcome, World};

pub const EVENT_LOG_HEADER: &str = "# cellbalance-events v1";

/// Per-BS attached-UE counts, stamped with the epoch they describe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadTable {
    pub loads: Vec<usize>,
    pub epoch: Option<usize>,
    pub num_ue: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadMessage {
    pub epoch: usize,
    pub loads: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandoverRequest {
    pub ue: usize,
    pub from: usize,
    pub to: usize,
    pub epoch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictCode {
    Ok,
    NoOp,
    StaleState,
    OverCapacity,
}

impl VerdictCode {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictCode::Ok => "ok",
            VerdictCode::NoOp => "no_op",
            VerdictCode::StaleState => "stale_state",
            VerdictCode::OverCapacity => "over_capacity",
        }
    }
}

impl fmt::Display for VerdictCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub code: VerdictCode,
}

impl Verdict {
    fn of(code: VerdictCode) -> Self {
        Self {
            accepted: code == VerdictCode::Ok,
            code,
        }
    }
}

/// Sends every UE its own copy of the load table.
pub fn broadcast_loads(table: &LoadTable) -> Result<Vec<LoadMessage>> {
    let epoch = table
        .epoch
        .ok_or_else(|| Error::Invariant("load table never stamped".into()))?;
    let total: usize = table.loads.iter().sum();
    if total != table.num_ue {
        return Err(Error::Invariant(format!(
            "load table sums to {total}, expected {} UEs",
            table.num_ue
        )));
    }
    let msg = LoadMessage {
        epoch,
        loads: table.loads.clone(),
    };
    Ok(vec![msg; table.num_ue])
}

/// What a UE sees when deciding.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub ue: usize,
    pub epoch: usize,
    pub current_bs: usize,
    pub rxp_dbm: &'a [f64],
    pub sinrs: &'a [f64],
    /// Mean RBs per TTI received last epoch.
    pub own_rb: f64,
    pub loads: &'a LoadMessage,
}

/// A cell-selection policy driven by the epoch protocol.
pub trait AttachmentPolicy {
    fn name(&self) -> &str;

    fn decide(&mut self, obs: &Observation<'_>) -> Result<usize>;

    /// Outcome of the epoch just run and the UE's observation after it.
    fn feedback(&mut self, _outcome: &UeOutcome, _next: &Observation<'_>) -> Result<()> {
        Ok(())
    }

    fn train(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Ordered message log.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    enabled: bool,
    lines: Vec<String>,
}

impl EventLog {
    pub fn enabled() -> Self {
        Self {
            enabled: true,
            lines: vec![EVENT_LOG_HEADER.to_string()],
        }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn into_lines(self) -> Vec<String> {
        self.lines
    }

    pub fn to_text(&self) -> String {
        let mut s = self.lines.join("\n");
        if !s.is_empty() {
            s.push('\n');
        }
        s
    }

    fn push(&mut self, line: impl FnOnce() -> String) {
        if self.enabled {
            self.lines.push(line());
        }
    }

    fn attach(&mut self, epoch: usize, ue: usize, bs: usize) {
        self.push(|| format!("{epoch},attach,{ue},{bs}"));
    }

    fn load(&mut self, msg: &LoadMessage) {
        self.push(|| {
            let loads: Vec<String> = msg.loads.iter().map(ToString::to_string).collect();
            format!("{},load,{}", msg.epoch, loads.join(";"))
        });
    }

    fn request(&mut self, r: &HandoverRequest) {
        self.push(|| format!("{},req,{},{},{}", r.epoch, r.ue, r.from, r.to));
    }

    fn verdict(&mut self, r: &HandoverRequest, v: Verdict) {
        self.push(|| format!("{},verdict,{},{}", r.epoch, r.ue, v.code));
    }

    fn report(&mut self, report: &EpochReport) {
        if !self.enabled {
            return;
        }
        for u in &report.ues {
            self.lines.push(format!(
                "{},report,{},{},{},{},{},{},{}",
                report.epoch, u.ue, u.serving_bs, u.rbs_per_tti, u.rate_bps, u.achieved_bits, u.demand_bits, u.qos
            ));
        }
    }
}

/// Result of one pass of the epoch protocol.
#[derive(Debug, Clone)]
pub struct EpochOutcome {
    pub report: EpochReport,
    pub requests: Vec<(HandoverRequest, Verdict)>,
    pub handovers: u64,
}

#[derive(Debug, Clone)]
pub struct Coordinator {
    table: LoadTable,
    attachment: Vec<usize>,
    max_attachment: Option<usize>,
    handovers: u64,
    log: EventLog,
}

impl Coordinator {
    /// Takes the census of `world`'s current attachments.
    pub fn new(world: &World, max_attachment: Option<usize>, log: EventLog) -> Self {
        let attachment: Vec<usize> = world.ues.iter().map(|u| u.serving_bs).collect();
        let mut c = Self {
            table: LoadTable {
                loads: world.loads(),
                epoch: None,
                num_ue: world.num_ue(),
            },
            attachment,
            max_attachment,
            handovers: 0,
            log,
        };
        let epoch = world.next_epoch();
        for (ue, &bs) in c.attachment.iter().enumerate() {
            c.log.attach(epoch, ue, bs);
        }
        c
    }

    pub fn table(&self) -> &LoadTable {
        &self.table
    }

    pub fn attachment(&self) -> &[usize] {
        &self.attachment
    }

    pub fn handovers(&self) -> u64 {
        self.handovers
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    /// Stamps the table for `epoch`; stamps must strictly increase.
    pub fn stamp(&mut self, epoch: usize) -> Result<()> {
        if let Some(prev) = self.table.epoch {
            if epoch <= prev {
                return Err(Error::Invariant(format!("stamp {epoch} not after {prev}")));
            }
        }
        self.table.epoch = Some(epoch);
        Ok(())
    }

    pub fn broadcast(&mut self) -> Result<Vec<LoadMessage>> {
        let msgs = broadcast_loads(&self.table)?;
        if let Some(first) = msgs.first() {
            self.log.load(first);
        }
        Ok(msgs)
    }

    pub fn validate_request(&self, req: &HandoverRequest) -> Result<Verdict> {
        let recorded = *self.attachment.get(req.ue).ok_or(Error::UnknownUe(req.ue))?;
        let m = self.table.loads.len();
        for bs in [req.from, req.to] {
            if bs >= m {
                return Err(Error::IndexOutOfRange { index: bs, len: m });
            }
        }
        let code = if req.to == req.from {
            VerdictCode::NoOp
        } else if req.from != recorded {
            VerdictCode::StaleState
        } else if self
            .max_attachment
            .is_some_and(|cap| self.table.loads[req.to] + 1 > cap)
        {
            VerdictCode::OverCapacity
        } else {
            VerdictCode::Ok
        };
        Ok(Verdict::of(code))
    }

    /// Applies an accepted request to the world and the table.
    pub fn execute_handover(&mut self, world: &mut World, req: &HandoverRequest) -> Result<()> {
        let verdict = self.validate_request(req)?;
        if !verdict.accepted {
            return Err(Error::InvalidInput(format!(
                "handover for ue {} not accepted ({})",
                req.ue, verdict.code
            )));
        }
        world.reattach(req.ue, req.to)?;
        self.attachment[req.ue] = req.to;
        self.table.loads[req.from] -= 1;
        self.table.loads[req.to] += 1;
        self.handovers += 1;
        Ok(())
    }

    /// Validates then executes (when accepted) one request, logging both.
    pub fn submit(&mut self, world: &mut World, req: HandoverRequest) -> Result<Verdict> {
        self.log.request(&req);
        let verdict = self.validate_request(&req)?;
        self.log.verdict(&req, verdict);
        if verdict.accepted {
            self.execute_handover(world, &req)?;
        }
        Ok(verdict)
    }

    /// One decision epoch:
    /// 1. broadcast loads;
    /// 2. every UE observes and picks a BS;
    /// 3. requests are validated and executed in ascending UE order;
    /// 4. the environment runs the epoch;
    /// 5. the policy gets rewards and next observations;
    /// 6. the policy trains.
    pub fn epoch_protocol(
        &mut self,
        world: &mut World,
        policy: &mut dyn AttachmentPolicy,
        rows: &[TraceRow],
    ) -> Result<EpochOutcome> {
        let epoch = world.next_epoch();
        self.stamp(epoch)?;
        let msgs = self.broadcast()?;

        let mut requests = Vec::with_capacity(world.num_ue());
        for (ue, msg) in msgs.iter().enumerate() {
            let rxp = world.rxp(ue)?;
            let sinrs = crate::channel::sinr_all(&rxp, world.cfg.noise_dbm, world.cfg.interference)?;
            let current = self.attachment[ue];
            let obs = Observation {
                ue,
                epoch,
                current_bs: current,
                rxp_dbm: &rxp,
                sinrs: &sinrs,
                own_rb: world.ues[ue].rb_obtained_last_epoch,
                loads: msg,
            };
            let to = policy.decide(&obs)?;
            requests.push(HandoverRequest {
                ue,
                from: current,
                to,
                epoch,
            });
        }

        let before = self.handovers;
        let mut verdicts = Vec::with_capacity(requests.len());
        for req in requests {
            let v = self.submit(world, req)?;
            verdicts.push((req, v));
        }

        let report = world.run_epoch(rows)?;
        if report.loads != self.table.loads {
            return Err(Error::Invariant(format!(
                "epoch {epoch}: load table {:?} disagrees with census {:?}",
                self.table.loads, report.loads
            )));
        }
        self.log.report(&report);

        let next = LoadMessage {
            epoch,
            loads: report.loads.clone(),
        };
        for outcome in &report.ues {
            let ue = outcome.ue;
            let rxp = world.rxp(ue)?;
            let sinrs = crate::channel::sinr_all(&rxp, world.cfg.noise_dbm, world.cfg.interference)?;
            let obs = Observation {
                ue,
                epoch,
                current_bs: outcome.serving_bs,
                rxp_dbm: &rxp,
                sinrs: &sinrs,
                own_rb: outcome.rbs_per_tti,
                loads: &next,
            };
            policy.feedback(outcome, &obs)?;
        }
        policy.train()?;

        Ok(EpochOutcome {
            report,
            requests: verdicts,
            handovers: self.handovers - before,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::config::SimConfig;
    use crate::simcore::trace::Trace;

    /// Three UEs at one spot between two cells; UE i starts on BS i % 2.
    fn toy() -> (World, Trace) {
        let cfg = SimConfig {
            num_ue: 3,
            horizon: 4,
            bs_positions: vec![(500.0, 375.0), (1500.0, 375.0)],
            commute_speed_m_per_epoch: Some(0.0),
            ..SimConfig::default()
        };
        let rows = (0..3)
            .flat_map(|ue| {
                (0..4).map(move |epoch| TraceRow {
                    ue,
                    epoch,
                    x: 1000.0,
                    y: 375.0,
                    demand_bits: 1_000_000,
                })
            })
            .collect();
        let trace = Trace::from_rows(rows).unwrap();
        let mut world = World::new(cfg, &trace).unwrap();
        world.reattach(1, 1).unwrap();
        (world, trace)
    }

    fn req(ue: usize, from: usize, to: usize) -> HandoverRequest {
        HandoverRequest { ue, from, to, epoch: 0 }
    }

    #[test]
    fn broadcast_is_identical_for_everyone() {
        let table = LoadTable {
            loads: vec![5, 5, 5, 5],
            epoch: Some(3),
            num_ue: 20,
        };
        let msgs = broadcast_loads(&table).unwrap();
        assert_eq!(msgs.len(), 20);
        assert!(msgs.iter().all(|m| m.loads == [5, 5, 5, 5] && m.epoch == 3));
    }

    #[test]
    fn broadcast_refuses_broken_table() {
        let table = LoadTable {
            loads: vec![5, 5, 5, 4],
            epoch: Some(0),
            num_ue: 20,
        };
        assert!(matches!(broadcast_loads(&table), Err(Error::Invariant(_))));
    }

    #[test]
    fn stamps_strictly_increase() {
        let (world, _) = toy();
        let mut c = Coordinator::new(&world, None, EventLog::disabled());
        c.stamp(0).unwrap();
        c.stamp(1).unwrap();
        assert!(c.stamp(1).is_err());
    }

    #[test]
    fn verdict_taxonomy() {
        let (mut world, _) = toy();
        let mut c = Coordinator::new(&world, None, EventLog::disabled());
        assert_eq!(c.validate_request(&req(0, 0, 0)).unwrap().code, VerdictCode::NoOp);
        assert_eq!(c.submit(&mut world, req(0, 0, 1)).unwrap().code, VerdictCode::Ok);
        // Same UE again in the same epoch, still claiming BS 0.
        assert_eq!(c.validate_request(&req(0, 0, 1)).unwrap().code, VerdictCode::StaleState);
        assert!(matches!(c.validate_request(&req(9, 0, 1)), Err(Error::UnknownUe(9))));
    }

    #[test]
    fn capacity_knob() {
        let (world, _) = toy();
        let c = Coordinator::new(&world, Some(1), EventLog::disabled());
        assert_eq!(c.table().loads, vec![2, 1]);
        let v = c.validate_request(&req(0, 0, 1)).unwrap();
        assert_eq!(v.code, VerdictCode::OverCapacity);
        assert!(!v.accepted);
    }

    #[test]
    fn handover_bookkeeping() {
        let (mut world, _) = toy();
        let mut c = Coordinator::new(&world, None, EventLog::disabled());
        c.submit(&mut world, req(2, 0, 1)).unwrap();
        assert_eq!(c.table().loads, vec![1, 2]);
        assert_eq!(c.handovers(), 1);
        c.submit(&mut world, req(0, 0, 0)).unwrap();
        assert_eq!(c.handovers(), 1);
        assert!(c.execute_handover(&mut world, &req(0, 0, 0)).is_err());
        world.check_partition().unwrap();
        assert_eq!(world.bss[1].rr_queue.back(), Some(&2));
    }

    #[test]
    fn batch_of_distinct_requests() {
        let (mut world, _) = toy();
        let mut c = Coordinator::new(&world, None, EventLog::disabled());
        for r in [req(0, 0, 1), req(1, 1, 0), req(2, 0, 1)] {
            assert!(c.submit(&mut world, r).unwrap().accepted);
        }
        assert_eq!(c.handovers(), 3);
        assert_eq!(c.table().loads.iter().sum::<usize>(), 3);
        assert_eq!(c.table().loads, world.loads());
    }

    struct Stay;
    impl AttachmentPolicy for Stay {
        fn name(&self) -> &str {
            "stay"
        }
        fn decide(&mut self, obs: &Observation<'_>) -> Result<usize> {
            Ok(obs.current_bs)
        }
    }

    #[test]
    fn staying_put_is_a_fixed_point() {
        let (mut world, trace) = toy();
        let mut c = Coordinator::new(&world, None, EventLog::enabled());
        let loads = world.loads();
        for t in 0..4 {
            let out = c.epoch_protocol(&mut world, &mut Stay, &trace.epoch_rows(t)).unwrap();
            assert_eq!(out.handovers, 0);
            assert_eq!(out.report.loads, loads);
            assert!(out.requests.iter().all(|(_, v)| v.code == VerdictCode::NoOp));
        }
        let log = c.log().lines();
        assert_eq!(log[0], EVENT_LOG_HEADER);
        assert_eq!(log[1], "0,attach,0,0");
        assert!(log.iter().any(|l| l == "0,load,2;1"));
        assert!(log.iter().any(|l| l == "3,verdict,2,no_op"));
    }
}
