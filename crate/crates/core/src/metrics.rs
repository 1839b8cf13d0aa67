//! Performance instrumentation: reliability, convergence rate, the timing
//! decomposition of belief formulation and exchange, and failure rate.

use std::fmt::Write as _;

use thiserror::Error;

use crate::bob::{BeliefClass, ParameterId};
use crate::contact::ContactCounts;
use crate::exchange::ExchangeTiming;
use crate::ids::NodeId;
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("inconsistent timing in {what} #{index}")]
    InconsistentTiming { what: &'static str, index: usize },
}

/// Per-unit stage costs used to price a formation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageCostModel {
    pub capture: SimDuration,
    pub per_behavior: SimDuration,
    pub per_observation: SimDuration,
    /// Cost of scanning one belief-record entry when tracing a resource.
    pub trace_per_entry: SimDuration,
}

impl Default for StageCostModel {
    fn default() -> Self {
        Self {
            capture: SimDuration::from_millis(1),
            per_behavior: SimDuration::from_micros(500),
            per_observation: SimDuration::from_micros(500),
            trace_per_entry: SimDuration::from_micros(10),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TbfBreakdown {
    pub t_bh: SimDuration,
    pub t_ob: SimDuration,
    pub t_bl: SimDuration,
}

impl TbfBreakdown {
    pub fn total(&self) -> SimDuration {
        self.t_bh + self.t_ob + self.t_bl
    }
}

impl StageCostModel {
    /// Time to capture every logged sample once: Σ m_i × capture cost.
    pub fn behavior_capture_time(&self, counts: &[u32]) -> SimDuration {
        let m: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        mul(self.capture, m)
    }

    /// Modeled self-belief formation time.
    ///
    /// Each stage repeats its per-unit cost once per logged capture for every
    /// unit it processes: captured parameter kinds, identified behaviors and
    /// summarized observations respectively.
    pub fn self_belief_time(
        &self,
        counts: &[u32],
        n_behaviors: usize,
        n_observations: usize,
    ) -> TbfBreakdown {
        let m: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        let kinds = counts.iter().filter(|&&c| c > 0).count() as u64;
        TbfBreakdown {
            t_bh: mul(self.capture, kinds * m),
            t_ob: mul(self.per_behavior, n_behaviors as u64 * m),
            t_bl: mul(self.per_observation, n_observations as u64 * m),
        }
    }

    pub fn trace_time(&self, scanned_entries: usize) -> SimDuration {
        mul(self.trace_per_entry, scanned_entries as u64)
    }
}

fn mul(d: SimDuration, k: u64) -> SimDuration {
    d.checked_mul(k)
        .unwrap_or(SimDuration::from_micros(u64::MAX))
}

/// One completed REQ/REP exchange as seen by the requester.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeRecord {
    pub requester: NodeId,
    pub peer: NodeId,
    pub completed_at: SimTime,
    pub timing: ExchangeTiming,
    /// Requester's own formation time if it formed within the current session.
    pub t_bf: SimDuration,
    pub t_tot: SimDuration,
    pub t_tra: SimDuration,
    pub t_con: SimDuration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormationRecord {
    pub node: NodeId,
    pub at: SimTime,
    pub class: BeliefClass,
    pub timing: TbfBreakdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttemptKind {
    Formation,
    Exchange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Attempt {
    pub at: SimTime,
    pub kind: AttemptKind,
    pub failed: bool,
}

/// One CSV row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRow {
    pub t: SimTime,
    pub n_nodes: usize,
    pub counts: ContactCounts,
    pub p_oc: Option<f64>,
    pub xi_ra: f64,
    pub mean_t_bf: Option<f64>,
    pub mean_t_bx: Option<f64>,
    pub mean_t_tot: Option<f64>,
    pub t_avg: Option<f64>,
    pub failure_pct: Option<f64>,
}

pub const CSV_HEADER: &str =
    "t,n_nodes,N_DC,N_OC,N_hom,N_het,P_OC,xi_RA,mean_T_bf,mean_T_bx,mean_T_tot,T_avg,failure_pct";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl MetricsRow {
    /// Times in seconds (`t`) and milliseconds (timing columns).
    pub fn to_csv(&self) -> String {
        format!(
            "{:.6},{},{},{},{},{},{},{:.6},{},{},{},{},{}",
            self.t.as_secs_f64(),
            self.n_nodes,
            self.counts.n_dc,
            self.counts.n_oc,
            self.counts.n_hom,
            self.counts.n_het,
            opt(self.p_oc),
            self.xi_ra,
            opt(self.mean_t_bf),
            opt(self.mean_t_bx),
            opt(self.mean_t_tot),
            opt(self.t_avg),
            opt(self.failure_pct),
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsLedger {
    pub contacts: ContactCounts,
    pub exchanges: Vec<ExchangeRecord>,
    pub formations: Vec<FormationRecord>,
    pub attempts: Vec<Attempt>,
    /// Captures per parameter over the whole run.
    pub captures: [u64; ParameterId::COUNT],
    /// Σ over registered nodes of their registered lifetime, seconds.
    pub node_seconds: f64,
    pub density_samples: Vec<(SimTime, usize)>,
    pub pause_time: SimDuration,
    pub tick: SimDuration,
    /// Install-to-first-exchange delay of every node that completed one.
    pub discovery_latencies: Vec<SimDuration>,
    /// Demand entries seen by scans and how many were met by a contact in the same interval.
    pub demand_entries: u64,
    pub demand_satisfied: u64,
    pub dropped_replies: u64,
    pub rows: Vec<MetricsRow>,
}

impl MetricsLedger {
    pub fn new(pause_time: SimDuration, tick: SimDuration) -> Self {
        Self {
            pause_time,
            tick,
            ..Self::default()
        }
    }

    pub fn csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.to_csv());
        }
        s
    }

    pub fn capture_rates(&self) -> [f64; ParameterId::COUNT] {
        let mut out = [0.0; ParameterId::COUNT];
        if self.node_seconds > 0.0 {
            for (o, &c) in out.iter_mut().zip(&self.captures) {
                *o = c as f64 / self.node_seconds;
            }
        }
        out
    }

    /// Fractions of generated beliefs per class, in [`BeliefClass`] order.
    pub fn belief_fractions(&self) -> Option<[f64; 4]> {
        let mut n = [0u64; 4];
        for f in &self.formations {
            n[f.class.index()] += 1;
        }
        let total: u64 = n.iter().sum();
        (total > 0).then(|| n.map(|k| k as f64 / total as f64))
    }

    /// Share of demand-scan entries satisfied by a contact within the sampling interval.
    pub fn resource_availability(&self) -> Option<f64> {
        (self.demand_entries > 0).then(|| self.demand_satisfied as f64 / self.demand_entries as f64)
    }

    pub fn mean_discovery_latency(&self) -> Option<f64> {
        mean_ms(self.discovery_latencies.iter().copied())
    }

    /// Builds a snapshot row from everything recorded up to `t`; failure
    /// percentage covers attempts since `since`.
    pub fn snapshot(&self, t: SimTime, since: SimTime, n_nodes: usize) -> MetricsRow {
        let in_window = self.attempts.iter().filter(|a| a.at > since && a.at <= t);
        let (mut tried, mut failed) = (0u64, 0u64);
        for a in in_window {
            tried += 1;
            failed += u64::from(a.failed);
        }
        let mean_t_tot = mean_ms(self.exchanges.iter().map(|e| e.t_tot));
        MetricsRow {
            t,
            n_nodes,
            counts: self.contacts,
            p_oc: reliability(&self.contacts),
            xi_ra: convergence_rate(n_nodes, self.pause_time, self.tick),
            mean_t_bf: mean_ms(self.formations.iter().map(|f| f.timing.total())),
            mean_t_bx: mean_ms(self.exchanges.iter().map(|e| e.timing.t_bx)),
            mean_t_tot,
            t_avg: mean_t_tot.map(|m| t_avg(&self.capture_rates(), m)),
            failure_pct: (tried > 0).then(|| 100.0 * failed as f64 / tried as f64),
        }
    }
}

fn mean_ms(it: impl Iterator<Item = SimDuration>) -> Option<f64> {
    let (mut n, mut sum) = (0u64, 0u64);
    for d in it {
        n += 1;
        sum += d.as_micros();
    }
    (n > 0).then(|| sum as f64 / n as f64 / 1_000.0)
}

/// P_OC: share of resourceful opportunistic contacts; absent before any contact.
pub fn reliability(counts: &ContactCounts) -> Option<f64> {
    let total = counts.n_tc();
    (total > 0).then(|| counts.n_roc() as f64 / total as f64)
}

/// ξ_RA in nodes per millisecond. A zero pause time is clamped to one tick.
pub fn convergence_rate(n_d: usize, pause: SimDuration, tick: SimDuration) -> f64 {
    let t_p = pause.max(tick).as_millis_f64();
    if n_d == 0 {
        return 0.0;
    }
    n_d as f64 / t_p
}

/// Capture-rate-weighted mean of T_tot.
pub fn t_avg(rates: &[f64], mean_t_tot: f64) -> f64 {
    rates.iter().sum::<f64>() * mean_t_tot
}

pub fn average_belief_formulation_time(ledger: &MetricsLedger) -> Option<f64> {
    let mean = mean_ms(ledger.exchanges.iter().map(|e| e.t_tot))?;
    Some(t_avg(&ledger.capture_rates(), mean))
}

pub fn convergence_time(t_req: SimDuration, t_tra: SimDuration, t_tot: SimDuration) -> SimDuration {
    t_req + t_tra + t_tot
}

/// Per-bucket failure percentage; buckets without attempts are omitted.
/// Each entry is labeled with its bucket start.
pub fn failure_rate(ledger: &MetricsLedger, bucket: SimDuration) -> Vec<(SimTime, f64)> {
    let width = bucket.as_micros().max(1);
    let mut buckets: std::collections::BTreeMap<u64, (u64, u64)> = Default::default();
    for a in &ledger.attempts {
        let e = buckets.entry(a.at.as_micros() / width).or_default();
        e.0 += 1;
        e.1 += u64::from(a.failed);
    }
    buckets
        .into_iter()
        .map(|(k, (n, f))| (SimTime::from_micros(k * width), 100.0 * f as f64 / n as f64))
        .collect()
}

/// Timing of one exchange as reported by [`timing_rollup`], milliseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeReport {
    pub t_req: f64,
    pub t_rep: f64,
    pub t_bx: f64,
    pub t_bf: f64,
    pub t_tot: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingReport {
    pub exchanges: Vec<ExchangeReport>,
    pub t_bc: SimDuration,
    pub t_bh: SimDuration,
    pub t_ob: SimDuration,
    pub t_bl: SimDuration,
}

/// Checks every timing identity and aggregates the stage sums.
pub fn timing_rollup(
    ledger: &MetricsLedger,
    costs: &StageCostModel,
) -> Result<TimingReport, MetricsError> {
    let mut exchanges = Vec::with_capacity(ledger.exchanges.len());
    for (i, e) in ledger.exchanges.iter().enumerate() {
        let t = &e.timing;
        if t.t_bx != t.t_req + t.t_rep
            || e.t_tot != e.t_bf + t.t_bx
            || e.t_con != t.t_req + e.t_tra + e.t_tot
        {
            return Err(MetricsError::InconsistentTiming {
                what: "exchange",
                index: i,
            });
        }
        exchanges.push(ExchangeReport {
            t_req: t.t_req.as_millis_f64(),
            t_rep: t.t_rep.as_millis_f64(),
            t_bx: t.t_bx.as_millis_f64(),
            t_bf: e.t_bf.as_millis_f64(),
            t_tot: e.t_tot.as_millis_f64(),
        });
    }
    let mut report = TimingReport {
        exchanges,
        t_bc: costs.behavior_capture_time(
            &ledger
                .captures
                .map(|c| u32::try_from(c).unwrap_or(u32::MAX)),
        ),
        t_bh: SimDuration::ZERO,
        t_ob: SimDuration::ZERO,
        t_bl: SimDuration::ZERO,
    };
    for f in &ledger.formations {
        report.t_bh += f.timing.t_bh;
        report.t_ob += f.timing.t_ob;
        report.t_bl += f.timing.t_bl;
    }
    Ok(report)
}
