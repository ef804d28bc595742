use crate::error::{Error, Result};
use crate::model::PhaseSchedule;
use crate::policy::Policy;

use super::delay::{DelayHistogram, DelayStats};
use super::engine::{Plan, SlotEngine};
use super::queue::{Discipline, StepRecord};
use super::sum::CompensatedSum;

/// Records are thinned to at most this many when `keep_steps` is on.
pub const MAX_KEPT_RECORDS: u64 = 10_000_000;

/// Settings of a single simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub horizon: u64,
    pub discipline: Discipline,
    /// Initial real backlog.
    pub q0: f64,
    pub seed: u64,
    pub track_delays: bool,
    pub keep_steps: bool,
}

impl RunConfig {
    pub fn new(horizon: u64, seed: u64) -> Self {
        Self {
            horizon,
            discipline: Discipline::Fifo,
            q0: 0.0,
            seed,
            track_delays: false,
            keep_steps: false,
        }
    }
}

/// Sample path of one run with prefix sums over slots 0..t−1.
#[derive(Debug, Clone)]
pub struct Trace {
    horizon: u64,
    q_place: f64,
    q0: f64,
    q: Vec<f64>,
    q_real: Vec<f64>,
    cum_mu: Vec<f64>,
    cum_served: Vec<f64>,
    cum_a: Vec<f64>,
    cum_p: Vec<u64>,
    cum_q: Vec<f64>,
    cum_occ: Vec<[u32; 4]>,
    classified: Vec<u64>,
    records: Vec<StepRecord>,
    record_stride: u64,
    delays: Option<DelayStats>,
}

/// Per-path time averages over slots 0..t−1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAverages {
    pub t: u64,
    pub mu_bar: f64,
    pub p_bar: f64,
    pub q_bar: f64,
    pub served_bar: f64,
    pub a_bar: f64,
    /// Fractions of slots with Q(τ) in I1..I4; `None` when the intervals are
    /// undefined on some of those slots.
    pub occupancy: Option<[f64; 4]>,
}

/// Simulates `config.horizon` slots of `policy` on `schedule`.
pub fn run(schedule: &PhaseSchedule, policy: &Policy, config: &RunConfig) -> Result<Trace> {
    if config.horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let plan = Plan::new(schedule, policy)?;
    let mut engine = SlotEngine::new(
        schedule,
        &plan,
        config.discipline,
        config.q0,
        config.seed,
        config.track_delays,
    )?;
    let n = config.horizon as usize;
    let stride = config.horizon.div_ceil(MAX_KEPT_RECORDS).max(1);
    let mut trace = Trace {
        horizon: config.horizon,
        q_place: plan.q_place(),
        q0: config.q0,
        q: Vec::with_capacity(n + 1),
        q_real: Vec::with_capacity(n + 1),
        cum_mu: Vec::with_capacity(n + 1),
        cum_served: Vec::with_capacity(n + 1),
        cum_a: Vec::with_capacity(n + 1),
        cum_p: Vec::with_capacity(n + 1),
        cum_q: Vec::with_capacity(n + 1),
        cum_occ: Vec::with_capacity(n + 1),
        classified: Vec::with_capacity(n + 1),
        records: Vec::new(),
        record_stride: stride,
        delays: None,
    };
    trace.q.push(engine.queue().q_total());
    trace.q_real.push(engine.queue().q_real());
    trace.cum_mu.push(0.0);
    trace.cum_served.push(0.0);
    trace.cum_a.push(0.0);
    trace.cum_p.push(0);
    trace.cum_q.push(0.0);
    trace.cum_occ.push([0; 4]);
    trace.classified.push(0);

    let mut hist = config.track_delays.then(DelayHistogram::default);
    let mut mu = CompensatedSum::default();
    let mut served = CompensatedSum::default();
    let mut a = CompensatedSum::default();
    let mut q = CompensatedSum::default();
    let (mut p, mut classified) = (0u64, 0u64);
    let mut occ = [0u32; 4];
    for _ in 0..config.horizon {
        let rec = engine.step(hist.as_mut())?;
        mu.add(rec.mu_offered);
        served.add(rec.mu_served);
        a.add(rec.a);
        p += rec.p as u64;
        q.add(rec.q_before);
        if let Some(i) = rec.interval {
            occ[i.slot()] += 1;
            classified += 1;
        }
        trace.q.push(rec.q_after);
        trace.q_real.push(engine.queue().q_real());
        trace.cum_mu.push(mu.value());
        trace.cum_served.push(served.value());
        trace.cum_a.push(a.value());
        trace.cum_p.push(p);
        trace.cum_q.push(q.value());
        trace.cum_occ.push(occ);
        trace.classified.push(classified);
        if config.keep_steps && rec.t % stride == 0 {
            trace.records.push(rec);
        }
    }
    if let Some(hist) = hist {
        trace.delays = Some(DelayStats::new(hist, a.value(), engine.queue().undelivered()));
    }
    Ok(trace)
}

impl Trace {
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn q_place(&self) -> f64 {
        self.q_place
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// Total backlog Q(0..=horizon), place-holder included.
    pub fn backlog(&self) -> &[f64] {
        &self.q
    }

    /// Real backlog Q_real(0..=horizon), place-holder excluded.
    pub fn real_backlog(&self) -> &[f64] {
        &self.q_real
    }

    /// Σ_{τ<t} μ(τ) with μ = pω offered.
    pub fn cumulative_rate(&self, t: u64) -> f64 {
        self.cum_mu[t as usize]
    }

    pub fn cumulative_served(&self, t: u64) -> f64 {
        self.cum_served[t as usize]
    }

    pub fn cumulative_arrivals(&self, t: u64) -> f64 {
        self.cum_a[t as usize]
    }

    pub fn cumulative_power(&self, t: u64) -> u64 {
        self.cum_p[t as usize]
    }

    /// Kept step records; every `record_stride()`-th slot.
    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn record_stride(&self) -> u64 {
        self.record_stride
    }

    /// Decision sequence p(0..horizon), when records were kept unthinned.
    pub fn decisions(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.p).collect()
    }

    pub fn delays(&self) -> Option<&DelayStats> {
        self.delays.as_ref()
    }
}

/// Averages of slots 0..t−1 of `trace`.
pub fn time_averages(trace: &Trace, t: u64) -> Result<TimeAverages> {
    if t == 0 || t > trace.horizon {
        return Err(Error::HorizonExceeded {
            t,
            horizon: trace.horizon,
        });
    }
    let i = t as usize;
    let tf = t as f64;
    let occupancy = (trace.classified[i] == t).then(|| trace.cum_occ[i].map(|c| c as f64 / tf));
    Ok(TimeAverages {
        t,
        mu_bar: trace.cum_mu[i] / tf,
        p_bar: trace.cum_p[i] as f64 / tf,
        q_bar: trace.cum_q[i] / tf,
        served_bar: trace.cum_served[i] / tf,
        a_bar: trace.cum_a[i] / tf,
        occupancy,
    })
}

/// Delay summary of a run recorded with delay tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySummary {
    pub arrived: f64,
    pub delivered: f64,
    pub undelivered: f64,
    pub mean: Option<f64>,
    /// `None` when the trimmed share includes undelivered data.
    pub trimmed_mean: Option<f64>,
    pub trim_fraction: f64,
}

pub fn delay_stats(trace: &Trace, trim_fraction: f64) -> Result<DelaySummary> {
    let stats = trace.delays().ok_or_else(|| {
        Error::PreconditionViolated("run was recorded without delay tracking".into())
    })?;
    if !(trim_fraction > 0.0 && trim_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "trim fraction {trim_fraction} outside (0, 1]"
        )));
    }
    if stats.arrived() <= 0.0 {
        return Err(Error::NoArrivals);
    }
    Ok(DelaySummary {
        arrived: stats.arrived(),
        delivered: stats.delivered(),
        undelivered: stats.undelivered(),
        mean: stats.mean(),
        trimmed_mean: stats.trimmed_mean(trim_fraction),
        trim_fraction,
    })
}
