use crate::curve::RatePowerCurve;
use crate::error::{Error, Result};
use crate::model::{PhaseSchedule, RandomSource};
use crate::policy::{dpp_decide, Policy};

use super::delay::DelayHistogram;
use super::interval::Intervals;
use super::queue::{Discipline, QueueState, StepRecord};

/// Per-phase form of the policy, resolved once before the run.
#[derive(Debug, Clone)]
enum PhaseRule {
    Dpp { v: f64 },
    OmegaOnly(Vec<(f64, f64)>),
}

/// Policy and interval layout specialised to each phase of a schedule.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    rules: Vec<PhaseRule>,
    intervals: Vec<Option<Intervals>>,
    q_place: f64,
}

impl Plan {
    pub(crate) fn new(schedule: &PhaseSchedule, policy: &Policy) -> Result<Self> {
        let mut rules = Vec::new();
        let mut intervals = Vec::new();
        for phase in schedule.phases() {
            match policy {
                Policy::Dpp(cfg) => {
                    if !(cfg.v >= 0.0 && cfg.v.is_finite()) {
                        return Err(Error::InvalidParameter(format!("V = {}", cfg.v)));
                    }
                    rules.push(PhaseRule::Dpp { v: cfg.v });
                    // Intervals only exist when λ is strictly inside a segment.
                    let curve = RatePowerCurve::new(&phase.channel);
                    intervals.push(
                        curve
                            .locate_segment(phase.arrivals.lambda())
                            .ok()
                            .map(|ts| Intervals::new(cfg.v, &ts)),
                    );
                }
                Policy::OmegaOnly(pol) => {
                    pol.check_covers(&phase.channel)?;
                    rules.push(PhaseRule::OmegaOnly(pol.entries().to_vec()));
                    intervals.push(None);
                }
            }
        }
        Ok(Self {
            rules,
            intervals,
            q_place: policy.place_holder(),
        })
    }

    pub(crate) fn q_place(&self) -> f64 {
        self.q_place
    }

    pub(crate) fn intervals(&self, phase: usize) -> Option<&Intervals> {
        self.intervals[phase].as_ref()
    }
}

/// Slot-by-slot state machine shared by single runs and ensembles.
///
/// Random draws per slot, in order: ω(t), a(t), then one uniform for
/// ω-only policies.
pub(crate) struct SlotEngine<'a> {
    schedule: &'a PhaseSchedule,
    plan: &'a Plan,
    discipline: Discipline,
    queue: QueueState,
    rng: RandomSource,
    t: u64,
    phase: usize,
    phase_end: Option<u64>,
}

impl<'a> SlotEngine<'a> {
    pub(crate) fn new(
        schedule: &'a PhaseSchedule,
        plan: &'a Plan,
        discipline: Discipline,
        q0: f64,
        seed: u64,
        track_chunks: bool,
    ) -> Result<Self> {
        if !(q0 >= 0.0 && q0.is_finite()) {
            return Err(Error::InvalidParameter(format!("q0 = {q0}")));
        }
        let queue = if track_chunks {
            QueueState::new(plan.q_place, q0)
        } else {
            QueueState::untracked(plan.q_place, q0)
        };
        let mut engine = Self {
            schedule,
            plan,
            discipline,
            queue,
            rng: RandomSource::new(seed),
            t: 0,
            phase: 0,
            phase_end: None,
        };
        engine.phase_end = engine.end_of(0);
        Ok(engine)
    }

    fn end_of(&self, phase: usize) -> Option<u64> {
        self.schedule.phases()[phase]
            .duration
            .map(|d| self.schedule.phase_start(phase) + d)
    }

    pub(crate) fn queue(&self) -> &QueueState {
        &self.queue
    }

    /// Intervals governing the current slot, if defined.
    pub(crate) fn intervals(&self) -> Option<&Intervals> {
        self.plan.intervals(self.phase)
    }

    pub(crate) fn step(&mut self, delays: Option<&mut DelayHistogram>) -> Result<StepRecord> {
        let t = self.t;
        while self.phase_end.is_some_and(|end| t >= end) {
            if self.phase + 1 == self.schedule.phases().len() {
                return Err(Error::SlotBeyondSchedule {
                    slot: t,
                    end: self.phase_end.unwrap_or(t),
                });
            }
            self.phase += 1;
            self.phase_end = self.end_of(self.phase);
        }
        let phase = &self.schedule.phases()[self.phase];
        let omega = phase.channel.sample(&mut self.rng);
        let a = phase.arrivals.sample(&mut self.rng);
        let q = self.queue.q_total();
        let p = match &self.plan.rules[self.phase] {
            PhaseRule::Dpp { v } => dpp_decide(q, omega, *v),
            PhaseRule::OmegaOnly(entries) => {
                let u = self.rng.uniform();
                let prob = entries
                    .iter()
                    .find(|e| e.0 == omega)
                    .map(|e| e.1)
                    .unwrap_or(0.0);
                u < prob
            }
        };
        let interval = self.intervals().map(|iv| iv.classify(q));
        let mut rec = self.queue.step(t, a, omega, p, self.discipline, delays);
        rec.interval = interval;
        self.t += 1;
        Ok(rec)
    }
}
