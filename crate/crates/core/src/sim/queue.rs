use std::collections::VecDeque;

use super::delay::DelayHistogram;
use super::interval::Interval;
use super::sum::CompensatedSum;

/// Service order among the real data in the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discipline {
    #[default]
    Fifo,
    Lifo,
}

/// A contiguous amount of real data that arrived on one slot.
///
/// `arrival` is `None` for initial backlog, which is excluded from delay
/// statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chunk {
    pub amount: f64,
    pub arrival: Option<u64>,
}

/// One slot of the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub omega: f64,
    pub a: f64,
    pub p: bool,
    /// Offered service p(t)ω(t).
    pub mu_offered: f64,
    /// Real data that actually departed.
    pub mu_served: f64,
    /// Total backlog Q(t), place-holder included.
    pub q_before: f64,
    /// Total backlog Q(t+1).
    pub q_after: f64,
    /// Interval containing Q(t), when the policy defines them.
    pub interval: Option<Interval>,
}

/// Backlog split into a constant place-holder part and real data.
///
/// The real backlog is kept as a scalar so that its trajectory does not
/// depend on the chunk bookkeeping; chunks only drive delay accounting.
#[derive(Debug, Clone)]
pub struct QueueState {
    q_place: f64,
    q_real: CompensatedSum,
    chunks: VecDeque<Chunk>,
    track_chunks: bool,
}

impl QueueState {
    /// Queue with `q0` units of initial real backlog and chunk tracking.
    pub fn new(q_place: f64, q0: f64) -> Self {
        let mut chunks = VecDeque::new();
        if q0 > 0.0 {
            chunks.push_back(Chunk {
                amount: q0,
                arrival: None,
            });
        }
        Self {
            q_place,
            q_real: CompensatedSum::new(q0),
            chunks,
            track_chunks: true,
        }
    }

    /// Queue that only tracks backlog totals.
    pub fn untracked(q_place: f64, q0: f64) -> Self {
        Self {
            q_place,
            q_real: CompensatedSum::new(q0),
            chunks: VecDeque::new(),
            track_chunks: false,
        }
    }

    /// Q(t) = q_place + Q_real(t).
    #[inline]
    pub fn q_total(&self) -> f64 {
        self.q_place + self.q_real.value()
    }

    pub fn q_real(&self) -> f64 {
        self.q_real.value()
    }

    pub fn q_place(&self) -> f64 {
        self.q_place
    }

    pub fn chunks(&self) -> &VecDeque<Chunk> {
        &self.chunks
    }

    /// Real data still queued that arrived during the run.
    pub fn undelivered(&self) -> f64 {
        self.chunks
            .iter()
            .filter(|c| c.arrival.is_some())
            .map(|c| c.amount)
            .sum()
    }

    /// Advances one slot: serve min(Q_real, pω) real units, then enqueue `a`.
    ///
    /// Data arriving on slot `t` joins after service and cannot leave on
    /// slot `t`, so Q_real(t+1) = max[Q_real(t) − pω, 0] + a.
    pub fn step(
        &mut self,
        t: u64,
        a: f64,
        omega: f64,
        p: bool,
        discipline: Discipline,
        delays: Option<&mut DelayHistogram>,
    ) -> StepRecord {
        let q_before = self.q_total();
        let mu_offered = if p { omega } else { 0.0 };
        let q_real = self.q_real.value();
        let mu_served = mu_offered.min(q_real);
        if q_real > mu_offered {
            self.q_real.add(-mu_offered);
        } else {
            self.q_real = CompensatedSum::default();
        }
        self.q_real.add(a);

        if self.track_chunks {
            self.depart(t, mu_served, discipline, delays);
            if a > 0.0 {
                self.chunks.push_back(Chunk {
                    amount: a,
                    arrival: Some(t),
                });
            }
        }

        StepRecord {
            t,
            omega,
            a,
            p,
            mu_offered,
            mu_served,
            q_before,
            q_after: self.q_total(),
            interval: None,
        }
    }

    fn depart(
        &mut self,
        t: u64,
        mut amount: f64,
        discipline: Discipline,
        mut delays: Option<&mut DelayHistogram>,
    ) {
        while amount > 0.0 {
            let chunk = match discipline {
                Discipline::Fifo => self.chunks.front_mut(),
                Discipline::Lifo => self.chunks.back_mut(),
            };
            let Some(chunk) = chunk else { break };
            let take = chunk.amount.min(amount);
            if let (Some(hist), Some(arrival)) = (delays.as_deref_mut(), chunk.arrival) {
                hist.record(t - arrival, take);
            }
            chunk.amount -= take;
            amount -= take;
            if chunk.amount <= 0.0 {
                match discipline {
                    Discipline::Fifo => self.chunks.pop_front(),
                    Discipline::Lifo => self.chunks.pop_back(),
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_service() {
        let mut q = QueueState::new(0.0, 5.0);
        let r = q.step(0, 2.0, 3.0, true, Discipline::Fifo, None);
        assert_eq!((r.q_after, r.mu_served, r.mu_offered), (4.0, 3.0, 3.0));
    }

    #[test]
    fn service_clamped_at_empty_queue() {
        let mut q = QueueState::new(0.0, 1.0);
        let r = q.step(0, 0.0, 2.0, true, Discipline::Fifo, None);
        assert_eq!((r.q_after, r.mu_offered, r.mu_served), (0.0, 2.0, 1.0));
    }

    #[test]
    fn arrivals_wait_at_least_one_slot() {
        let mut q = QueueState::new(0.0, 0.0);
        let mut hist = DelayHistogram::default();
        let r = q.step(0, 2.0, 5.0, true, Discipline::Fifo, Some(&mut hist));
        assert_eq!((r.mu_served, r.q_after), (0.0, 2.0));
        let r = q.step(1, 0.0, 5.0, true, Discipline::Fifo, Some(&mut hist));
        assert_eq!((r.mu_served, r.q_after), (2.0, 0.0));
        assert_eq!(hist.bins(), &[0.0, 2.0]);
    }

    #[test]
    fn disciplines_serve_opposite_ends() {
        let run = |d| {
            let mut q = QueueState::new(0.0, 0.0);
            let mut hist = DelayHistogram::default();
            q.step(0, 1.0, 0.0, false, d, Some(&mut hist));
            q.step(1, 1.0, 0.0, false, d, Some(&mut hist));
            q.step(2, 0.0, 1.5, true, d, Some(&mut hist));
            (hist, q)
        };
        let (fifo, fq) = run(Discipline::Fifo);
        let (lifo, lq) = run(Discipline::Lifo);
        // FIFO: slot-0 unit waits 2 slots, half of the slot-1 unit waits 1.
        assert_eq!(fifo.bins(), &[0.0, 0.5, 1.0]);
        assert_eq!(lifo.bins(), &[0.0, 1.0, 0.5]);
        assert_eq!(fq.q_real(), lq.q_real());
        assert_eq!(fq.undelivered(), 0.5);
    }

    #[test]
    fn place_holder_is_never_served() {
        let mut q = QueueState::new(3.0, 0.0);
        let r = q.step(0, 0.0, 2.0, true, Discipline::Fifo, None);
        assert_eq!((r.q_before, r.mu_served, r.q_after), (3.0, 0.0, 3.0));
    }

    #[test]
    fn initial_backlog_is_excluded_from_delays() {
        let mut q = QueueState::new(0.0, 2.0);
        let mut hist = DelayHistogram::default();
        q.step(0, 0.0, 2.0, true, Discipline::Fifo, Some(&mut hist));
        assert!(hist.bins().is_empty());
        assert_eq!(q.q_real(), 0.0);
    }
}
