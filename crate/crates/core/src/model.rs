//! Channel and arrival processes.
//!
//! Both processes are i.i.d. over slots with finite discrete support. A
//! [`PhaseSchedule`] strings several stationary regimes together so the
//! simulator can model abrupt, non-ergodic changes in the statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on the total probability mass of user-supplied distributions.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Normalizes a probability vector after checking it is (close to) a distribution.
fn checked_probs(probs: &[f64]) -> Result<Vec<f64>> {
    for &p in probs {
        if !p.is_finite() {
            return Err(Error::NonFinite(p));
        }
        if p < 0.0 {
            return Err(Error::NegativeProbability(p));
        }
    }
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return Err(Error::NonPositiveProbabilitySum(sum));
    }
    if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::ProbabilitySumMismatch(sum));
    }
    Ok(probs.iter().map(|p| p / sum).collect())
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    // The last positive-mass entry must absorb every uniform draw in [0, 1).
    if let Some(last) = probs.iter().rposition(|&p| p > 0.0) {
        for c in &mut cdf[last..] {
            *c = f64::INFINITY;
        }
    }
    cdf
}

#[inline]
fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// Deterministic random stream owned by a single simulation run.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for run `index` of an ensemble started at `base_seed`.
    pub fn for_run(base_seed: u64, index: u64) -> Self {
        Self::new(base_seed.wrapping_add(index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Distribution of the per-slot transmission rate ω(t).
///
/// States are sorted ascending. A zero-rate state is optional; when present
/// it is the idle state ω₀ and may carry zero probability. Every positive
/// state carries strictly positive probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    states: Vec<f64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl ChannelModel {
    /// Validates and normalizes raw channel statistics.
    ///
    /// States are sorted, positive states with zero probability are dropped,
    /// and probabilities are rescaled to sum to one.
    pub fn new(states: &[f64], probs: &[f64]) -> Result<Self> {
        if states.len() != probs.len() {
            return Err(Error::LengthMismatch {
                values: states.len(),
                probs: probs.len(),
            });
        }
        if states.is_empty() {
            return Err(Error::Empty);
        }
        for &w in states {
            if !w.is_finite() {
                return Err(Error::NonFinite(w));
            }
            if w < 0.0 {
                return Err(Error::NegativeRate(w));
            }
        }
        let probs = checked_probs(probs)?;

        let mut pairs: Vec<(f64, f64)> = states.iter().copied().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateState(w[0].0));
        }
        pairs.retain(|&(w, p)| w == 0.0 || p > 0.0);

        let (states, probs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let cdf = cumulative(&probs);
        Ok(Self { states, probs, cdf })
    }

    /// Single-state channel that always offers rate `omega`.
    pub fn constant(omega: f64) -> Result<Self> {
        Self::new(&[omega], &[1.0])
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of the idle state ω₀ = 0 (zero when it is absent).
    pub fn idle_prob(&self) -> f64 {
        match self.states.first() {
            Some(&0.0) => self.probs[0],
            _ => 0.0,
        }
    }

    /// Positive states ω₁ < … < ω_M with their probabilities.
    pub fn positive_states(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.states
            .iter()
            .copied()
            .zip(self.probs.iter().copied())
            .filter(|&(w, _)| w > 0.0)
    }

    /// Number of positive states M.
    pub fn num_positive(&self) -> usize {
        self.states.iter().filter(|&&w| w > 0.0).count()
    }

    /// Largest rate ω_M.
    pub fn omega_max(&self) -> f64 {
        *self.states.last().expect("validated channel is non-empty")
    }

    /// E[ω(t)], the largest achievable average transmission rate.
    pub fn mean_rate(&self) -> f64 {
        self.states.iter().zip(&self.probs).map(|(w, p)| w * p).sum()
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.states[pick(&self.cdf, rng.uniform())]
    }
}

/// Convenience wrapper matching the validation operation of the model API.
pub fn validate_channel(states: &[f64], probs: &[f64]) -> Result<ChannelModel> {
    ChannelModel::new(states, probs)
}

/// Distribution of the per-slot arrival amount a(t), bounded by `a_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalModel {
    amounts: Vec<f64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    a_max: f64,
    lambda: f64,
}

impl ArrivalModel {
    /// Builds an arrival model; `a_max` defaults to the largest amount.
    pub fn new(amounts: &[f64], probs: &[f64], a_max: Option<f64>) -> Result<Self> {
        if amounts.len() != probs.len() {
            return Err(Error::LengthMismatch {
                values: amounts.len(),
                probs: probs.len(),
            });
        }
        if amounts.is_empty() {
            return Err(Error::Empty);
        }
        for &a in amounts {
            if !a.is_finite() {
                return Err(Error::NonFinite(a));
            }
            if a < 0.0 {
                return Err(Error::NegativeArrival(a));
            }
        }
        let probs = checked_probs(probs)?;

        let mut pairs: Vec<(f64, f64)> = amounts.iter().copied().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Repeated amounts are merged.
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (a, p) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == a => last.1 += p,
                _ => merged.push((a, p)),
            }
        }

        let largest = merged.last().map(|m| m.0).unwrap_or(0.0);
        let a_max = match a_max {
            Some(m) if !m.is_finite() => return Err(Error::NonFinite(m)),
            Some(m) if largest > m => {
                return Err(Error::ArrivalExceedsMax {
                    amount: largest,
                    a_max: m,
                })
            }
            Some(m) => m,
            None => largest,
        };

        let (amounts, probs): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
        let lambda = amounts.iter().zip(&probs).map(|(a, p)| a * p).sum();
        let cdf = cumulative(&probs);
        Ok(Self {
            amounts,
            probs,
            cdf,
            a_max,
            lambda,
        })
    }

    /// Deterministic arrivals of `amount` every slot.
    pub fn constant(amount: f64) -> Result<Self> {
        Self::new(&[amount], &[1.0], None)
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// Mean arrival rate λ = E[a(t)].
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Var[a(t)].
    pub fn variance(&self) -> f64 {
        self.amounts
            .iter()
            .zip(&self.probs)
            .map(|(a, p)| p * (a - self.lambda).powi(2))
            .sum()
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.amounts[pick(&self.cdf, rng.uniform())]
    }
}

/// One stationary regime of a [`PhaseSchedule`].
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    /// Length in slots; `None` means the phase never ends.
    pub duration: Option<u64>,
    pub channel: ChannelModel,
    pub arrivals: ArrivalModel,
}

/// Piecewise-in-time sequence of channel/arrival regimes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    phases: Vec<Phase>,
    /// First slot of each phase.
    starts: Vec<u64>,
}

impl PhaseSchedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::EmptySchedule);
        }
        let mut starts = Vec::with_capacity(phases.len());
        let mut next = 0u64;
        for (i, phase) in phases.iter().enumerate() {
            starts.push(next);
            match phase.duration {
                Some(0) => return Err(Error::ZeroDuration(i)),
                Some(d) => next = next.saturating_add(d),
                None if i + 1 != phases.len() => return Err(Error::UnboundedInnerPhase(i)),
                None => {}
            }
        }
        Ok(Self { phases, starts })
    }

    /// A single phase that lasts forever.
    pub fn stationary(channel: ChannelModel, arrivals: ArrivalModel) -> Self {
        Self {
            phases: vec![Phase {
                duration: None,
                channel,
                arrivals,
            }],
            starts: vec![0],
        }
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// Slot at which phase `index` begins.
    pub fn phase_start(&self, index: usize) -> u64 {
        self.starts[index]
    }

    /// First slot not covered by the schedule, or `None` if it is unbounded.
    pub fn end(&self) -> Option<u64> {
        let last = self.phases.last()?;
        last.duration
            .map(|d| self.starts[self.starts.len() - 1].saturating_add(d))
    }

    /// Index of the phase governing slot `t`.
    pub fn phase_index(&self, t: u64) -> Result<usize> {
        if let Some(end) = self.end() {
            if t >= end {
                return Err(Error::SlotBeyondSchedule { slot: t, end });
            }
        }
        Ok(self.starts.partition_point(|&s| s <= t) - 1)
    }

    /// Models governing slot `t`.
    pub fn active_phase(&self, t: u64) -> Result<(&ChannelModel, &ArrivalModel)> {
        let phase = &self.phases[self.phase_index(t)?];
        Ok((&phase.channel, &phase.arrivals))
    }
}
