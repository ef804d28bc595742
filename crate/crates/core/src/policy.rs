//! Power allocation policies.

use crate::curve::RatePowerCurve;
use crate::error::{Error, Result};
use crate::model::ChannelModel;

/// Drift-plus-penalty rule: transmit iff `q_effective · omega ≥ v`.
///
/// The comparison is inclusive, so a zero-rate slot with V = 0 still
/// "transmits" (and moves no data).
#[inline]
pub fn dpp_decide(q_effective: f64, omega: f64, v: f64) -> bool {
    q_effective * omega >= v
}

/// Place-holder backlog max[V/ω_M − ω_M, 0].
pub fn place_holder_backlog(v: f64, omega_max: f64) -> f64 {
    (v / omega_max - omega_max).max(0.0)
}

/// Parameters of the drift-plus-penalty policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DppConfig {
    pub v: f64,
    /// Fake backlog added to the real queue when making decisions.
    pub q_place: f64,
}

impl DppConfig {
    pub fn new(v: f64) -> Self {
        Self { v, q_place: 0.0 }
    }

    /// DPP with place-holder backlog sized for a channel whose top rate is `omega_max`.
    pub fn with_place_holder(v: f64, omega_max: f64) -> Self {
        Self {
            v,
            q_place: place_holder_backlog(v, omega_max),
        }
    }

    /// Whether the analytic guarantees apply (V ≥ ω_M²).
    pub fn meets_analysis_condition(&self, omega_max: f64) -> bool {
        self.v >= omega_max * omega_max
    }
}

/// Stationary randomized policy: Pr[p(t) = 1 | ω(t) = ω] per channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaOnlyPolicy {
    entries: Vec<(f64, f64)>,
}

impl OmegaOnlyPolicy {
    /// Builds a policy from `(state, transmit probability)` pairs.
    pub fn new(entries: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut entries: Vec<(f64, f64)> = entries.into_iter().collect();
        for &(w, p) in &entries {
            if !w.is_finite() {
                return Err(Error::NonFinite(w));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidTransmitProbability(p));
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateState(w[0].0));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Transmit probability for `omega`, if the policy covers that state.
    pub fn transmit_prob(&self, omega: f64) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == omega).map(|e| e.1)
    }

    /// Errors unless every state of `channel` has a probability.
    pub fn check_covers(&self, channel: &ChannelModel) -> Result<()> {
        match channel
            .states()
            .iter()
            .find(|&&w| self.transmit_prob(w).is_none())
        {
            Some(&w) => Err(Error::MissingState(w)),
            None => Ok(()),
        }
    }
}

/// Threshold policy "transmit iff ω(t) ≥ ω_k", which attains vertex k.
pub fn threshold_policy(curve: &RatePowerCurve, k: usize) -> Result<OmegaOnlyPolicy> {
    let m = curve.num_thresholds();
    if k == 0 || k > m {
        return Err(Error::IndexOutOfRange { k, m });
    }
    let cut = curve.omega(k);
    OmegaOnlyPolicy::new(
        curve
            .channel()
            .states()
            .iter()
            .map(|&w| (w, if w > 0.0 && w >= cut { 1.0 } else { 0.0 })),
    )
}

/// ω-only policy reaching rate `target_mu` at power h(target_mu).
///
/// States above the bracketing threshold always transmit; the threshold
/// state itself transmits with the fractional probability that closes the
/// remaining rate gap.
pub fn design_omega_only(curve: &RatePowerCurve, target_mu: f64) -> Result<OmegaOnlyPolicy> {
    let max = curve.mean_rate();
    let tol = 1e-12 * max.max(1.0);
    if !(target_mu >= -tol && target_mu <= max + tol) {
        return Err(Error::RateOutOfRange { mu: target_mu, max });
    }
    let channel = curve.channel();
    let m = curve.num_thresholds();
    if m == 0 {
        return OmegaOnlyPolicy::new(channel.states().iter().map(|&w| (w, 0.0)));
    }
    // Smallest k with μ_{k+1} ≤ target ≤ μ_k, i.e. the segment ending at k.
    let k = (1..=m)
        .rev()
        .find(|&k| target_mu <= curve.mu(k))
        .unwrap_or(1);
    let boundary = curve.omega(k);
    let boundary_prob = channel
        .positive_states()
        .find(|&(w, _)| w == boundary)
        .map(|(_, p)| p)
        .expect("threshold is a channel state");
    let fraction = if target_mu >= curve.mu(k) {
        1.0
    } else {
        ((target_mu - curve.mu(k + 1)) / (boundary * boundary_prob)).clamp(0.0, 1.0)
    };
    OmegaOnlyPolicy::new(channel.states().iter().map(|&w| {
        let p = if w > boundary {
            1.0
        } else if w == boundary {
            fraction
        } else {
            0.0
        };
        (w, p)
    }))
}

/// Expected (rate, power) of an ω-only policy on `channel`.
pub fn policy_expectations(policy: &OmegaOnlyPolicy, channel: &ChannelModel) -> Result<(f64, f64)> {
    policy.check_covers(channel)?;
    let mut mu = 0.0;
    let mut power = 0.0;
    for (&w, &pi) in channel.states().iter().zip(channel.probs()) {
        let x = policy.transmit_prob(w).expect("coverage checked");
        mu += pi * w * x;
        power += pi * x;
    }
    Ok((mu, power))
}

/// A scheduling policy the simulator can run.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Dpp(DppConfig),
    OmegaOnly(OmegaOnlyPolicy),
}

impl Policy {
    pub fn dpp(v: f64) -> Self {
        Policy::Dpp(DppConfig::new(v))
    }

    pub fn dpp_place(v: f64, omega_max: f64) -> Self {
        Policy::Dpp(DppConfig::with_place_holder(v, omega_max))
    }

    pub fn place_holder(&self) -> f64 {
        match self {
            Policy::Dpp(c) => c.q_place,
            Policy::OmegaOnly(_) => 0.0,
        }
    }
}
