//! Minimum recovery time after a single-slot mistake.
//!
//! Slot 0 runs at an arbitrary achievable point (μ₀, p₀). Slots 1..t−1 are
//! summarized by one point (μ₁, h(μ₁)) on the curve, chosen with full
//! knowledge of the statistics. The time average after t slots is the convex
//! combination (1/t)(μ₀, p₀) + (1 − 1/t)(μ₁, h(μ₁)), and the search returns
//! the first t for which some μ₁ lands it in the ε-approximation region
//! {μ̄ ≥ λ − ε, p̄ ≤ h(λ) + ε}.

use crate::curve::RatePowerCurve;
use crate::error::{Error, Result};

/// Default cap on the recovery time search.
pub const DEFAULT_TIME_CAP: u64 = 100_000_000;

const FEASIBILITY_TOLERANCE: f64 = 1e-12;

/// Smallest t ≥ 1 for which the mistake at `initial` can be compensated.
pub fn converse_min_time(
    curve: &RatePowerCurve,
    lambda: f64,
    epsilon: f64,
    initial: (f64, f64),
) -> Result<u64> {
    converse_min_time_capped(curve, lambda, epsilon, initial, DEFAULT_TIME_CAP)
}

pub fn converse_min_time_capped(
    curve: &RatePowerCurve,
    lambda: f64,
    epsilon: f64,
    initial: (f64, f64),
    cap: u64,
) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 64.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let mean = curve.mean_rate();
    let (mu0, p0) = initial;
    let tol = FEASIBILITY_TOLERANCE;
    let inside = mu0 >= -tol
        && mu0 <= mean + tol
        && p0 <= 1.0 + tol
        && curve.h(mu0.clamp(0.0, mean)).is_ok_and(|h| h <= p0 + tol);
    if !inside {
        return Err(Error::InitialPointOutsideRegion { mu: mu0, power: p0 });
    }
    let target_power = curve.h(lambda)? + epsilon;
    let target_rate = lambda - epsilon;

    if mu0 >= target_rate - tol && p0 <= target_power + tol {
        return Ok(1);
    }
    for t in 2..=cap {
        let share = 1.0 / t as f64;
        let rest = 1.0 - share;
        // The cheapest compensating point is the smallest rate meeting the
        // rate constraint, since h is nondecreasing.
        let mu1 = ((target_rate - share * mu0) / rest).max(0.0);
        if mu1 > mean + tol {
            continue;
        }
        let max_power = (target_power - share * p0) / rest;
        if curve.h_clamped(mu1) <= max_power + tol {
            return Ok(t);
        }
    }
    Err(Error::InfeasibleTarget { cap })
}

/// Initial point of a three-state channel {1, 2, 3} under per-state
/// transmit probabilities (θ₁, θ₂, θ₃) on slot 0.
pub fn three_state_initial_point(y: f64, z: f64, theta: [f64; 3]) -> (f64, f64) {
    let pi = [1.0 - y - z, z, y];
    let mu = (0..3).map(|i| pi[i] * (i + 1) as f64 * theta[i]).sum();
    let p = (0..3).map(|i| pi[i] * theta[i]).sum();
    (mu, p)
}
