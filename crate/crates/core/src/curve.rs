//! Minimum-power curve h(μ) of a finite-state channel.
//!
//! With on/off power and a finite channel alphabet, h is piecewise linear and
//! convex. Its corners are the threshold policies "transmit iff ω(t) ≥ ω_k",
//! which reach rate μ_k = Σ_{i≥k} ω_i π(ω_i) at power Σ_{i≥k} π(ω_i).
//!
//! Thresholds are indexed 1..=M over the positive channel states. Index M+1
//! stands for the origin (an infinite threshold) and index 0 for the idle
//! state, whose rate is zero whether or not the channel lists it.

use crate::error::{Error, Result};
use crate::model::ChannelModel;

/// Relative tolerance used to decide that an arrival rate sits on a vertex.
pub const VERTEX_TOLERANCE: f64 = 1e-9;

/// A corner (μ_k, h(μ_k)) of the curve. The origin carries `k = M + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexPoint {
    pub k: usize,
    pub mu: f64,
    pub power: f64,
}

/// Piecewise-linear minimum-power curve, vertices ordered by increasing rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePowerCurve {
    channel: ChannelModel,
    thresholds: Vec<f64>,
    vertices: Vec<VertexPoint>,
}

impl RatePowerCurve {
    pub fn new(channel: &ChannelModel) -> Self {
        let positive: Vec<(f64, f64)> = channel.positive_states().collect();
        let m = positive.len();
        let mut vertices = Vec::with_capacity(m + 1);
        vertices.push(VertexPoint {
            k: m + 1,
            mu: 0.0,
            power: 0.0,
        });
        let (mut mu, mut power) = (0.0, 0.0);
        for (idx, &(w, p)) in positive.iter().enumerate().rev() {
            mu += w * p;
            power += p;
            vertices.push(VertexPoint {
                k: idx + 1,
                mu,
                power,
            });
        }
        Self {
            channel: channel.clone(),
            thresholds: positive.iter().map(|&(w, _)| w).collect(),
            vertices,
        }
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    /// Vertices from the origin up to (E[ω], 1 − π(ω₀)).
    pub fn vertices(&self) -> &[VertexPoint] {
        &self.vertices
    }

    /// Number of positive channel states M.
    pub fn num_thresholds(&self) -> usize {
        self.thresholds.len()
    }

    /// Threshold rate ω_k with sentinels ω₀ = 0 and ω_{M+1} = ∞.
    pub fn omega(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            k if k <= self.thresholds.len() => self.thresholds[k - 1],
            _ => f64::INFINITY,
        }
    }

    fn vertex(&self, k: usize) -> &VertexPoint {
        let m = self.thresholds.len();
        assert!((1..=m + 1).contains(&k), "vertex index {k} outside 1..={}", m + 1);
        &self.vertices[m + 1 - k]
    }

    /// μ_k for k in 1..=M+1.
    pub fn mu(&self, k: usize) -> f64 {
        self.vertex(k).mu
    }

    /// h(μ_k) for k in 1..=M+1.
    pub fn power(&self, k: usize) -> f64 {
        self.vertex(k).power
    }

    pub fn mean_rate(&self) -> f64 {
        self.vertices.last().map(|v| v.mu).unwrap_or(0.0)
    }

    /// Slopes of the linear pieces, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.vertices
            .windows(2)
            .map(|w| (w[1].power - w[0].power) / (w[1].mu - w[0].mu))
            .collect()
    }

    /// Minimum average power needed for average rate `mu`.
    pub fn h(&self, mu: f64) -> Result<f64> {
        let max = self.mean_rate();
        let tol = 1e-12 * max.max(1.0);
        if !(mu >= -tol && mu <= max + tol) {
            return Err(Error::RateOutOfRange { mu, max });
        }
        Ok(self.h_clamped(mu))
    }

    /// h(μ) with μ clamped into the domain.
    pub(crate) fn h_clamped(&self, mu: f64) -> f64 {
        let v = &self.vertices;
        let i = v.partition_point(|p| p.mu < mu);
        if i == 0 {
            return 0.0;
        }
        if i == v.len() {
            return v[v.len() - 1].power;
        }
        if v[i].mu == mu {
            return v[i].power;
        }
        let (lo, hi) = (&v[i - 1], &v[i]);
        lo.power + (mu - lo.mu) * (hi.power - lo.power) / (hi.mu - lo.mu)
    }

    /// Finds the segment μ_{b+1} < λ < μ_b and the timeshare that reaches (λ, h(λ)).
    pub fn locate_segment(&self, lambda: f64) -> Result<TimeshareSolution> {
        let max = self.mean_rate();
        let m = self.thresholds.len();
        let tol = VERTEX_TOLERANCE * max.max(f64::MIN_POSITIVE);
        if !lambda.is_finite() || lambda < -tol || lambda > max + tol {
            return Err(Error::LambdaOutOfRange { lambda, max });
        }
        if let Some(v) = self.vertices.iter().find(|v| (v.mu - lambda).abs() <= tol) {
            return Err(Error::LambdaAtVertex { lambda, k: v.k });
        }
        // Vertices are ascending in rate, so the segment above λ ends at k = b.
        let upper = self.vertices.partition_point(|v| v.mu < lambda);
        let b = m + 1 - upper;
        let (mu_b, mu_b1) = (self.mu(b), self.mu(b + 1));
        let (h_b, h_b1) = (self.power(b), self.power(b + 1));
        let theta = (mu_b - lambda) / (mu_b - mu_b1);
        Ok(TimeshareSolution {
            b,
            lambda,
            theta,
            p_star: theta * h_b1 + (1.0 - theta) * h_b,
            mu_b,
            mu_b_plus_1: mu_b1,
            power_b: h_b,
            power_b_plus_1: h_b1,
            omega_b: self.omega(b),
            omega_b_minus_1: self.omega(b - 1),
            omega_b_plus_1: self.omega(b + 1),
            omega_max: self.channel.omega_max(),
            mean_rate: max,
        })
    }
}

/// Optimal operating point for an arrival rate strictly inside segment b.
///
/// `omega_b_minus_1` is 0 when b = 1 and `omega_b_plus_1` is ∞ when b = M, so
/// that V/ω_{b−1} = ∞ and V/ω_{b+1} = 0 fall out of plain float division.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeshareSolution {
    pub b: usize,
    pub lambda: f64,
    /// Fraction of time spent at vertex b+1.
    pub theta: f64,
    /// Minimum average power h(λ).
    pub p_star: f64,
    pub mu_b: f64,
    pub mu_b_plus_1: f64,
    pub power_b: f64,
    pub power_b_plus_1: f64,
    pub omega_b: f64,
    pub omega_b_minus_1: f64,
    pub omega_b_plus_1: f64,
    pub omega_max: f64,
    pub mean_rate: f64,
}

impl TimeshareSolution {
    /// Left drift constant β_L = λ − μ_{b+1}.
    pub fn beta_left(&self) -> f64 {
        self.lambda - self.mu_b_plus_1
    }

    /// Right drift constant β_R = μ_b − λ.
    pub fn beta_right(&self) -> f64 {
        self.mu_b - self.lambda
    }
}
