//! Drift constants, exponential-moment and occupancy bounds, and their
//! comparison against ensemble estimates.
//!
//! All logarithms are natural.

use crate::curve::{RatePowerCurve, TimeshareSolution};
use crate::error::{Error, Result};
use crate::model::{ArrivalModel, ChannelModel, PhaseSchedule};
use crate::policy::{place_holder_backlog, Policy};
use crate::sim::{ensemble, EnsembleConfig, EnsembleResult, Series};

/// Constants of the exponential drift bound for a process with one-slot
/// changes bounded by `delta_max` and drift at most −β at or above
/// `theta_threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParams {
    pub delta_max: f64,
    pub beta: f64,
    pub theta_threshold: f64,
    /// r = β/(δ² + δβ/3).
    pub r: f64,
    /// ρ = 1 − rβ/2.
    pub rho: f64,
    /// D = (e^{rδ} − ρ)e^{rθ}/(1 − ρ).
    pub d_const: f64,
}

/// Largest one-slot backlog change max[ω_M, a_max].
pub fn delta_max(channel: &ChannelModel, arrivals: &ArrivalModel) -> f64 {
    channel.omega_max().max(arrivals.a_max())
}

/// (β_L, β_R) = (λ − μ_{b+1}, μ_b − λ).
pub fn drift_constants(ts: &TimeshareSolution) -> (f64, f64) {
    (ts.beta_left(), ts.beta_right())
}

pub fn drift_params(beta: f64, delta_max: f64, theta_threshold: f64) -> Result<DriftParams> {
    if !(delta_max > 0.0 && delta_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta_max = {delta_max}")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta}")));
    }
    if beta > delta_max {
        return Err(Error::BetaExceedsDelta { beta, delta_max });
    }
    if !theta_threshold.is_finite() {
        return Err(Error::NonFinite(theta_threshold));
    }
    let d = delta_max;
    let r = beta / (d * d + d * beta / 3.0);
    let rho = 1.0 - r * beta / 2.0;
    let rd = r * d;
    let lhs = rd * rd / (2.0 * (1.0 - rd / 3.0));
    let rhs = r * beta / 2.0;
    if !(rd > 0.0 && rd < 3.0) || lhs > rhs * (1.0 + 1e-12) {
        return Err(Error::PreconditionViolated(format!(
            "exponent r = {r} fails the drift inequality"
        )));
    }
    let d_const = ((rd).exp() - rho) * (r * theta_threshold).exp() / (1.0 - rho);
    Ok(DriftParams {
        delta_max: d,
        beta,
        theta_threshold,
        r,
        rho,
        d_const,
    })
}

/// Bound D + (e^{r z0} − D)ρ^t on E[e^{rZ(t)}].
pub fn exp_moment_bound(params: &DriftParams, z0: f64, t: u64) -> f64 {
    let DriftParams { r, rho, d_const, .. } = *params;
    if t == 0 {
        return (r * z0).exp();
    }
    d_const + ((r * z0).exp() - d_const) * rho.powf(t as f64)
}

/// Bound on (1/t)Σ_{τ<t} E[1{Z(τ) ≥ θ + c}] using a transient window of
/// `big_t` slots. With `z0 ≤ θ` and `big_t = 0` the sharper closed form
/// e^{−rc}(e^{rδ} − ρ + 1/t)/(1 − ρ) is returned.
pub fn occupancy_bound(params: &DriftParams, c: f64, big_t: u64, t: u64, z0: f64) -> Result<f64> {
    if big_t >= t {
        return Err(Error::InvalidWindow { big_t, t });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("c = {c}")));
    }
    let DriftParams {
        r,
        rho,
        delta_max,
        theta_threshold,
        ..
    } = *params;
    let tf = t as f64;
    let steady = ((r * delta_max).exp() - rho) * (-r * c).exp() / (1.0 - rho);
    if big_t == 0 && z0 <= theta_threshold {
        return Ok((-r * c).exp() * ((r * delta_max).exp() - rho + 1.0 / tf) / (1.0 - rho));
    }
    let tail = (r * (z0 - c - theta_threshold) + big_t as f64 * rho.ln()).exp() / (tf * (1.0 - rho));
    Ok(steady + big_t as f64 / tf + tail)
}

fn require_analysis_regime(v: f64, ts: &TimeshareSolution) -> Result<()> {
    let wm = ts.omega_max;
    if !(v >= wm * wm) {
        return Err(Error::PreconditionViolated(format!(
            "V = {v} is below omega_M^2 = {}",
            wm * wm
        )));
    }
    Ok(())
}

/// Drift parameters to the right of V/ω_b (Z = Q, β = β_R, θ = V/ω_b).
pub fn right_params(v: f64, ts: &TimeshareSolution, delta_max: f64) -> Result<DriftParams> {
    drift_params(ts.beta_right(), delta_max, v / ts.omega_b)
}

/// Drift parameters to the left of V/ω_b (Z = V/ω_b − Q, β = β_L). The
/// threshold is the limit θ → 0⁺.
pub fn left_params(ts: &TimeshareSolution, delta_max: f64) -> Result<DriftParams> {
    drift_params(ts.beta_left(), delta_max, 0.0)
}

/// Time-independent bound on E[Q(t)], valid for 0 ≤ q0 ≤ V/ω_b.
pub fn queue_mean_bound(v: f64, ts: &TimeshareSolution, right: &DriftParams) -> Result<f64> {
    require_analysis_regime(v, ts)?;
    let DriftParams {
        r, rho, delta_max, ..
    } = *right;
    Ok(v / ts.omega_b + (1.0 + ((r * delta_max).exp() - rho) / (1.0 - rho)).ln() / r)
}

/// Bound on the I4 occupancy 1̄⁽⁴⁾(t); zero when I4 is empty.
pub fn i4_bound(v: f64, ts: &TimeshareSolution, right: &DriftParams, t: u64) -> Result<f64> {
    require_analysis_regime(v, ts)?;
    if t == 0 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    if ts.omega_b_minus_1 == 0.0 {
        return Ok(0.0);
    }
    let DriftParams {
        r, rho, delta_max, ..
    } = *right;
    let c = v * (1.0 / ts.omega_b_minus_1 - 1.0 / ts.omega_b);
    Ok((-r * c).exp() * ((r * delta_max).exp() - rho + 1.0 / t as f64) / (1.0 - rho))
}

/// Terms of the I1 occupancy bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I1Bound {
    /// (e^{rδ} − ρ)e^{−rc}/(1 − ρ) with c = V/ω_b − V/ω_{b+1}.
    pub steady: f64,
    /// Transient window T = ⌈xV⌉, x = r/(ω_{b+1} ln(1/ρ)).
    pub window: u64,
    /// T/t.
    pub window_term: f64,
    /// e^{rV/ω_{b+1}}ρ^T/(t(1 − ρ)).
    pub residual: f64,
    pub total: f64,
}

/// Bound on the I1 occupancy 1̄⁽¹⁾(t); zero when I1 is empty.
pub fn i1_bound(v: f64, ts: &TimeshareSolution, left: &DriftParams, t: u64) -> Result<I1Bound> {
    require_analysis_regime(v, ts)?;
    if t == 0 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    if ts.omega_b_plus_1.is_infinite() {
        return Ok(I1Bound {
            steady: 0.0,
            window: 0,
            window_term: 0.0,
            residual: 0.0,
            total: 0.0,
        });
    }
    let DriftParams {
        r, rho, delta_max, ..
    } = *left;
    let tf = t as f64;
    let c = v / ts.omega_b - v / ts.omega_b_plus_1;
    let steady = ((r * delta_max).exp() - rho) * (-r * c).exp() / (1.0 - rho);
    let x = r / (ts.omega_b_plus_1 * (1.0 / rho).ln());
    let window = (x * v).ceil() as u64;
    let window_term = window as f64 / tf;
    let residual = (r * v / ts.omega_b_plus_1 + window as f64 * rho.ln()).exp() / (tf * (1.0 - rho));
    Ok(I1Bound {
        steady,
        window,
        window_term,
        residual,
        total: steady + window_term + residual,
    })
}

/// Bracket (lower, upper) around θ for 1̄⁽²⁾(t), given the I1 and I4
/// occupancies and ψ(t) = E[Q(t) − q0]/t.
pub fn occupancy_timeshare_bounds(ts: &TimeshareSolution, occ1: f64, occ4: f64, psi: f64) -> (f64, f64) {
    let gap = ts.mu_b - ts.mu_b_plus_1;
    (
        ts.theta - (ts.mu_b * occ1 - psi) / gap,
        ts.theta + (occ4 * ts.mean_rate + psi) / gap,
    )
}

/// γ = min[r_R(1/ω_{b−1} − 1/ω_b), r_L(1/ω_b − 1/ω_{b+1})], with 1/0 = ∞.
pub fn gamma(ts: &TimeshareSolution, right: &DriftParams, left: &DriftParams) -> f64 {
    let inv = |w: f64| if w == 0.0 { f64::INFINITY } else { 1.0 / w };
    let a = right.r * (inv(ts.omega_b_minus_1) - 1.0 / ts.omega_b);
    let b = left.r * (1.0 / ts.omega_b - inv(ts.omega_b_plus_1));
    a.min(b)
}

/// V(ε) = max[ln(1/ε)/γ, ω_M²] and T_ε = ln(1/ε)/ε.
pub fn tuning(epsilon: f64, gamma: f64, omega_max: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if !(gamma > 0.0) {
        return Err(Error::GammaNonpositive(gamma));
    }
    let log = (1.0 / epsilon).ln();
    Ok(((log / gamma).max(omega_max * omega_max), log / epsilon))
}

/// Direction of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// empirical ≤ analytic.
    AtMost,
    /// empirical ≥ analytic.
    AtLeast,
    /// empirical = analytic.
    Equal,
}

/// Verdict tolerance in standard errors.
pub const SE_MULTIPLIER: f64 = 3.0;

/// Analytic bound against a Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub quantity: String,
    pub sense: Sense,
    /// Slot at which the comparison is made.
    pub t: u64,
    pub analytic: f64,
    pub empirical: f64,
    pub se: f64,
    /// Signed distance to violation; negative means the bound is exceeded.
    pub slack: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(quantity: impl Into<String>, sense: Sense, t: u64, analytic: f64, empirical: f64, se: f64) -> Self {
        let slack = match sense {
            Sense::AtMost => analytic - empirical,
            Sense::AtLeast => empirical - analytic,
            Sense::Equal => -(empirical - analytic).abs(),
        };
        let pass = match sense {
            Sense::Equal => (empirical - analytic).abs() <= SE_MULTIPLIER * se,
            _ => slack >= -SE_MULTIPLIER * se,
        };
        Self {
            quantity: quantity.into(),
            sense,
            t,
            analytic,
            empirical,
            se,
            slack,
            pass,
        }
    }

    /// Slack in units of standard error (infinite when se = 0 and slack ≥ 0).
    fn margin(&self) -> f64 {
        if self.se > 0.0 {
            self.slack / self.se
        } else if self.slack >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Settings of [`verify_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub v: f64,
    pub horizon: u64,
    pub n_runs: u64,
    pub base_seed: u64,
    /// Initial real backlog.
    pub q0: f64,
    pub place_holder: bool,
    /// Multiplier applied to r in the exponential-moment comparison only.
    /// Values other than 1 are a negative control.
    pub exp_rate_scale: f64,
}

impl VerifyConfig {
    pub fn new(v: f64, horizon: u64, n_runs: u64, base_seed: u64) -> Self {
        Self {
            v,
            horizon,
            n_runs,
            base_seed,
            q0: 0.0,
            place_holder: false,
            exp_rate_scale: 1.0,
        }
    }
}

/// Analytic quantities used by [`verify_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSetup {
    pub ts: TimeshareSolution,
    pub right: DriftParams,
    pub left: DriftParams,
    pub delta_max: f64,
    pub gamma: f64,
    /// Q(0), place-holder included.
    pub q_initial: f64,
    /// Level c above V/ω_b used for the tail-occupancy comparison.
    pub tail_c: f64,
}

/// Validates preconditions and computes all analytic constants.
pub fn bound_setup(schedule: &PhaseSchedule, cfg: &VerifyConfig) -> Result<BoundSetup> {
    let [phase] = schedule.phases() else {
        return Err(Error::PreconditionViolated(
            "bounds apply to a single stationary phase".into(),
        ));
    };
    let curve = RatePowerCurve::new(&phase.channel);
    let lambda = phase.arrivals.lambda();
    if lambda > curve.mean_rate() {
        return Err(Error::Infeasible {
            lambda,
            mean_rate: curve.mean_rate(),
        });
    }
    let ts = curve.locate_segment(lambda)?;
    require_analysis_regime(cfg.v, &ts)?;
    let dmax = delta_max(&phase.channel, &phase.arrivals);
    let right = right_params(cfg.v, &ts, dmax)?;
    let left = left_params(&ts, dmax)?;
    let q_place = if cfg.place_holder {
        place_holder_backlog(cfg.v, ts.omega_max)
    } else {
        0.0
    };
    let q_initial = q_place + cfg.q0;
    if !(q_initial >= 0.0 && q_initial <= cfg.v / ts.omega_b) {
        return Err(Error::PreconditionViolated(format!(
            "initial backlog {q_initial} outside [0, V/omega_b]"
        )));
    }
    Ok(BoundSetup {
        gamma: gamma(&ts, &right, &left),
        ts,
        right,
        left,
        delta_max: dmax,
        q_initial,
        tail_c: cfg.v / (2.0 * ts.omega_b),
    })
}

/// Runs an ensemble of DPP sample paths and compares every bound against it.
pub fn verify_bounds(schedule: &PhaseSchedule, cfg: &VerifyConfig) -> Result<Vec<BoundReport>> {
    let setup = bound_setup(schedule, cfg)?;
    let policy = if cfg.place_holder {
        Policy::dpp_place(cfg.v, setup.ts.omega_max)
    } else {
        Policy::dpp(cfg.v)
    };
    let mut ens_cfg = EnsembleConfig::new(cfg.horizon, cfg.n_runs, cfg.base_seed);
    ens_cfg.q0 = cfg.q0;
    ens_cfg.exp_rates = vec![setup.right.r * cfg.exp_rate_scale];
    ens_cfg.tail_levels = vec![cfg.v / setup.ts.omega_b + setup.tail_c];
    let ens = ensemble(schedule, &policy, &ens_cfg)?;
    compare(&setup, cfg, &ens)
}

/// Builds all reports from a finished ensemble.
pub fn compare(setup: &BoundSetup, cfg: &VerifyConfig, ens: &EnsembleResult) -> Result<Vec<BoundReport>> {
    let BoundSetup {
        ts, right, left, q_initial, tail_c, ..
    } = *setup;
    let v = cfg.v;
    let horizon = ens.horizon;
    let mut out = Vec::new();

    // Pointwise claims: report the slot where the bound is closest to failing.
    let q_bound = queue_mean_bound(v, &ts, &right)?;
    out.push(worst_pointwise("E[Q(t)] (queue mean)", 0..=horizon, &ens.q, |_| q_bound));

    let mut scaled = right;
    scaled.r *= cfg.exp_rate_scale;
    let series = ens
        .exp_moments
        .first()
        .ok_or_else(|| Error::InvalidParameter("ensemble has no exponential moments".into()))?;
    out.push(worst_pointwise("E[exp(rQ(t))] (exponential moment)", 0..=horizon, series, |t| {
        exp_moment_bound(&scaled, q_initial, t)
    }));

    // Time-average claims over slots 1..=horizon.
    let slots = 1..=horizon;
    let tail_series = &ens.tail_bar[0];
    out.push(worst_pointwise("tail occupancy Q >= V/w_b + c", slots.clone(), tail_series, |t| {
        occupancy_bound(&right, tail_c, 0, t, q_initial).unwrap_or(f64::INFINITY)
    }));
    out.push(worst_pointwise("occupancy I4", slots.clone(), &ens.occupancy_bar[3], |t| {
        i4_bound(v, &ts, &right, t).unwrap_or(f64::INFINITY)
    }));
    out.push(worst_pointwise("occupancy I1", slots.clone(), &ens.occupancy_bar[0], |t| {
        i1_bound(v, &ts, &left, t).map_or(f64::INFINITY, |b| b.total)
    }));

    let occ = |k: usize, t: u64| (ens.occupancy_bar[k].mean[t as usize], ens.occupancy_bar[k].se[t as usize]);
    let psi_se = |t: u64| ens.q.se[t as usize] / t as f64;
    let gap = ts.mu_b - ts.mu_b_plus_1;

    // The bracket mixes estimates; its own error is combined as if the
    // terms were independent.
    out.push(worst_of(slots.clone().map(|t| {
        let (o1, s1) = occ(0, t);
        let (o2, s2) = occ(1, t);
        let (lower, _) = occupancy_timeshare_bounds(&ts, o1, 0.0, ens.psi(t));
        let se_lower = ((ts.mu_b * s1).powi(2) + psi_se(t).powi(2)).sqrt() / gap;
        BoundReport::new("occupancy I2 lower bracket", Sense::AtLeast, t, lower, o2, s2.hypot(se_lower))
    })));
    out.push(worst_of(slots.clone().map(|t| {
        let (o4, s4) = occ(3, t);
        let (o2, s2) = occ(1, t);
        let (_, upper) = occupancy_timeshare_bounds(&ts, 0.0, o4, ens.psi(t));
        let se_upper = ((ts.mean_rate * s4).powi(2) + psi_se(t).powi(2)).sqrt() / gap;
        BoundReport::new("occupancy I2 upper bracket", Sense::AtMost, t, upper, o2, s2.hypot(se_upper))
    })));

    let (h_b, h_b1) = (ts.power_b, ts.power_b_plus_1);
    out.push(worst_of(slots.clone().map(|t| {
        let i = t as usize;
        let coef = [h_b1, h_b1, h_b, 1.0];
        let rhs: f64 = (0..4).map(|k| coef[k] * occ(k, t).0).sum();
        let se_rhs = (0..4).map(|k| (coef[k] * occ(k, t).1).powi(2)).sum::<f64>().sqrt();
        BoundReport::new(
            "power decomposition",
            Sense::AtMost,
            t,
            rhs,
            ens.p_bar.mean[i],
            ens.p_bar.se[i].hypot(se_rhs),
        )
    })));

    let pi_b = h_b - h_b1;
    let c1 = ts.mu_b / ts.omega_b - pi_b;
    let c4 = 1.0 - h_b;
    out.push(worst_of(slots.clone().map(|t| {
        let i = t as usize;
        let o1 = i1_bound(v, &ts, &left, t).map_or(f64::INFINITY, |b| b.total);
        let o4 = i4_bound(v, &ts, &right, t).unwrap_or(f64::INFINITY);
        let analytic = ts.p_star + c1 * o1 + c4 * o4 + q_initial / (t as f64 * ts.omega_b);
        BoundReport::new("average power", Sense::AtMost, t, analytic, ens.p_bar.mean[i], ens.p_bar.se[i])
    })));

    let lambda = ts.lambda;
    out.push(worst_of(slots.map(|t| {
        let i = t as usize;
        BoundReport::new(
            "rate identity",
            Sense::Equal,
            t,
            lambda - ens.psi(t),
            ens.mu_bar.mean[i],
            ens.mu_bar.se[i].hypot(psi_se(t)),
        )
    })));

    let below = ens.drift_below;
    out.push(BoundReport::new("drift below V/w_b", Sense::AtLeast, horizon, ts.beta_left(), below.mean, below.se));
    let above = ens.drift_above;
    out.push(BoundReport::new("drift above V/w_b", Sense::AtMost, horizon, -ts.beta_right(), above.mean, above.se));
    Ok(out)
}

fn worst_pointwise(
    name: &str,
    slots: impl Iterator<Item = u64>,
    series: &Series,
    bound: impl Fn(u64) -> f64,
) -> BoundReport {
    worst_of(slots.map(|t| {
        let i = t as usize;
        BoundReport::new(name, Sense::AtMost, t, bound(t), series.mean[i], series.se[i])
    }))
}

fn worst_of(reports: impl Iterator<Item = BoundReport>) -> BoundReport {
    reports
        .min_by(|a, b| a.margin().total_cmp(&b.margin()).then(b.t.cmp(&a.t)))
        .expect("at least one slot")
}
