//! CSV writers. Column sets are fixed per file kind and change only together
//! with [`CSV_VERSION`].

use std::io::Write;

use serde::Serialize;

use linksched::bounds::{BoundReport, Sense};
use linksched::sim::{time_averages, DelayStats, EnsembleResult, Trace};
use linksched::RatePowerCurve;

use crate::error::CliResult;

pub const CSV_VERSION: u32 = 1;

/// Time averages at slot t over slots 0..t−1, and E[μ], E[p] of slot t−1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: u64,
    pub mean_mu_bar: f64,
    pub mean_p_bar: f64,
    pub mean_q_bar: f64,
    #[serde(rename = "mean_Q")]
    pub mean_q: f64,
    pub se_mu_bar: f64,
    pub se_p_bar: f64,
    pub se_q_bar: f64,
    #[serde(rename = "se_Q")]
    pub se_q: f64,
    pub occ1: Option<f64>,
    pub occ2: Option<f64>,
    pub occ3: Option<f64>,
    pub occ4: Option<f64>,
    pub mean_mu: f64,
    pub mean_p: f64,
}

/// Slots every `every` steps, always ending at the horizon.
pub fn sample_slots(horizon: u64, every: u64) -> Vec<u64> {
    let every = every.max(1);
    let mut slots: Vec<u64> = (1..=horizon / every).map(|k| k * every).collect();
    if slots.last() != Some(&horizon) {
        slots.push(horizon);
    }
    slots
}

pub fn ensemble_rows(ens: &EnsembleResult, every: u64) -> Vec<SeriesRow> {
    sample_slots(ens.horizon, every)
        .into_iter()
        .map(|t| {
            let i = t as usize;
            let occ = |k: usize| ens.occupancy_defined.then(|| ens.occupancy_bar[k].mean[i]);
            SeriesRow {
                t,
                mean_mu_bar: ens.mu_bar.mean[i],
                mean_p_bar: ens.p_bar.mean[i],
                mean_q_bar: ens.q_bar.mean[i],
                mean_q: ens.q.mean[i],
                se_mu_bar: ens.mu_bar.se[i],
                se_p_bar: ens.p_bar.se[i],
                se_q_bar: ens.q_bar.se[i],
                se_q: ens.q.se[i],
                occ1: occ(0),
                occ2: occ(1),
                occ3: occ(2),
                occ4: occ(3),
                mean_mu: ens.mu.mean[i - 1],
                mean_p: ens.p.mean[i - 1],
            }
        })
        .collect()
}

/// Rows of a single run; standard errors are zero.
pub fn trace_rows(trace: &Trace, every: u64) -> CliResult<Vec<SeriesRow>> {
    sample_slots(trace.horizon(), every)
        .into_iter()
        .map(|t| {
            let avg = time_averages(trace, t)?;
            let occ = avg.occupancy;
            Ok(SeriesRow {
                t,
                mean_mu_bar: avg.mu_bar,
                mean_p_bar: avg.p_bar,
                mean_q_bar: avg.q_bar,
                mean_q: trace.backlog()[t as usize],
                se_mu_bar: 0.0,
                se_p_bar: 0.0,
                se_q_bar: 0.0,
                se_q: 0.0,
                occ1: occ.map(|o| o[0]),
                occ2: occ.map(|o| o[1]),
                occ3: occ.map(|o| o[2]),
                occ4: occ.map(|o| o[3]),
                mean_mu: trace.cumulative_rate(t) - trace.cumulative_rate(t - 1),
                mean_p: (trace.cumulative_power(t) - trace.cumulative_power(t - 1)) as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `dpp`, `dpp-place` or `omega-only`.
    pub policy: String,
    /// V for DPP rows, δ for ω-only rows.
    pub param: f64,
    pub mu_bar: f64,
    pub p_bar: f64,
    pub q_bar: f64,
    pub se_p_bar: f64,
    pub se_q_bar: f64,
    /// h(λ + δ) for ω-only rows.
    pub analytic_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseRow {
    pub case: String,
    pub y: f64,
    pub z: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub t_min: u64,
    pub eps_t_min: f64,
}

#[derive(Serialize)]
struct BoundRow<'a> {
    quantity: &'a str,
    sense: &'a str,
    t: u64,
    analytic: f64,
    empirical: f64,
    se: f64,
    slack: f64,
    verdict: &'a str,
}

#[derive(Serialize)]
struct DelayRow {
    delay: u64,
    amount: f64,
    cumulative_fraction: f64,
}

#[derive(Serialize)]
struct VertexRow {
    k: usize,
    omega: f64,
    mu: f64,
    power: f64,
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn sense_name(s: Sense) -> &'static str {
    match s {
        Sense::AtMost => "<=",
        Sense::AtLeast => ">=",
        Sense::Equal => "==",
    }
}

pub fn write_bounds<W: Write>(out: W, reports: &[BoundReport]) -> CliResult<()> {
    let rows: Vec<BoundRow> = reports
        .iter()
        .map(|r| BoundRow {
            quantity: &r.quantity,
            sense: sense_name(r.sense),
            t: r.t,
            analytic: r.analytic,
            empirical: r.empirical,
            se: r.se,
            slack: r.slack,
            verdict: if r.pass { "pass" } else { "fail" },
        })
        .collect();
    write_rows(out, &rows)
}

/// Delivered data by delay, with the cumulative share of delivered data.
pub fn write_delay_histogram<W: Write>(out: W, stats: &DelayStats) -> CliResult<()> {
    let total = stats.delivered();
    let mut seen = 0.0;
    let rows: Vec<DelayRow> = stats
        .histogram()
        .bins()
        .iter()
        .enumerate()
        .filter(|(_, &amount)| amount > 0.0)
        .map(|(d, &amount)| {
            seen += amount;
            DelayRow {
                delay: d as u64,
                amount,
                cumulative_fraction: seen / total,
            }
        })
        .collect();
    write_rows(out, &rows)
}

pub fn write_curve<W: Write>(out: W, curve: &RatePowerCurve) -> CliResult<()> {
    let rows: Vec<VertexRow> = curve
        .vertices()
        .iter()
        .map(|v| VertexRow {
            k: v.k,
            omega: curve.omega(v.k),
            mu: v.mu,
            power: v.power,
        })
        .collect();
    write_rows(out, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use linksched::presets;

    #[test]
    fn slots_end_at_horizon() {
        assert_eq!(sample_slots(10, 3), vec![3, 6, 9, 10]);
        assert_eq!(sample_slots(9, 3), vec![3, 6, 9]);
        assert_eq!(sample_slots(2, 0), vec![1, 2]);
    }

    #[test]
    fn curve_csv() {
        let mut buf = Vec::new();
        write_curve(&mut buf, &RatePowerCurve::new(&presets::two_channel())).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "k,omega,mu,power\n3,inf,0.0,0.0\n2,2.0,0.5,0.25\n1,1.0,1.25,1.0\n");
    }
}
