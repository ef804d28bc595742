use std::io::Write;

use linksched::bounds::{verify_bounds, BoundReport, VerifyConfig};
use linksched::converse::{converse_min_time, three_state_initial_point};
use linksched::presets;
use linksched::sim::{delay_stats, ensemble, run, time_averages, DelaySummary, EnsembleConfig, RunConfig};
use linksched::{Policy, RatePowerCurve};

use crate::error::{CliError, CliResult};
use crate::export::{self, ConverseRow, SeriesRow, SweepRow};
use crate::scenario::{DisciplineSpec, PolicySpec, ScenarioFile};

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub v: Option<f64>,
    pub horizon: Option<u64>,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub discipline: Option<DisciplineSpec>,
    pub trim: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut ScenarioFile) {
        if let Some(v) = self.v {
            scenario.v = Some(v);
        }
        if let Some(h) = self.horizon {
            scenario.horizon = h;
        }
        if let Some(n) = self.runs {
            scenario.n_runs = n;
        }
        if let Some(s) = self.seed {
            scenario.base_seed = s;
        }
        if let Some(d) = self.discipline {
            scenario.discipline = d;
        }
        if let Some(f) = self.trim {
            scenario.trim_fraction = Some(f);
        }
    }
}

fn check_horizon(scenario: &ScenarioFile) -> CliResult<()> {
    if scenario.horizon == 0 {
        return Err(CliError::Usage("horizon must be at least 1".into()));
    }
    if scenario.n_runs == 0 {
        return Err(CliError::Usage("runs must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub last: SeriesRow,
    /// Delay statistics of the run with the base seed, when requested.
    pub delays: Option<DelaySummary>,
}

/// Writes time averages every `every` slots. A single run is simulated
/// directly; larger ensembles report across-run means and standard errors.
/// Delay statistics always come from the run with the base seed.
pub fn simulate<W: Write>(
    scenario: &ScenarioFile,
    every: u64,
    out: W,
    delays_out: Option<&mut dyn Write>,
) -> CliResult<SimulateOutcome> {
    check_horizon(scenario)?;
    let schedule = scenario.schedule()?;
    let policy = scenario.policy(scenario.v)?;
    let want_delays = delays_out.is_some() || scenario.trim_fraction.is_some();

    let mut cfg = RunConfig::new(scenario.horizon, scenario.base_seed);
    cfg.q0 = scenario.q0;
    cfg.discipline = scenario.discipline();
    cfg.track_delays = want_delays;
    let single = (scenario.n_runs == 1 || want_delays)
        .then(|| run(&schedule, &policy, &cfg))
        .transpose()?;

    let rows = if scenario.n_runs == 1 {
        export::trace_rows(single.as_ref().expect("single run simulated"), every)?
    } else {
        let mut ens_cfg = EnsembleConfig::new(scenario.horizon, scenario.n_runs, scenario.base_seed);
        ens_cfg.q0 = scenario.q0;
        ens_cfg.discipline = scenario.discipline();
        export::ensemble_rows(&ensemble(&schedule, &policy, &ens_cfg)?, every)
    };
    export::write_rows(out, &rows)?;

    let mut delays = None;
    if let Some(trace) = single.as_ref().filter(|_| want_delays) {
        let trim = scenario.trim_fraction.unwrap_or(1.0);
        delays = Some(delay_stats(trace, trim)?);
        if let Some(w) = delays_out {
            export::write_delay_histogram(w, trace.delays().expect("delays tracked"))?;
        }
    }
    Ok(SimulateOutcome {
        last: *rows.last().expect("horizon is positive"),
        delays,
    })
}

struct Averages {
    mu_bar: f64,
    p_bar: f64,
    q_bar: f64,
    se_p_bar: f64,
    se_q_bar: f64,
}

fn averages(scenario: &ScenarioFile, policy: &Policy) -> CliResult<Averages> {
    let schedule = scenario.schedule()?;
    let h = scenario.horizon;
    if scenario.n_runs == 1 {
        let mut cfg = RunConfig::new(h, scenario.base_seed);
        cfg.q0 = scenario.q0;
        let avg = time_averages(&run(&schedule, policy, &cfg)?, h)?;
        return Ok(Averages {
            mu_bar: avg.mu_bar,
            p_bar: avg.p_bar,
            q_bar: avg.q_bar,
            se_p_bar: 0.0,
            se_q_bar: 0.0,
        });
    }
    let mut cfg = EnsembleConfig::new(h, scenario.n_runs, scenario.base_seed);
    cfg.q0 = scenario.q0;
    let ens = ensemble(&schedule, policy, &cfg)?;
    let i = h as usize;
    Ok(Averages {
        mu_bar: ens.mu_bar.mean[i],
        p_bar: ens.p_bar.mean[i],
        q_bar: ens.q_bar.mean[i],
        se_p_bar: ens.p_bar.se[i],
        se_q_bar: ens.q_bar.se[i],
    })
}

/// One row per V in `v_list` (or the scenario's `v_sweep`), followed by
/// ω-only baseline rows for each δ in the scenario's `delta_sweep`.
pub fn sweep<W: Write>(scenario: &ScenarioFile, v_list: &[f64], out: W) -> CliResult<Vec<SweepRow>> {
    check_horizon(scenario)?;
    let v_list = if v_list.is_empty() { &scenario.v_sweep[..] } else { v_list };
    if v_list.is_empty() {
        return Err(CliError::Usage("sweep needs at least one V (--v or \"v_sweep\")".into()));
    }
    if !scenario.is_dpp() {
        return Err(CliError::Usage("sweep needs a dpp or dpp-place policy".into()));
    }
    let name = match scenario.policy {
        PolicySpec::DppPlace {} => "dpp-place",
        _ => "dpp",
    };
    let mut rows = Vec::new();
    for &v in v_list {
        let a = averages(scenario, &scenario.policy(Some(v))?)?;
        rows.push(SweepRow {
            policy: name.into(),
            param: v,
            mu_bar: a.mu_bar,
            p_bar: a.p_bar,
            q_bar: a.q_bar,
            se_p_bar: a.se_p_bar,
            se_q_bar: a.se_q_bar,
            analytic_p: None,
        });
    }
    if !scenario.delta_sweep.is_empty() {
        let schedule = scenario.schedule()?;
        let phase = &schedule.phases()[0];
        let curve = RatePowerCurve::new(&phase.channel);
        let lambda = phase.arrivals.lambda();
        for &delta in &scenario.delta_sweep {
            let target = lambda + delta;
            let policy = Policy::OmegaOnly(scenario.omega_only_at(target)?);
            let a = averages(scenario, &policy)?;
            rows.push(SweepRow {
                policy: "omega-only".into(),
                param: delta,
                mu_bar: a.mu_bar,
                p_bar: a.p_bar,
                q_bar: a.q_bar,
                se_p_bar: a.se_p_bar,
                se_q_bar: a.se_q_bar,
                analytic_p: Some(curve.h(target)?),
            });
        }
    }
    export::write_rows(out, &rows)?;
    Ok(rows)
}

/// Writes every bound report; the caller decides the exit status.
pub fn verify<W: Write>(scenario: &ScenarioFile, out: W) -> CliResult<Vec<BoundReport>> {
    check_horizon(scenario)?;
    let v = scenario
        .v
        .ok_or_else(|| CliError::Usage("verify needs V (--v or \"v\")".into()))?;
    if !scenario.is_dpp() {
        return Err(CliError::Usage("verify needs a dpp or dpp-place policy".into()));
    }
    let mut cfg = VerifyConfig::new(v, scenario.horizon, scenario.n_runs, scenario.base_seed);
    cfg.q0 = scenario.q0;
    cfg.place_holder = scenario.policy == PolicySpec::DppPlace {};
    let reports = verify_bounds(&scenario.schedule()?, &cfg)?;
    export::write_bounds(out, &reports)?;
    Ok(reports)
}

/// A three-state channel {1, 2, 3} with π(3) = y, π(2) = z and a slot-0 point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConverseCase {
    pub name: String,
    pub y: f64,
    pub z: f64,
    pub initial: (f64, f64),
}

impl ConverseCase {
    /// The two reference mistakes at λ = 1.
    pub fn reference() -> Vec<ConverseCase> {
        vec![
            ConverseCase {
                name: "case1".into(),
                y: 0.0,
                z: 0.25,
                initial: three_state_initial_point(0.0, 0.25, [0.5, 0.5, 0.0]),
            },
            ConverseCase {
                name: "case2".into(),
                y: 0.5,
                z: 0.5,
                initial: three_state_initial_point(0.5, 0.5, [0.0, 0.5, 0.5]),
            },
        ]
    }
}

pub fn converse<W: Write>(cases: &[ConverseCase], lambda: f64, epsilons: &[f64], out: W) -> CliResult<Vec<ConverseRow>> {
    if epsilons.is_empty() {
        return Err(CliError::Usage("converse needs at least one epsilon".into()));
    }
    let mut rows = Vec::new();
    for case in cases {
        let curve = RatePowerCurve::new(&presets::three_state_channel(case.y, case.z)?);
        for &eps in epsilons {
            let t_min = converse_min_time(&curve, lambda, eps, case.initial)?;
            rows.push(ConverseRow {
                case: case.name.clone(),
                y: case.y,
                z: case.z,
                lambda,
                epsilon: eps,
                t_min,
                eps_t_min: eps * t_min as f64,
            });
        }
    }
    export::write_rows(out, &rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converse_reference_rows() {
        let mut buf = Vec::new();
        let rows = converse(&ConverseCase::reference(), 1.0, &[1.0 / 128.0, 1.0 / 256.0], &mut buf).unwrap();
        let t: Vec<u64> = rows.iter().map(|r| r.t_min).collect();
        assert_eq!(t, vec![8, 16, 8, 16]);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("case,y,z,lambda,epsilon,t_min,eps_t_min\n"));
    }

    #[test]
    fn converse_at_target_is_one_slot() {
        let case = ConverseCase {
            name: "at-target".into(),
            y: 0.0,
            z: 0.25,
            initial: (1.0, 0.75),
        };
        let rows = converse(&[case], 1.0, &[1.0 / 128.0], Vec::new()).unwrap();
        assert_eq!(rows[0].t_min, 1);
    }

    #[test]
    fn converse_rejects_large_epsilon() {
        let err = converse(&ConverseCase::reference(), 1.0, &[0.1], Vec::new()).unwrap_err();
        assert!(matches!(err, CliError::Model(linksched::Error::InvalidEpsilon(_))));
    }
}
