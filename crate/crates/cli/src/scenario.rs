//! JSON scenario files.
//!
//! Probabilities may be written as numbers or as `"a/b"` fraction strings so
//! that fixtures can state the reference statistics exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use linksched::policy::{design_omega_only, OmegaOnlyPolicy};
use linksched::sim::Discipline;
use linksched::{ArrivalModel, ChannelModel, Phase, PhaseSchedule, Policy, RatePowerCurve};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probability {
    Number(f64),
    Fraction(String),
}

impl Probability {
    pub fn value(&self) -> CliResult<f64> {
        match self {
            Probability::Number(x) => Ok(*x),
            Probability::Fraction(s) => parse_fraction(s),
        }
    }
}

fn parse_fraction(s: &str) -> CliResult<f64> {
    let bad = || CliError::Scenario(format!("cannot read probability {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: f64 = num.parse().map_err(|_| bad())?;
    let den: f64 = den.parse().map_err(|_| bad())?;
    if den == 0.0 {
        return Err(bad());
    }
    Ok(num / den)
}

fn values(probs: &[Probability]) -> CliResult<Vec<f64>> {
    probs.iter().map(Probability::value).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub states: Vec<f64>,
    pub probs: Vec<Probability>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalSpec {
    pub amounts: Vec<f64>,
    pub probs: Vec<Probability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    /// Slots in this phase; omitted for an unbounded final phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<u64>,
    pub channel: ChannelSpec,
    pub arrivals: ArrivalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Dpp {},
    DppPlace {},
    /// Stationary policy, given either by a target rate on the first phase's
    /// curve or by explicit `[omega, probability]` pairs.
    OmegaOnly {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probs: Option<Vec<(f64, f64)>>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisciplineSpec {
    #[default]
    Fifo,
    Lifo,
}

impl From<DisciplineSpec> for Discipline {
    fn from(d: DisciplineSpec) -> Self {
        match d {
            DisciplineSpec::Fifo => Discipline::Fifo,
            DisciplineSpec::Lifo => Discipline::Lifo,
        }
    }
}

fn default_runs() -> u64 {
    1
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn is_fifo(d: &DisciplineSpec) -> bool {
    *d == DisciplineSpec::Fifo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub phases: Vec<PhaseSpec>,
    pub policy: PolicySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub v_sweep: Vec<f64>,
    /// Rate margins δ of ω-only baseline rows in a sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta_sweep: Vec<f64>,
    pub horizon: u64,
    #[serde(default = "default_runs")]
    pub n_runs: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "is_fifo")]
    pub discipline: DisciplineSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trim_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub q0: f64,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let scenario: ScenarioFile = serde_json::from_str(text)?;
        scenario.schedule()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn schedule(&self) -> CliResult<PhaseSchedule> {
        if self.phases.is_empty() {
            return Err(CliError::Scenario("scenario has no phases".into()));
        }
        let mut phases = Vec::with_capacity(self.phases.len());
        for (i, p) in self.phases.iter().enumerate() {
            let context = |e| CliError::Phase { index: i + 1, source: e };
            let channel = ChannelModel::new(&p.channel.states, &values(&p.channel.probs)?).map_err(context)?;
            let arrivals = ArrivalModel::new(&p.arrivals.amounts, &values(&p.arrivals.probs)?, p.arrivals.a_max)
                .map_err(context)?;
            phases.push(Phase {
                duration: p.duration,
                channel,
                arrivals,
            });
        }
        Ok(PhaseSchedule::new(phases)?)
    }

    /// Largest channel rate over all phases.
    pub fn omega_max(&self) -> CliResult<f64> {
        Ok(self
            .schedule()?
            .phases()
            .iter()
            .map(|p| p.channel.omega_max())
            .fold(0.0, f64::max))
    }

    pub fn is_dpp(&self) -> bool {
        matches!(self.policy, PolicySpec::Dpp {} | PolicySpec::DppPlace {})
    }

    /// Policy at weight `v`; ignored by ω-only policies.
    pub fn policy(&self, v: Option<f64>) -> CliResult<Policy> {
        let need_v = || v.ok_or_else(|| CliError::Usage("a DPP policy needs V (--v or \"v\")".into()));
        match &self.policy {
            PolicySpec::Dpp {} => Ok(Policy::dpp(need_v()?)),
            PolicySpec::DppPlace {} => Ok(Policy::dpp_place(need_v()?, self.omega_max()?)),
            PolicySpec::OmegaOnly { target, probs } => match (target, probs) {
                (Some(target), None) => self.omega_only_at(*target).map(Policy::OmegaOnly),
                (None, Some(entries)) => Ok(Policy::OmegaOnly(OmegaOnlyPolicy::new(entries.iter().copied())?)),
                _ => Err(CliError::Scenario(
                    "omega-only policy needs exactly one of \"target\" and \"probs\"".into(),
                )),
            },
        }
    }

    /// Cheapest ω-only policy reaching rate `target` on the first phase.
    pub fn omega_only_at(&self, target: f64) -> CliResult<OmegaOnlyPolicy> {
        let schedule = self.schedule()?;
        let curve = RatePowerCurve::new(&schedule.phases()[0].channel);
        Ok(design_omega_only(&curve, target)?)
    }

    pub fn discipline(&self) -> Discipline {
        self.discipline.into()
    }
}
