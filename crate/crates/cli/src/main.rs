use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linksched_cli::commands::{self, ConverseCase, Overrides};
use linksched_cli::export;
use linksched_cli::scenario::DisciplineSpec;
use linksched_cli::{CliError, CliResult, ScenarioFile};

#[derive(Debug, Parser)]
#[command(name = "linksched", version, about = "Opportunistic link scheduling experiments")]
struct Cli {
    /// Worker threads for ensembles (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time averages versus t for one run or an ensemble.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output every k-th slot (the horizon is always written).
        #[arg(long, default_value_t = 1)]
        every: u64,
        /// Delay histogram of the base-seed run.
        #[arg(long)]
        delays: Option<PathBuf>,
        /// Vertices of the first phase's rate-power curve.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Average power and backlog for a list of V values.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Analytic bounds against Monte Carlo estimates. Exits 1 if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Minimum recovery time after a one-slot mistake.
    Converse {
        /// Comma-separated epsilon values in (0, 1/64).
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Pr[ω = 3] of a custom case; requires --z and --initial.
        #[arg(long, requires_all = ["z", "initial"])]
        y: Option<f64>,
        /// Pr[ω = 2] of a custom case.
        #[arg(long, requires_all = ["y", "initial"])]
        z: Option<f64>,
        /// Slot-0 point as MU,P.
        #[arg(long, value_parser = parse_point, requires_all = ["y", "z"])]
        initial: Option<(f64, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// V; `sweep` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    v: Vec<f64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_discipline)]
    discipline: Option<DisciplineSpec>,
    /// Fraction of delivered data kept by the trimmed mean delay.
    #[arg(long)]
    trim: Option<f64>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn scenario(&self) -> CliResult<ScenarioFile> {
        let v = match self.v[..] {
            [] => None,
            [v] => Some(v),
            _ => return Err(CliError::Usage("only sweep accepts several V values".into())),
        };
        let mut s = ScenarioFile::load(&self.scenario)?;
        Overrides {
            v,
            horizon: self.horizon,
            runs: self.runs,
            seed: self.seed,
            discipline: self.discipline,
            trim: self.trim,
        }
        .apply(&mut s);
        Ok(s)
    }
}

fn parse_discipline(s: &str) -> Result<DisciplineSpec, String> {
    match s.to_ascii_lowercase().as_str() {
        "fifo" => Ok(DisciplineSpec::Fifo),
        "lifo" => Ok(DisciplineSpec::Lifo),
        _ => Err(format!("unknown discipline {s:?} (expected fifo or lifo)")),
    }
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (mu, p) = s.split_once(',').ok_or_else(|| format!("expected MU,P, got {s:?}"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(mu)?, num(p)?))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn execute(command: Command) -> CliResult<bool> {
    match command {
        Command::Simulate {
            common,
            every,
            delays,
            curve,
        } => {
            let scenario = common.scenario()?;
            if let Some(path) = &curve {
                let schedule = scenario.schedule()?;
                export::write_curve(create(path)?, &linksched::RatePowerCurve::new(&schedule.phases()[0].channel))?;
            }
            let mut delay_file = delays.as_deref().map(create).transpose()?;
            let res = commands::simulate(
                &scenario,
                every,
                output(&common.out)?,
                delay_file.as_mut().map(|f| f as &mut dyn Write),
            )?;
            let last = res.last;
            eprintln!(
                "{}: t={} mu_bar={:.6} p_bar={:.6} q_bar={:.4}",
                scenario.name, last.t, last.mean_mu_bar, last.mean_p_bar, last.mean_q_bar
            );
            if let Some(d) = res.delays {
                let trimmed = d.trimmed_mean.map_or("n/a".to_string(), |m| format!("{m:.4}"));
                let mean = d.mean.map_or("n/a".to_string(), |m| format!("{m:.4}"));
                eprintln!(
                    "delay: mean={mean} trimmed({})={trimmed} delivered={} undelivered={}",
                    d.trim_fraction, d.delivered, d.undelivered
                );
            }
            Ok(true)
        }
        Command::Sweep { mut common } => {
            let v_list = std::mem::take(&mut common.v);
            let scenario = common.scenario()?;
            commands::sweep(&scenario, &v_list, output(&common.out)?)?;
            Ok(true)
        }
        Command::Verify { common } => {
            let scenario = common.scenario()?;
            let reports = commands::verify(&scenario, output(&common.out)?)?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.quantity.as_str()).collect();
            if failed.is_empty() {
                eprintln!("{}: all {} bounds hold", scenario.name, reports.len());
            } else {
                eprintln!("{}: {} of {} bounds violated: {}", scenario.name, failed.len(), reports.len(), failed.join(", "));
            }
            Ok(failed.is_empty())
        }
        Command::Converse {
            eps,
            lambda,
            y,
            z,
            initial,
            out,
        } => {
            let cases = match (y, z, initial) {
                (Some(y), Some(z), Some(p)) => vec![ConverseCase {
                    name: "custom".into(),
                    y,
                    z,
                    initial: p,
                }],
                _ => ConverseCase::reference(),
            };
            commands::converse(&cases, lambda, &eps, output(&out)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
