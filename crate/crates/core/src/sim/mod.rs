//! Slotted queue simulation, time averages and ensembles.

mod approx;
mod delay;
mod engine;
mod ensemble;
mod interval;
mod queue;
mod sum;
mod trace;

pub use approx::{epsilon_check, EpsilonCheck};
pub use delay::{DelayHistogram, DelayStats};
pub use ensemble::{
    ensemble, EnsembleConfig, EnsemblePoint, EnsembleResult, ScalarEstimate, Series, BLOCK_RUNS,
};
pub use interval::{classify_interval, Interval, Intervals};
pub use queue::{Chunk, Discipline, QueueState, StepRecord};
pub use trace::{
    delay_stats, run, time_averages, DelaySummary, RunConfig, TimeAverages, Trace,
    MAX_KEPT_RECORDS,
};
