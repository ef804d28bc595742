use thiserror::Error;

/// Errors produced while building models or running analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("model has no entries")]
    Empty,
    #[error("{values} values but {probs} probabilities")]
    LengthMismatch { values: usize, probs: usize },
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("probabilities sum to {0}, which is not positive")]
    NonPositiveProbabilitySum(f64),
    #[error("probabilities sum to {0}, expected 1")]
    ProbabilitySumMismatch(f64),
    #[error("channel state {0} appears more than once")]
    DuplicateState(f64),
    #[error("negative transmission rate {0}")]
    NegativeRate(f64),
    #[error("negative arrival amount {0}")]
    NegativeArrival(f64),
    #[error("arrival amount {amount} exceeds a_max = {a_max}")]
    ArrivalExceedsMax { amount: f64, a_max: f64 },

    #[error("phase schedule is empty")]
    EmptySchedule,
    #[error("phase {0} has zero duration")]
    ZeroDuration(usize),
    #[error("phase {0} has infinite duration but is not the final phase")]
    UnboundedInnerPhase(usize),
    #[error("slot {slot} lies beyond the schedule end at slot {end}")]
    SlotBeyondSchedule { slot: u64, end: u64 },

    #[error("rate {mu} outside [0, {max}]")]
    RateOutOfRange { mu: f64, max: f64 },
    #[error("arrival rate {lambda} coincides with vertex rate mu_{k}")]
    LambdaAtVertex { lambda: f64, k: usize },
    #[error("arrival rate {lambda} outside (0, {max})")]
    LambdaOutOfRange { lambda: f64, max: f64 },
    #[error("arrival rate {lambda} exceeds the maximum service rate {mean_rate}")]
    Infeasible { lambda: f64, mean_rate: f64 },
    #[error("no time up to {cap} slots reaches the target region")]
    InfeasibleTarget { cap: u64 },
    #[error("epsilon {0} outside the allowed range")]
    InvalidEpsilon(f64),
    #[error("initial point ({mu}, {power}) lies outside the achievable region")]
    InitialPointOutsideRegion { mu: f64, power: f64 },

    #[error("threshold index {k} outside 1..={m}")]
    IndexOutOfRange { k: usize, m: usize },
    #[error("policy has no transmit probability for channel state {0}")]
    MissingState(f64),
    #[error("invalid transmit probability {0}")]
    InvalidTransmitProbability(f64),

    #[error("slot {t} exceeds the trace horizon {horizon}")]
    HorizonExceeded { t: u64, horizon: u64 },
    #[error("no data arrived during the trace")]
    NoArrivals,

    #[error("beta {beta} exceeds delta_max {delta_max}")]
    BetaExceedsDelta { beta: f64, delta_max: f64 },
    #[error("window T = {big_t} must be smaller than t = {t}")]
    InvalidWindow { big_t: u64, t: u64 },
    #[error("gamma {0} is not positive")]
    GammaNonpositive(f64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
