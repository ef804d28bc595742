//! Channel and arrival statistics of the reference experiments.

use crate::model::{ArrivalModel, ChannelModel, Phase, PhaseSchedule};

/// Rates of the nine-state channel, ω₀ = 0 included.
pub const NINE_CHANNEL_STATES: [f64; 9] = [0.0, 3.0, 7.0, 11.0, 18.0, 22.0, 24.0, 36.0, 46.0];

/// Two-state channel: rate 1 w.p. 3/4, rate 2 w.p. 1/4.
pub fn two_channel() -> ChannelModel {
    ChannelModel::new(&[1.0, 2.0], &[0.75, 0.25]).expect("valid preset")
}

/// Arrivals of 0, 1, 2 units w.p. 2/5, 1/5, 2/5 (λ = 1).
pub fn two_channel_arrivals() -> ArrivalModel {
    ArrivalModel::new(&[0.0, 1.0, 2.0], &[0.4, 0.2, 0.4], None).expect("valid preset")
}

fn nine_channel_with(low: f64, mid: f64, high: f64) -> ChannelModel {
    let probs = [low, low, low, mid, mid, mid, high, high, high];
    ChannelModel::new(&NINE_CHANNEL_STATES, &probs).expect("valid preset")
}

/// Nine-state channel with probabilities 1/15, 2/9, 2/45 per group of three.
pub fn nine_channel() -> ChannelModel {
    nine_channel_with(1.0 / 15.0, 2.0 / 9.0, 2.0 / 45.0)
}

/// Bursts of 20 units w.p. 0.58 (λ = 11.6).
pub fn nine_channel_arrivals() -> ArrivalModel {
    bursty_arrivals(0.58)
}

/// Bursts of 20 units with probability `p_burst`.
pub fn bursty_arrivals(p_burst: f64) -> ArrivalModel {
    ArrivalModel::new(&[0.0, 20.0], &[1.0 - p_burst, p_burst], None).expect("valid preset")
}

/// Channel of the third non-ergodic phase: 1/15, 1/9, 7/45 per group.
pub fn nine_channel_shifted() -> ChannelModel {
    nine_channel_with(1.0 / 15.0, 1.0 / 9.0, 7.0 / 45.0)
}

/// Three phases of 2000 slots: the nine-state system, then λ raised to 13,
/// then the channel shifted towards high rates.
pub fn nonergodic_schedule() -> PhaseSchedule {
    PhaseSchedule::new(vec![
        Phase {
            duration: Some(2000),
            channel: nine_channel(),
            arrivals: nine_channel_arrivals(),
        },
        Phase {
            duration: Some(2000),
            channel: nine_channel(),
            arrivals: bursty_arrivals(0.65),
        },
        Phase {
            duration: Some(2000),
            channel: nine_channel_shifted(),
            arrivals: bursty_arrivals(0.65),
        },
    ])
    .expect("valid preset")
}

/// Three-state channel {1, 2, 3} with π(3) = y, π(2) = z, π(1) = 1 − y − z.
pub fn three_state_channel(y: f64, z: f64) -> crate::Result<ChannelModel> {
    ChannelModel::new(&[1.0, 2.0, 3.0], &[1.0 - y - z, z, y])
}
