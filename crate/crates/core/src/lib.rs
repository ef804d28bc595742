//! Energy-aware scheduling of a single queue over a time-varying channel.
//!
//! The crate covers the stochastic primitives ([`model`]), the minimum-power
//! rate curve ([`curve`], [`converse`]), the drift-plus-penalty and ω-only
//! policies ([`policy`]), a slotted simulator with ensembles ([`sim`]) and
//! the analytic drift bounds checked against simulation ([`bounds`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod converse;
pub mod curve;
pub mod error;
pub mod model;
pub mod policy;
pub mod presets;
pub mod sim;

pub use curve::{RatePowerCurve, TimeshareSolution, VertexPoint};
pub use error::{Error, Result};
pub use model::{ArrivalModel, ChannelModel, Phase, PhaseSchedule, RandomSource};
pub use policy::{DppConfig, OmegaOnlyPolicy, Policy};
