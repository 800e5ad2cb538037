//! Generalized share forecasters on the probability simplex.
//!
//! The crate covers the exponentially weighted loss update, a family of
//! mixing rules (fixed share, KL projection onto a clipped simplex,
//! pre-weight sharing toward running maxima, time-varying schedules),
//! evaluators for shifting, adaptive and discounted regret, closed-form regret
//! bounds with their tunings, and a config-driven experiment runner that
//! certifies realized regret against those bounds.

pub mod bounds;
pub mod convex;
pub mod environment;
pub mod error;
pub mod experiment;
pub mod forecaster;
pub mod regret;
pub mod simplex;

pub use error::{Error, Result};
pub use forecaster::{run_forecaster, Forecaster, LossVector, MixingRule, Schedule, Trajectory};
pub use simplex::{Distribution, NonNegVector};
