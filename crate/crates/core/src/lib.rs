//! Posted-price selling to a buyer whose private value drifts by at most
//! `eps_t` per step, observed only through sale / no-sale feedback.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases at the crate root fix the scalar.

pub mod engine;
pub mod environments;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod strategies;

pub use engine::{run_batch, run_episode, run_protocol, EpisodeConfig};
pub use environments::{EnvironmentKind, EnvironmentSpec, ScheduleSpec, ValueProcess};
pub use error::{Error, Result};
pub use model::{
    feedback, revenue_loss_step, summarize, symmetric_loss_step, ConfidenceInterval, EpisodeTrace, Horizon,
    LossSummary, RateSchedule, StepRecord,
};
pub use scalar::Scalar;
pub use strategies::{build, build_with, Knowledge, PricingStrategy, StrategyId, StrategyInput, StrategyParams};

pub type IntervalF64 = ConfidenceInterval<f64>;
pub type IntervalF32 = ConfidenceInterval<f32>;
pub type ScheduleF64 = RateSchedule<f64>;
pub type ScheduleF32 = RateSchedule<f32>;
pub type TraceF64 = EpisodeTrace<f64>;
pub type TraceF32 = EpisodeTrace<f32>;
pub type SummaryF64 = LossSummary<f64>;
pub type SummaryF32 = LossSummary<f32>;
pub type EpisodeConfigF64 = EpisodeConfig<f64>;
pub type EpisodeConfigF32 = EpisodeConfig<f32>;
pub type EnvironmentSpecF64 = EnvironmentSpec<f64>;
pub type EnvironmentSpecF32 = EnvironmentSpec<f32>;
