//! Pricing strategies. Each one is a single-owner state machine that sees
//! the horizon, its rate knowledge and the stream of sale bits, and nothing
//! else.

mod bisection;
mod checked;
mod estimate;
mod exp3;
mod phased;
mod probes;
mod triplet;

use std::fmt;
use std::str::FromStr;

pub use bisection::{locate_stop, Bisection, Rates};
pub use checked::{CheckPlacement, CheckedPhases, OffsetRule};
pub use estimate::EpsilonEstimate;
pub use exp3::Exp3;
pub use phased::KnownPhased;
pub use probes::SerializedProbes;
pub use triplet::Triplets;

use crate::error::{Error, Result};
use crate::model::{ConfidenceInterval, Horizon, RateSchedule};
use crate::scalar::Scalar;

/// The protocol every strategy implements: post a price, then learn
/// whether it sold.
pub trait PricingStrategy<S>: Send {
    /// Price for the current round, in `[0, 1]`. Called exactly once per
    /// round, before `observe`.
    fn next_price(&mut self) -> S;

    fn observe(&mut self, sold: bool);

    /// Interval the strategy asserts to contain the current value, on the
    /// rounds where it makes such a claim.
    fn belief(&self) -> Option<ConfidenceInterval<S>> {
        None
    }

    /// Current rate estimate for strategies that learn the rate.
    fn eps_hat(&self) -> Option<S> {
        None
    }

    /// Phase bookkeeping for the phased strategies.
    fn phase(&self) -> Option<PhaseState<S>> {
        None
    }
}

impl<S, P: PricingStrategy<S> + ?Sized> PricingStrategy<S> for Box<P> {
    fn next_price(&mut self) -> S {
        (**self).next_price()
    }
    fn observe(&mut self, sold: bool) {
        (**self).observe(sold)
    }
    fn belief(&self) -> Option<ConfidenceInterval<S>> {
        (**self).belief()
    }
    fn eps_hat(&self) -> Option<S> {
        (**self).eps_hat()
    }
    fn phase(&self) -> Option<PhaseState<S>> {
        (**self).phase()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Locating,
    Exploiting,
}

/// Snapshot of a phased strategy. `start` is the first exploitation round
/// of the current (or upcoming) phase and `len` its exploitation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState<S> {
    pub start: usize,
    pub len: usize,
    /// Absolute round of the checking step, if the phase has one.
    pub check: Option<usize>,
    pub interval: ConfidenceInterval<S>,
    pub offset: S,
    pub mode: PhaseMode,
    /// Number of phases that reached exploitation so far.
    pub count: usize,
}

/// What the strategy is told about the rates.
#[derive(Debug, Clone, PartialEq)]
pub enum Knowledge<S> {
    KnownFixed(S),
    KnownDynamic(RateSchedule<S>),
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyInput<S> {
    pub horizon: Horizon,
    pub knowledge: Knowledge<S>,
    pub rng_seed: u64,
}

/// Which knowledge a strategy needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnowledgeNeed {
    Fixed,
    Dynamic,
    None,
}

/// The loss a strategy is designed to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossMetric {
    Symmetric,
    Revenue,
}

impl LossMetric {
    pub fn name(self) -> &'static str {
        match self {
            LossMetric::Symmetric => "symmetric",
            LossMetric::Revenue => "revenue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyId {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
    S10,
    S11,
    S12,
    S13,
    S14,
    S15,
}

impl StrategyId {
    pub const ALL: [StrategyId; 15] = [
        StrategyId::S1,
        StrategyId::S2,
        StrategyId::S3,
        StrategyId::S4,
        StrategyId::S5,
        StrategyId::S6,
        StrategyId::S7,
        StrategyId::S8,
        StrategyId::S9,
        StrategyId::S10,
        StrategyId::S11,
        StrategyId::S12,
        StrategyId::S13,
        StrategyId::S14,
        StrategyId::S15,
    ];

    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        const NAMES: [&str; 15] =
            ["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "s12", "s13", "s14", "s15"];
        NAMES[self as usize]
    }

    pub fn alias(self) -> &'static str {
        match self {
            StrategyId::S1 => "alg1-adv-sym-known",
            StrategyId::S2 => "alg2-locate",
            StrategyId::S3 => "alg3-adv-rev-known",
            StrategyId::S4 => "alg4-stoch-rev-known",
            StrategyId::S5 => "alg5-adv-sym-unknown",
            StrategyId::S6 => "alg6-adv-rev-unknown",
            StrategyId::S7 => "alg7-stoch-rev-unknown",
            StrategyId::S8 => "alg8-adv-sym-decreasing",
            StrategyId::S9 => "alg9-adv-rev-decreasing",
            StrategyId::S10 => "alg10-stoch-rev-decreasing",
            StrategyId::S11 => "alg11-adv-sym-arbitrary",
            StrategyId::S12 => "dyn-adv-sym-known",
            StrategyId::S13 => "dyn-adv-rev-known",
            StrategyId::S14 => "dyn-stoch-rev-known",
            StrategyId::S15 => "exp3",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            StrategyId::S1 => "bisection with known fixed rate",
            StrategyId::S2 => "locate subroutine run as a standalone strategy",
            StrategyId::S3 => "locate then price at the interval bottom, phases of eps^-1/2",
            StrategyId::S4 => "locate then fixed discounted price, phases of eps^-2/3",
            StrategyId::S5 => "three-step rounds with checking probes, doubling rate guess",
            StrategyId::S6 => "s3 phases with a random checking step, doubling rate guess",
            StrategyId::S7 => "s4 phases with a random checking step, doubling rate guess",
            StrategyId::S8 => "s5 rounds with halving after long clean stretches",
            StrategyId::S9 => "blocks of s6 phases, halving after a clean block",
            StrategyId::S10 => "blocks of s7 phases, halving after a clean block",
            StrategyId::S11 => "serialized probe ladder for arbitrary rates",
            StrategyId::S12 => "bisection with known per-step rates",
            StrategyId::S13 => "s3 with phases cut by the rate prefix sum",
            StrategyId::S14 => "s4 with phases cut by the squared-rate prefix sum",
            StrategyId::S15 => "EXP3 over the eps price grid",
        }
    }

    pub fn knowledge_need(self) -> KnowledgeNeed {
        match self {
            StrategyId::S1 | StrategyId::S2 | StrategyId::S3 | StrategyId::S4 | StrategyId::S15 => KnowledgeNeed::Fixed,
            StrategyId::S12 | StrategyId::S13 | StrategyId::S14 => KnowledgeNeed::Dynamic,
            _ => KnowledgeNeed::None,
        }
    }

    pub fn metric(self) -> LossMetric {
        match self {
            StrategyId::S1 | StrategyId::S2 | StrategyId::S5 | StrategyId::S8 | StrategyId::S11 | StrategyId::S12 => {
                LossMetric::Symmetric
            }
            _ => LossMetric::Revenue,
        }
    }

    /// True for the strategies whose interval claims hold whenever the true
    /// rate respects the known rate.
    pub fn known_rate(self) -> bool {
        self.knowledge_need() != KnowledgeNeed::None && self != StrategyId::S15
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        StrategyId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == key || id.alias() == key)
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

/// Tunables that do not come from the rate knowledge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams<S> {
    /// Offset formula for the stochastic unknown-rate strategies.
    pub offset_rule: OffsetRule,
    /// Starting rate guess for the unknown-rate strategies, overriding the
    /// default `1/T` (s5-s7) or `1/2` (s8-s10).
    pub initial_eps_hat: Option<S>,
    pub check_placement: CheckPlacement,
}

impl<S> Default for StrategyParams<S> {
    fn default() -> Self {
        StrategyParams { offset_rule: OffsetRule::Standard, initial_eps_hat: None, check_placement: CheckPlacement::Random }
    }
}

fn fixed_rate<S: Scalar>(id: StrategyId, knowledge: &Knowledge<S>) -> Result<S> {
    match knowledge {
        Knowledge::KnownFixed(e) => Ok(*e),
        Knowledge::KnownDynamic(s) if s.is_constant() => Ok(s.max()),
        _ => Err(Error::Knowledge { strategy: id.name(), needs: "known fixed" }),
    }
}

fn dynamic_rates<S: Scalar>(id: StrategyId, input: &StrategyInput<S>) -> Result<RateSchedule<S>> {
    match &input.knowledge {
        Knowledge::KnownDynamic(s) => {
            if s.horizon() != input.horizon {
                return Err(Error::ScheduleLength { got: s.eps().len(), horizon: input.horizon.get() });
            }
            Ok(s.clone())
        }
        Knowledge::KnownFixed(e) => RateSchedule::constant(*e, input.horizon),
        Knowledge::Unknown => Err(Error::Knowledge { strategy: id.name(), needs: "known dynamic" }),
    }
}

/// Builds a strategy with default parameters.
pub fn build<S: Scalar>(id: StrategyId, input: &StrategyInput<S>) -> Result<Box<dyn PricingStrategy<S>>> {
    build_with(id, input, &StrategyParams::default())
}

pub fn build_with<S: Scalar>(
    id: StrategyId,
    input: &StrategyInput<S>,
    params: &StrategyParams<S>,
) -> Result<Box<dyn PricingStrategy<S>>> {
    let h = input.horizon;
    if let Some(e) = params.initial_eps_hat {
        if !(e > S::zero() && e <= S::one()) {
            return Err(Error::Param(format!("initial eps_hat {e} outside (0, 1]")));
        }
    }
    Ok(match id {
        StrategyId::S1 => Box::new(Bisection::fixed(fixed_rate(id, &input.knowledge)?)?),
        StrategyId::S2 => Box::new(Bisection::locate(fixed_rate(id, &input.knowledge)?)?),
        StrategyId::S3 => Box::new(KnownPhased::adversarial_fixed(fixed_rate(id, &input.knowledge)?, h)?),
        StrategyId::S4 => Box::new(KnownPhased::stochastic_fixed(fixed_rate(id, &input.knowledge)?, h)?),
        StrategyId::S5 => Box::new(Triplets::unknown_fixed(h, params.initial_eps_hat)),
        StrategyId::S6 | StrategyId::S7 | StrategyId::S9 | StrategyId::S10 => {
            Box::new(CheckedPhases::new(id, h, input.rng_seed, params)?)
        }
        StrategyId::S8 => Box::new(Triplets::decreasing(h, params.initial_eps_hat)),
        StrategyId::S11 => Box::new(SerializedProbes::new(h)),
        StrategyId::S12 => Box::new(Bisection::dynamic(dynamic_rates(id, input)?)),
        StrategyId::S13 => Box::new(KnownPhased::adversarial_dynamic(&dynamic_rates(id, input)?)),
        StrategyId::S14 => Box::new(KnownPhased::stochastic_dynamic(&dynamic_rates(id, input)?)),
        StrategyId::S15 => Box::new(Exp3::new(fixed_rate(id, &input.knowledge)?, h, input.rng_seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse_by_name_and_alias() {
        for id in StrategyId::ALL {
            assert_eq!(id.name().parse::<StrategyId>().unwrap(), id);
            assert_eq!(id.alias().parse::<StrategyId>().unwrap(), id);
            assert_eq!(id.index(), id.name()[1..].parse::<usize>().unwrap());
        }
        assert!("s16".parse::<StrategyId>().is_err());
    }

    #[test]
    fn knowledge_is_checked() {
        let input = StrategyInput { horizon: Horizon::new(100).unwrap(), knowledge: Knowledge::<f64>::Unknown, rng_seed: 1 };
        for id in [StrategyId::S1, StrategyId::S3, StrategyId::S12, StrategyId::S15] {
            assert!(matches!(build(id, &input), Err(Error::Knowledge { .. })));
        }
        for id in [StrategyId::S5, StrategyId::S8, StrategyId::S11] {
            assert!(build(id, &input).is_ok());
        }
    }

    #[test]
    fn metrics() {
        let sym: Vec<_> = StrategyId::ALL.iter().filter(|i| i.metric() == LossMetric::Symmetric).map(|i| i.name()).collect();
        assert_eq!(sym, ["s1", "s2", "s5", "s8", "s11", "s12"]);
    }
}
