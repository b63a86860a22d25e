//! The round-by-round protocol: the environment commits a value, the
//! strategy posts a price, the sale bit is delivered.

use rayon::prelude::*;

use crate::environments::{EnvironmentSpec, RoundContext, ValueProcess};
use crate::error::{Error, Result};
use crate::model::{feedback, summarize, EpisodeTrace, Horizon, LossSummary, RateSchedule, StepRecord};
use crate::scalar::Scalar;
use crate::strategies::{build_with, Knowledge, KnowledgeNeed, PricingStrategy, StrategyId, StrategyInput, StrategyParams};

/// Everything that determines one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig<S> {
    pub horizon: Horizon,
    pub environment: EnvironmentSpec<S>,
    pub strategy: StrategyId,
    /// Rate knowledge handed to the strategy. `None` derives it from the
    /// environment's schedule: the largest rate for fixed-rate strategies,
    /// the whole schedule for dynamic ones, nothing otherwise.
    pub knowledge: Option<Knowledge<S>>,
    pub params: StrategyParams<S>,
    pub env_seed: u64,
    pub strat_seed: u64,
    /// Store interval and rate-estimate snapshots in the trace.
    pub record_intervals: bool,
}

impl<S: Scalar> EpisodeConfig<S> {
    pub fn new(horizon: Horizon, environment: EnvironmentSpec<S>, strategy: StrategyId, env_seed: u64, strat_seed: u64) -> Self {
        EpisodeConfig {
            horizon,
            environment,
            strategy,
            knowledge: None,
            params: StrategyParams::default(),
            env_seed,
            strat_seed,
            record_intervals: false,
        }
    }

    pub fn recording(mut self) -> Self {
        self.record_intervals = true;
        self
    }
}

/// Knowledge a strategy gets by default for a schedule.
pub fn knowledge_for<S: Scalar>(id: StrategyId, schedule: &RateSchedule<S>) -> Knowledge<S> {
    match id.knowledge_need() {
        KnowledgeNeed::Fixed => Knowledge::KnownFixed(schedule.max()),
        KnowledgeNeed::Dynamic => Knowledge::KnownDynamic(schedule.clone()),
        KnowledgeNeed::None => Knowledge::Unknown,
    }
}

/// Runs the protocol loop on an already-built pair. The strategy only ever
/// sees sale bits; the process sees the history before the current round.
pub fn run_protocol<S: Scalar>(
    process: &mut dyn ValueProcess<S>,
    strategy: &mut dyn PricingStrategy<S>,
    schedule: &RateSchedule<S>,
    record_intervals: bool,
    seed: u64,
) -> Result<EpisodeTrace<S>> {
    let horizon = schedule.horizon().get();
    let mut prices = Vec::with_capacity(horizon);
    let mut sold = Vec::with_capacity(horizon);
    let mut steps = Vec::with_capacity(horizon);
    let mut prev: Option<S> = None;
    for t in 1..=horizon {
        let prev_rate = (t > 1).then(|| schedule.rate(t - 1));
        let ctx = RoundContext { t, prices: &prices, sold: &sold, prev_value: prev, prev_rate };
        let value = process.next_value(&ctx);
        if !value.in_unit() {
            return Err(Error::OutOfRange { what: "value", value: value.as_f64() });
        }
        if let (Some(p), Some(bound)) = (prev, prev_rate) {
            let jump = (value - p).abs();
            if jump > bound {
                return Err(Error::RateViolation { t: t - 1, jump: jump.as_f64(), bound: bound.as_f64() });
            }
        }
        let (interval, eps_hat) =
            if record_intervals { (strategy.belief(), strategy.eps_hat()) } else { (None, None) };
        let price = strategy.next_price();
        if !price.in_unit() {
            return Err(Error::PriceOutOfRange { t, price: price.as_f64() });
        }
        let s = feedback(value, price)?;
        strategy.observe(s);
        prices.push(price);
        sold.push(s);
        steps.push(StepRecord { t, value, price, sold: s, interval, eps_hat });
        prev = Some(value);
    }
    EpisodeTrace::new(schedule.clone(), steps, seed)
}

/// Builds the environment and strategy from the config and runs them. The
/// trace records the environment seed.
pub fn run_episode<S: Scalar>(config: &EpisodeConfig<S>) -> Result<EpisodeTrace<S>> {
    let env = config.environment.instantiate(config.horizon, config.env_seed)?;
    let knowledge = config.knowledge.clone().unwrap_or_else(|| knowledge_for(config.strategy, &env.schedule));
    let input = StrategyInput { horizon: config.horizon, knowledge, rng_seed: config.strat_seed };
    let mut strategy = build_with(config.strategy, &input, &config.params)?;
    let mut process = env.process;
    run_protocol(process.as_mut(), strategy.as_mut(), &env.schedule, config.record_intervals, config.env_seed)
}

/// Runs and summarizes an episode without keeping the trace around.
pub fn run_summary<S: Scalar>(config: &EpisodeConfig<S>) -> Result<LossSummary<S>> {
    summarize(&run_episode(config)?)
}

/// Runs every config on a pool of `parallelism` threads. Results are in
/// input order and do not depend on the thread count; a failing episode
/// only fails its own slot.
pub fn run_batch<S: Scalar>(configs: &[EpisodeConfig<S>], parallelism: usize) -> Vec<Result<LossSummary<S>>> {
    run_batch_with(configs, parallelism, run_summary)
}

/// [`run_batch`] with a custom per-episode reduction.
pub fn run_batch_with<S, T, F>(configs: &[EpisodeConfig<S>], parallelism: usize, f: F) -> Vec<Result<T>>
where
    S: Scalar,
    T: Send,
    F: Fn(&EpisodeConfig<S>) -> Result<T> + Sync,
{
    if configs.is_empty() {
        return Vec::new();
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(parallelism.max(1)).build() {
        Ok(pool) => pool,
        Err(e) => return configs.iter().map(|_| Err(Error::Param(format!("thread pool: {e}")))).collect(),
    };
    pool.install(|| configs.par_iter().map(&f).collect())
}
