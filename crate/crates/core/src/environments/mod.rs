//! Value processes: stochastic martingales, scripted and adaptive
//! adversaries, and the hard instances used in the experiments. Every
//! process respects its rate schedule; the engine re-checks each step.

mod adaptive;
mod generators;
mod schedules;
mod scripted;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use adaptive::Evader;
pub use generators::{
    constant, martingale_walk, phase_directions, phase_monotone, phase_monotone_length, sawtooth,
    sawtooth_half_period, validate_rate,
};
pub use schedules::{check_non_increasing, decreasing_rate_schedule, spike_schedule, DecreasingKind};
pub use scripted::{load_values, load_values_file};

use crate::error::{Error, Result};
use crate::model::{Horizon, RateSchedule};
use crate::scalar::Scalar;

/// What an environment may see when committing `v_t`: the round index and
/// the history strictly before round `t`. The price of round `t` is not
/// posted yet.
#[derive(Debug, Clone, Copy)]
pub struct RoundContext<'a, S> {
    pub t: usize,
    pub prices: &'a [S],
    pub sold: &'a [bool],
    pub prev_value: Option<S>,
    /// `eps_{t-1}`, the bound on `|v_t - v_{t-1}|`.
    pub prev_rate: Option<S>,
}

/// A buyer-value process. Called once per round, in order.
pub trait ValueProcess<S>: Send {
    fn next_value(&mut self, ctx: &RoundContext<'_, S>) -> S;
}

/// A precomputed value sequence.
#[derive(Debug, Clone)]
pub struct Sequence<S>(pub Vec<S>);

impl<S: Scalar> ValueProcess<S> for Sequence<S> {
    fn next_value(&mut self, ctx: &RoundContext<'_, S>) -> S {
        self.0[ctx.t - 1]
    }
}

/// Rate schedule description, materialized once the horizon is known.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec<S> {
    Constant(S),
    Decreasing(DecreasingKind<S>),
    Spikes { high: S, low: S, period: usize, spike_len: usize },
    Explicit(Vec<S>),
}

impl<S: Scalar> ScheduleSpec<S> {
    pub fn materialize(&self, horizon: Horizon) -> Result<RateSchedule<S>> {
        match self {
            ScheduleSpec::Constant(eps) => RateSchedule::constant(*eps, horizon),
            ScheduleSpec::Decreasing(kind) => decreasing_rate_schedule(*kind, horizon),
            ScheduleSpec::Spikes { high, low, period, spike_len } => {
                spike_schedule(*high, *low, *period, *spike_len, horizon)
            }
            ScheduleSpec::Explicit(eps) => {
                if eps.len() + 1 < horizon.get() {
                    return Err(Error::ScheduleLength { got: eps.len(), horizon: horizon.get() });
                }
                RateSchedule::new(eps[..horizon.get() - 1].to_vec())
            }
        }
    }

    /// The single rate of a constant schedule.
    pub fn fixed_rate(&self) -> Option<S> {
        match self {
            ScheduleSpec::Constant(e) | ScheduleSpec::Decreasing(DecreasingKind::Constant { eps: e }) => Some(*e),
            _ => None,
        }
    }
}

fn join<S: Scalar>(xs: &[S]) -> String {
    xs.iter().map(|x| format!("{}", x.as_f64())).collect::<Vec<_>>().join(",")
}

impl<S: Scalar> fmt::Display for ScheduleSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Constant(e) => write!(f, "constant:{}", e.as_f64()),
            ScheduleSpec::Decreasing(DecreasingKind::Constant { eps }) => write!(f, "constant:{}", eps.as_f64()),
            ScheduleSpec::Decreasing(DecreasingKind::Geometric { eps1, ratio, floor }) => {
                write!(f, "geometric:{}", join(&[*eps1, *ratio, *floor]))
            }
            ScheduleSpec::Decreasing(DecreasingKind::Polynomial { eps1, exponent, floor }) => {
                write!(f, "polynomial:{}", join(&[*eps1, *exponent, *floor]))
            }
            ScheduleSpec::Spikes { high, low, period, spike_len } => {
                write!(f, "spikes:{},{},{period},{spike_len}", high.as_f64(), low.as_f64())
            }
            ScheduleSpec::Explicit(eps) => write!(f, "explicit:{}", join(eps)),
        }
    }
}

impl<S: Scalar> FromStr for ScheduleSpec<S> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').ok_or_else(|| Error::Param(format!("schedule `{s}`")))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| Error::Param(format!("schedule `{s}`: {e}"))))
            .collect::<Result<_>>()?;
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Param(format!("schedule `{kind}` takes {n} numbers")))
            }
        };
        Ok(match kind.trim() {
            "constant" => {
                arity(1)?;
                ScheduleSpec::Constant(S::of(nums[0]))
            }
            "geometric" => {
                arity(3)?;
                ScheduleSpec::Decreasing(DecreasingKind::Geometric {
                    eps1: S::of(nums[0]),
                    ratio: S::of(nums[1]),
                    floor: S::of(nums[2]),
                })
            }
            "polynomial" => {
                arity(3)?;
                ScheduleSpec::Decreasing(DecreasingKind::Polynomial {
                    eps1: S::of(nums[0]),
                    exponent: S::of(nums[1]),
                    floor: S::of(nums[2]),
                })
            }
            "spikes" => {
                arity(4)?;
                ScheduleSpec::Spikes {
                    high: S::of(nums[0]),
                    low: S::of(nums[1]),
                    period: nums[2] as usize,
                    spike_len: nums[3] as usize,
                }
            }
            "explicit" => ScheduleSpec::Explicit(nums.into_iter().map(S::of).collect()),
            other => return Err(Error::Param(format!("unknown schedule kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adversary {
    Evader,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentKind<S> {
    MartingaleWalk,
    PhaseMonotone,
    Sawtooth,
    Constant,
    Scripted { path: Option<PathBuf>, values: Vec<S> },
    Adaptive(Adversary),
}

impl<S> EnvironmentKind<S> {
    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentKind::MartingaleWalk => "martingale",
            EnvironmentKind::PhaseMonotone => "phase_monotone",
            EnvironmentKind::Sawtooth => "sawtooth",
            EnvironmentKind::Constant => "constant",
            EnvironmentKind::Scripted { .. } => "scripted",
            EnvironmentKind::Adaptive(Adversary::Evader) => "evader",
        }
    }

    /// Parses the kinds that need no extra data.
    pub fn parse_simple(name: &str) -> Result<Self> {
        Ok(match name.trim() {
            "martingale" | "martingale_walk" | "stochastic" => EnvironmentKind::MartingaleWalk,
            "phase_monotone" | "monotone" => EnvironmentKind::PhaseMonotone,
            "sawtooth" => EnvironmentKind::Sawtooth,
            "constant" => EnvironmentKind::Constant,
            "evader" | "adaptive" | "worst" => EnvironmentKind::Adaptive(Adversary::Evader),
            other => return Err(Error::UnknownEnvironment(other.to_string())),
        })
    }

    pub fn catalog() -> &'static [(&'static str, &'static str)] {
        &[
            ("martingale", "unbiased +-eps_t walk, zero step at the boundary"),
            ("phase_monotone", "phases of round(eps^-1/2) monotone steps, random direction"),
            ("sawtooth", "deterministic period-2/eps ramp up then down"),
            ("constant", "value fixed at v1"),
            ("scripted", "values read from a one-column CSV"),
            ("evader", "adaptive: moves away from the last price by eps each step"),
        ]
    }
}

/// Full description of an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec<S> {
    pub kind: EnvironmentKind<S>,
    pub schedule: ScheduleSpec<S>,
    pub v1: S,
}

/// An instantiated environment: its schedule and the process producing values.
pub struct Environment<S> {
    pub schedule: RateSchedule<S>,
    pub process: Box<dyn ValueProcess<S>>,
}

impl<S: Scalar> EnvironmentSpec<S> {
    pub fn new(kind: EnvironmentKind<S>, schedule: ScheduleSpec<S>, v1: S) -> Self {
        EnvironmentSpec { kind, schedule, v1 }
    }

    fn single_rate(&self) -> Result<S> {
        self.schedule
            .fixed_rate()
            .ok_or_else(|| Error::Param(format!("{} needs a constant schedule", self.kind.name())))
    }

    pub fn instantiate(&self, horizon: Horizon, seed: u64) -> Result<Environment<S>> {
        let schedule = self.schedule.materialize(horizon)?;
        let process: Box<dyn ValueProcess<S>> = match &self.kind {
            EnvironmentKind::MartingaleWalk => Box::new(Sequence(martingale_walk(&schedule, self.v1, seed)?)),
            EnvironmentKind::PhaseMonotone => {
                Box::new(Sequence(phase_monotone(self.single_rate()?, self.v1, seed, horizon)?))
            }
            EnvironmentKind::Sawtooth => Box::new(Sequence(sawtooth(self.single_rate()?, horizon)?)),
            EnvironmentKind::Constant => Box::new(Sequence(constant(self.v1, horizon)?)),
            EnvironmentKind::Scripted { path, values } => {
                let values = match (values.is_empty(), path) {
                    (true, Some(p)) => load_values_file(p)?,
                    _ => values.clone(),
                };
                if values.len() < horizon.get() {
                    return Err(Error::Param(format!(
                        "script has {} values, horizon is {}",
                        values.len(),
                        horizon.get()
                    )));
                }
                Box::new(Sequence(values[..horizon.get()].to_vec()))
            }
            EnvironmentKind::Adaptive(Adversary::Evader) => Box::new(Evader::new(self.v1)),
        };
        Ok(Environment { schedule, process })
    }

    /// Flat key-value form used by the harness config files.
    pub fn to_config(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("environment".to_string(), self.kind.name().to_string());
        map.insert("schedule".to_string(), self.schedule.to_string());
        map.insert("v1".to_string(), format!("{}", self.v1.as_f64()));
        if let EnvironmentKind::Scripted { path, values } = &self.kind {
            match path {
                Some(p) => {
                    map.insert("script".to_string(), p.display().to_string());
                }
                None => {
                    map.insert("values".to_string(), join(values));
                }
            }
        }
        map
    }

    pub fn from_config(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| map.get(k).ok_or_else(|| Error::Param(format!("missing key `{k}`")));
        let name = get("environment")?;
        let kind = if name.trim() == "scripted" {
            let path = map.get("script").map(PathBuf::from);
            let values = match map.get("values") {
                Some(v) => v
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map(S::of).map_err(|e| Error::Param(e.to_string())))
                    .collect::<Result<Vec<S>>>()?,
                None => Vec::new(),
            };
            if path.is_none() && values.is_empty() {
                return Err(Error::Param("scripted environment needs `script` or `values`".into()));
            }
            EnvironmentKind::Scripted { path, values }
        } else {
            EnvironmentKind::parse_simple(name)?
        };
        let schedule = get("schedule")?.parse()?;
        let v1 = match map.get("v1") {
            Some(v) => S::of(v.trim().parse::<f64>().map_err(|e| Error::Param(format!("v1: {e}")))?),
            None => S::half(),
        };
        Ok(EnvironmentSpec { kind, schedule, v1 })
    }
}
