//! Sweep description and its flat `key = value` config format.
//!
//! ```text
//! # lines starting with '#' are comments
//! strategies = s1,s3
//! environments = martingale,phase_monotone
//! eps = geometric:0.0625,0.5,7
//! T = 100000
//! t_scale = 10
//! reps = 20
//! base_seed = 1
//! v1 = 0.5
//! schedule = constant:{eps}
//! metric = auto
//! offset_rule = standard
//! parallelism = 8
//! script = values.csv
//! output = report.csv
//! slopes_output = report.slopes.json
//! ```
//!
//! `schedule` is a template: `{eps}` is replaced by the grid value of the
//! cell. The horizon of a cell is `max(T, ceil(t_scale / eps))`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::strategies::{LossMetric, OffsetRule, StrategyId};

/// The ε values a sweep visits.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsGrid {
    List(Vec<f64>),
    /// `start, start * ratio, ...`, `count` values.
    Geometric { start: f64, ratio: f64, count: usize },
}

impl EpsGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EpsGrid::List(v) => v.clone(),
            EpsGrid::Geometric { start, ratio, count } => {
                (0..*count).map(|i| start * ratio.powi(i as i32)).collect()
            }
        }
    }
}

impl fmt::Display for EpsGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsGrid::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&parts.join(","))
            }
            EpsGrid::Geometric { start, ratio, count } => write!(f, "geometric:{start:?},{ratio:?},{count}"),
        }
    }
}

impl FromStr for EpsGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| Error::Param(format!("eps grid `{s}`: {e}")));
        if let Some(args) = s.trim().strip_prefix("geometric:") {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Param("geometric grid takes start,ratio,count".into()));
            }
            let count = parts[2].trim().parse::<usize>().map_err(|e| Error::Param(format!("grid count: {e}")))?;
            return Ok(EpsGrid::Geometric { start: num(parts[0])?, ratio: num(parts[1])?, count });
        }
        Ok(EpsGrid::List(s.split(',').map(num).collect::<Result<_>>()?))
    }
}

/// Which loss a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricMode {
    /// The metric each strategy's guarantee is stated in.
    #[default]
    Auto,
    /// Raw mode: the given metric for every strategy.
    Raw(LossMetric),
}

impl MetricMode {
    pub fn for_strategy(self, id: StrategyId) -> LossMetric {
        match self {
            MetricMode::Auto => id.metric(),
            MetricMode::Raw(m) => m,
        }
    }
}

impl fmt::Display for MetricMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricMode::Auto => f.write_str("auto"),
            MetricMode::Raw(m) => f.write_str(m.name()),
        }
    }
}

impl FromStr for MetricMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(MetricMode::Auto),
            "symmetric" => Ok(MetricMode::Raw(LossMetric::Symmetric)),
            "revenue" => Ok(MetricMode::Raw(LossMetric::Revenue)),
            other => Err(Error::Param(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub strategies: Vec<StrategyId>,
    pub environments: Vec<String>,
    pub eps: EpsGrid,
    /// Minimum horizon of a cell.
    pub horizon: usize,
    pub t_scale: f64,
    pub reps: usize,
    pub base_seed: u64,
    pub v1: f64,
    pub schedule: String,
    pub metric: MetricMode,
    pub offset_rule: OffsetRule,
    pub parallelism: usize,
    /// Value file for the `scripted` environment.
    pub script: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub slopes_output: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            strategies: vec![StrategyId::S1],
            environments: vec!["martingale".into()],
            eps: EpsGrid::Geometric { start: 0.0625, ratio: 0.5, count: 7 },
            horizon: 100_000,
            t_scale: 10.0,
            reps: 20,
            base_seed: 0,
            v1: 0.5,
            schedule: "constant:{eps}".into(),
            metric: MetricMode::Auto,
            offset_rule: OffsetRule::Standard,
            parallelism: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            script: None,
            output: None,
            slopes_output: None,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "strategies",
    "environments",
    "eps",
    "T",
    "t_scale",
    "reps",
    "base_seed",
    "v1",
    "schedule",
    "metric",
    "offset_rule",
    "parallelism",
    "script",
    "output",
    "slopes_output",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| Error::Param(format!("{key}: {e}")))
}

fn list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

impl SweepSpec {
    /// Sets one config key. Used by the file parser and by command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "strategies" => self.strategies = list(v).iter().map(|s| s.parse()).collect::<Result<_>>()?,
            "environments" => self.environments = list(v),
            "eps" => self.eps = v.parse()?,
            "T" => self.horizon = parse(key, v)?,
            "t_scale" => self.t_scale = parse(key, v)?,
            "reps" => self.reps = parse(key, v)?,
            "base_seed" => self.base_seed = parse(key, v)?,
            "v1" => self.v1 = parse(key, v)?,
            "schedule" => self.schedule = v.to_string(),
            "metric" => self.metric = v.parse()?,
            "offset_rule" => self.offset_rule = v.parse()?,
            "parallelism" => self.parallelism = parse(key, v)?,
            "script" => self.script = (!v.is_empty()).then(|| PathBuf::from(v)),
            "output" => self.output = (!v.is_empty()).then(|| PathBuf::from(v)),
            "slopes_output" => self.slopes_output = (!v.is_empty()).then(|| PathBuf::from(v)),
            other => return Err(Error::Param(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the defaults.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        spec.apply_config(text)?;
        Ok(spec)
    }

    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            self.set(k, v).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let ids: Vec<&str> = self.strategies.iter().map(|s| s.name()).collect();
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("strategies", ids.join(","));
        put("environments", self.environments.join(","));
        put("eps", self.eps.to_string());
        put("T", self.horizon.to_string());
        put("t_scale", format!("{:?}", self.t_scale));
        put("reps", self.reps.to_string());
        put("base_seed", self.base_seed.to_string());
        put("v1", format!("{:?}", self.v1));
        put("schedule", self.schedule.clone());
        put("metric", self.metric.to_string());
        put("offset_rule", self.offset_rule.to_string());
        put("parallelism", self.parallelism.to_string());
        put("script", path(&self.script));
        put("output", path(&self.output));
        put("slopes_output", path(&self.slopes_output));
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Param("reps must be at least 1".into()));
        }
        if self.strategies.is_empty() || self.environments.is_empty() {
            return Err(Error::Param("need at least one strategy and one environment".into()));
        }
        let grid = self.eps.values();
        if grid.is_empty() {
            return Err(Error::Param("empty eps grid".into()));
        }
        for e in grid {
            if !(e > 0.0 && e <= 0.5) {
                return Err(Error::OutOfRange { what: "grid eps", value: e });
            }
        }
        if self.horizon < 2 {
            return Err(Error::Horizon(self.horizon));
        }
        if !(self.t_scale >= 0.0 && self.t_scale.is_finite()) {
            return Err(Error::Param(format!("t_scale {}", self.t_scale)));
        }
        if !(0.0..=1.0).contains(&self.v1) {
            return Err(Error::OutOfRange { what: "v1", value: self.v1 });
        }
        Ok(())
    }

    /// Horizon of the cell at grid value `eps`.
    pub fn horizon_for(&self, eps: f64) -> usize {
        self.horizon.max((self.t_scale / eps).ceil() as usize)
    }

    /// Schedule string of the cell at grid value `eps`.
    pub fn schedule_for(&self, eps: f64) -> String {
        self.schedule.replace("{eps}", &format!("{eps:?}"))
    }
}
