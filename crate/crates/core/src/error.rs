use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("horizon must be at least 2 steps, got {0}")]
    Horizon(usize),
    #[error("{what} = {value} is outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("rate schedule entry {index} = {value} is outside [0, 1]")]
    RateEntry { index: usize, value: f64 },
    #[error("schedule has {got} entries, horizon {horizon} needs {}", horizon - 1)]
    ScheduleLength { got: usize, horizon: usize },
    #[error("interval [{lo}, {hi}] is not ordered inside [0, 1]")]
    Interval { lo: f64, hi: f64 },
    #[error("rate constraint violated between steps {t} and {} (|dv| = {jump}, bound {bound})", t + 1)]
    RateViolation { t: usize, jump: f64, bound: f64 },
    #[error("step {t}: recorded sale bit disagrees with price {price} and value {value}")]
    FeedbackMismatch { t: usize, price: f64, value: f64 },
    #[error("trace has {got} steps, expected {expected}")]
    TraceLength { got: usize, expected: usize },
    #[error("empty trace")]
    EmptyTrace,
    #[error("step {t}: strategy posted price {price} outside [0, 1]")]
    PriceOutOfRange { t: usize, price: f64 },
    #[error("increasing rate schedule rejected at index {index}")]
    IncreasingSchedule { index: usize },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),
    #[error("strategy {strategy} needs {needs} rate knowledge")]
    Knowledge { strategy: &'static str, needs: &'static str },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
