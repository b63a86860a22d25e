//! Domain types for one seller-buyer interaction: horizon, drift-rate
//! schedule, the seller's confidence interval and the per-step record.

mod jsonl;
mod loss;

pub use jsonl::{read_trace, write_trace, TraceHeader};
pub use loss::{
    feedback, revenue_loss_step, summarize, summarize_steps, symmetric_loss_step, LossSummary,
    LossTotals,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of rounds `T` in an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Horizon(usize);

impl Horizon {
    pub fn new(steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Horizon(steps));
        }
        Ok(Horizon(steps))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `log2 T`.
    pub fn log2(self) -> f64 {
        (self.0 as f64).log2()
    }
}

/// Per-step drift bounds `eps_1 .. eps_{T-1}`: `|v_{t+1} - v_t| <= eps_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSchedule<S> {
    eps: Vec<S>,
    avg: S,
    quad_mean: S,
}

impl<S: Scalar> RateSchedule<S> {
    /// Builds a schedule for a horizon of `eps.len() + 1` steps.
    ///
    /// Entries must lie in `[0, 1]`. A zero entry describes a step on which
    /// the value cannot move at all.
    pub fn new(eps: Vec<S>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::Horizon(1));
        }
        for (index, &e) in eps.iter().enumerate() {
            if !e.in_unit() {
                return Err(Error::RateEntry { index, value: e.as_f64() });
            }
        }
        let n = S::of_usize(eps.len());
        let total = eps.iter().fold(S::zero(), |acc, &e| acc + e);
        let squares = eps.iter().fold(S::zero(), |acc, &e| acc + e * e);
        let avg = total / n;
        let quad_mean = (squares / (n + S::one())).sqrt();
        Ok(RateSchedule { eps, avg, quad_mean })
    }

    pub fn constant(eps: S, horizon: Horizon) -> Result<Self> {
        Self::new(vec![eps; horizon.get() - 1])
    }

    pub fn horizon(&self) -> Horizon {
        Horizon(self.eps.len() + 1)
    }

    pub fn eps(&self) -> &[S] {
        &self.eps
    }

    /// Bound on `|v_{t+1} - v_t|` for 1-based step `t < T`.
    #[inline]
    pub fn rate(&self, t: usize) -> S {
        self.eps[t - 1]
    }

    /// Average rate `(1/(T-1)) * sum eps_t`.
    pub fn avg(&self) -> S {
        self.avg
    }

    /// Quadratic mean `sqrt((1/T) * sum eps_t^2)`.
    pub fn quad_mean(&self) -> S {
        self.quad_mean
    }

    pub fn max(&self) -> S {
        self.eps.iter().fold(S::zero(), |m, &e| m.max(e))
    }

    pub fn is_constant(&self) -> bool {
        self.eps.windows(2).all(|w| w[0] == w[1])
    }

    /// Stable 64-bit FNV-1a digest over the entries' f64 bit patterns.
    pub fn digest(&self) -> u64 {
        let mut h = crate::harness::seed::Fnv64::new();
        for &e in &self.eps {
            h.write(&e.as_f64().to_bits().to_le_bytes());
        }
        h.finish()
    }

    pub fn cast<T: Scalar>(&self) -> RateSchedule<T> {
        RateSchedule::new(self.eps.iter().map(|e| T::of(e.as_f64())).collect())
            .expect("cast of a valid schedule")
    }
}

/// The seller's belief `[lo, hi]` about the current value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval<S> {
    lo: S,
    hi: S,
}

impl<S: Scalar> ConfidenceInterval<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        if !(lo.in_unit() && hi.in_unit() && lo <= hi) {
            return Err(Error::Interval { lo: lo.as_f64(), hi: hi.as_f64() });
        }
        Ok(ConfidenceInterval { lo, hi })
    }

    /// `[0, 1]`.
    pub fn full() -> Self {
        ConfidenceInterval { lo: S::zero(), hi: S::one() }
    }

    /// Clamps both endpoints into `[0, 1]`.
    pub fn clamped(lo: S, hi: S) -> Self {
        let lo = lo.unit_clamp();
        let hi = hi.unit_clamp();
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        ConfidenceInterval { lo, hi: hi.max(lo) }
    }

    #[inline]
    pub fn lo(&self) -> S {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> S {
        self.hi
    }

    #[inline]
    pub fn width(&self) -> S {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> S {
        (self.lo + self.hi) / S::two()
    }

    #[inline]
    pub fn contains(&self, v: S) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// `[lo - by, hi + by]`, clamped.
    pub fn expanded(&self, by: S) -> Self {
        Self::clamped(self.lo - by, self.hi + by)
    }

    /// Bisection update after posting the midpoint: no sale keeps the lower
    /// half, a sale keeps the upper half; both sides widen by `eps`.
    pub fn bisected(&self, price: S, sold: bool, eps: S) -> Self {
        if sold {
            Self::clamped(price - eps, self.hi + eps)
        } else {
            Self::clamped(self.lo - eps, price + eps)
        }
    }

    /// Intersects with what the feedback at `price` implies (`v >= price`
    /// on a sale, `v < price` otherwise), then widens by `eps`. Equals
    /// [`bisected`](Self::bisected) when the price is inside the interval.
    /// If the feedback contradicts the interval, the interval is dropped
    /// and only the feedback side is kept.
    pub fn refined(&self, price: S, sold: bool, eps: S) -> Self {
        let (lo, hi) = if sold { (self.lo.max(price), self.hi) } else { (self.lo, self.hi.min(price)) };
        if lo <= hi {
            Self::clamped(lo - eps, hi + eps)
        } else if sold {
            Self::clamped(price - eps, S::one())
        } else {
            Self::clamped(S::zero(), price + eps)
        }
    }
}

/// One round of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<S> {
    /// 1-based round index.
    pub t: usize,
    pub value: S,
    pub price: S,
    pub sold: bool,
    /// Interval the strategy asserted to contain `value` before pricing.
    pub interval: Option<ConfidenceInterval<S>>,
    /// Rate estimate in force when the price was posted (unknown-rate strategies).
    pub eps_hat: Option<S>,
}

impl<S: Scalar> StepRecord<S> {
    pub fn new(t: usize, value: S, price: S) -> Result<Self> {
        let sold = feedback(value, price)?;
        Ok(StepRecord { t, value, price, sold, interval: None, eps_hat: None })
    }
}

/// Complete record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace<S> {
    horizon: Horizon,
    schedule: RateSchedule<S>,
    steps: Vec<StepRecord<S>>,
    seed: u64,
}

impl<S: Scalar> EpisodeTrace<S> {
    /// Validates step count, indices, ranges, sale bits and the rate constraint.
    pub fn new(schedule: RateSchedule<S>, steps: Vec<StepRecord<S>>, seed: u64) -> Result<Self> {
        let horizon = schedule.horizon();
        if steps.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if steps.len() != horizon.get() {
            return Err(Error::TraceLength { got: steps.len(), expected: horizon.get() });
        }
        for (i, s) in steps.iter().enumerate() {
            if s.t != i + 1 {
                return Err(Error::Parse { line: i + 1, msg: format!("step index {} out of order", s.t) });
            }
            if !s.value.in_unit() {
                return Err(Error::OutOfRange { what: "value", value: s.value.as_f64() });
            }
            if !s.price.in_unit() {
                return Err(Error::PriceOutOfRange { t: s.t, price: s.price.as_f64() });
            }
            if s.sold != (s.price <= s.value) {
                return Err(Error::FeedbackMismatch { t: s.t, price: s.price.as_f64(), value: s.value.as_f64() });
            }
        }
        let values: Vec<S> = steps.iter().map(|s| s.value).collect();
        crate::environments::validate_rate(&values, &schedule)?;
        Ok(EpisodeTrace { horizon, schedule, steps, seed })
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn schedule(&self) -> &RateSchedule<S> {
        &self.schedule
    }

    pub fn steps(&self) -> &[StepRecord<S>] {
        &self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> Vec<S> {
        self.steps.iter().map(|s| s.value).collect()
    }

    pub fn prices(&self) -> Vec<S> {
        self.steps.iter().map(|s| s.price).collect()
    }

    pub fn into_steps(self) -> Vec<StepRecord<S>> {
        self.steps
    }
}
