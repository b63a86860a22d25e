use super::{PhaseMode, PhaseState, PricingStrategy};
use crate::error::{Error, Result};
use crate::model::{ConfidenceInterval, RateSchedule};
use crate::scalar::Scalar;

/// Per-step rate bounds as seen by a known-rate strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum Rates<S> {
    Fixed(S),
    /// `eps[t-1]` bounds the move from round `t` to `t+1`.
    Dynamic(Vec<S>),
}

impl<S: Scalar> Rates<S> {
    /// Bound on `|v_{t+1} - v_t|`; zero past the end of a schedule.
    #[inline]
    pub fn at(&self, t: usize) -> S {
        match self {
            Rates::Fixed(e) => *e,
            Rates::Dynamic(eps) => eps.get(t - 1).copied().unwrap_or_else(S::zero),
        }
    }
}

/// Width below which the locate subroutine hands over. Bisection widths
/// approach `4 eps` from above and never cross it, so the stop is never
/// tighter than `6 eps`.
pub fn locate_stop<S: Scalar>(target: S, eps: S) -> S {
    target.max(S::of(6.0) * eps)
}

pub(crate) fn check_rate<S: Scalar>(eps: S) -> Result<S> {
    if eps.in_unit() {
        Ok(eps)
    } else {
        Err(Error::OutOfRange { what: "eps", value: eps.as_f64() })
    }
}

/// Midpoint pricing on a confidence interval that widens by the rate bound
/// after every update.
#[derive(Debug, Clone)]
pub struct Bisection<S> {
    rates: Rates<S>,
    interval: ConfidenceInterval<S>,
    t: usize,
    price: S,
    /// Locate bookkeeping: number of times the interval dropped below the
    /// stop width.
    locate: Option<usize>,
}

impl<S: Scalar> Bisection<S> {
    pub fn fixed(eps: S) -> Result<Self> {
        Ok(Self::with_rates(Rates::Fixed(check_rate(eps)?)))
    }

    pub fn dynamic(schedule: RateSchedule<S>) -> Self {
        Self::with_rates(Rates::Dynamic(schedule.eps().to_vec()))
    }

    /// The locate subroutine on its own. Prices match [`fixed`](Self::fixed);
    /// it additionally counts how often the interval is handed over.
    pub fn locate(eps: S) -> Result<Self> {
        let mut b = Self::fixed(eps)?;
        b.locate = Some(0);
        b.count_return();
        Ok(b)
    }

    pub fn with_rates(rates: Rates<S>) -> Self {
        Bisection { rates, interval: ConfidenceInterval::full(), t: 1, price: S::half(), locate: None }
    }

    pub fn starting_from(mut self, interval: ConfidenceInterval<S>) -> Self {
        self.interval = interval;
        self.count_return();
        self
    }

    pub fn interval(&self) -> ConfidenceInterval<S> {
        self.interval
    }

    /// Handovers so far (locate mode only).
    pub fn returns(&self) -> Option<usize> {
        self.locate
    }

    fn count_return(&mut self) {
        if let Some(n) = self.locate.as_mut() {
            let stop = locate_stop(S::zero(), self.rates.at(self.t));
            if self.interval.width() < stop {
                *n += 1;
            }
        }
    }
}

impl<S: Scalar> PricingStrategy<S> for Bisection<S> {
    fn next_price(&mut self) -> S {
        self.price = self.interval.mid();
        self.price
    }

    fn observe(&mut self, sold: bool) {
        let eps = self.rates.at(self.t);
        self.interval = self.interval.bisected(self.price, sold, eps);
        self.t += 1;
        self.count_return();
    }

    fn belief(&self) -> Option<ConfidenceInterval<S>> {
        Some(self.interval)
    }

    fn phase(&self) -> Option<PhaseState<S>> {
        self.locate.map(|count| PhaseState {
            start: self.t,
            len: 0,
            check: None,
            interval: self.interval,
            offset: S::zero(),
            mode: PhaseMode::Locating,
            count,
        })
    }
}
