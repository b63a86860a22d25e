use super::bisection::Bisection;
use super::estimate::EpsilonEstimate;
use super::PricingStrategy;
use crate::model::{ConfidenceInterval, Horizon};
use crate::scalar::Scalar;

/// Interval after a bad round `k`: the start interval of the last good
/// round `a`, widened by the `3k + 3 - 3a` steps since then at rate `e`.
pub fn rebuilt_interval<S: Scalar>(anchor: ConfidenceInterval<S>, a: usize, k: usize, e: S) -> ConfidenceInterval<S> {
    anchor.expanded(S::of_usize(3 * (k + 1 - a)) * e)
}

/// Symmetric-loss strategies for unknown rates, in rounds of three prices:
/// the bottom of the belief, just above its top, and its midpoint. The
/// first two check the guess; the third bisects.
///
/// The fixed-rate version only doubles its guess and falls back to plain
/// bisection at rate 1/2 once the guess reaches 1/2. The decreasing-rate
/// version also halves after `(log2 T)^3` rounds at the same guess.
#[derive(Debug, Clone)]
pub struct Triplets<S> {
    decreasing: bool,
    est: EpsilonEstimate<S>,
    threshold: f64,
    interval: ConfidenceInterval<S>,
    pos: usize,
    prices: [S; 3],
    sold: [bool; 3],
    round: usize,
    anchor: (ConfidenceInterval<S>, usize),
    s: usize,
    terminal: Option<Bisection<S>>,
}

impl<S: Scalar> Triplets<S> {
    fn build(decreasing: bool, est: EpsilonEstimate<S>, horizon: Horizon) -> Self {
        let mut s = Triplets {
            decreasing,
            est,
            threshold: horizon.log2().powi(3),
            interval: ConfidenceInterval::full(),
            pos: 0,
            prices: [S::zero(); 3],
            sold: [false; 3],
            round: 0,
            anchor: (ConfidenceInterval::full(), 0),
            s: 0,
            terminal: None,
        };
        if !decreasing && s.est.at_cap() {
            s.enter_terminal();
        }
        s
    }

    /// Guess starts at `1/T` unless overridden.
    pub fn unknown_fixed(horizon: Horizon, initial: Option<S>) -> Self {
        let floor = S::one() / S::of_usize(horizon.get());
        Self::build(false, EpsilonEstimate::new(initial.unwrap_or(floor), floor, S::half()), horizon)
    }

    /// Guess starts at `1/2` unless overridden.
    pub fn decreasing(horizon: Horizon, initial: Option<S>) -> Self {
        let floor = S::one() / S::of_usize(horizon.get());
        Self::build(true, EpsilonEstimate::new(initial.unwrap_or(S::half()), floor, S::half()), horizon)
    }

    /// Rounds a guess must survive before it is halved.
    pub fn halving_threshold(&self) -> f64 {
        self.threshold
    }

    pub fn interval(&self) -> ConfidenceInterval<S> {
        match &self.terminal {
            Some(b) => b.interval(),
            None => self.interval,
        }
    }

    pub fn in_terminal_mode(&self) -> bool {
        self.terminal.is_some()
    }

    fn enter_terminal(&mut self) {
        let b = Bisection::fixed(S::half()).expect("1/2 is a valid rate").starting_from(self.interval);
        self.terminal = Some(b);
    }

    fn close_round(&mut self) {
        let e = self.est.get();
        let k = self.round;
        self.s += 1;
        let good = self.sold[0] && !(self.sold[1] && self.prices[1] < S::one());
        if good {
            self.anchor = (self.interval, k);
            let (lo, hi, p) = (self.interval.lo(), self.interval.hi(), self.prices[2]);
            let three = S::of(3.0) * e;
            self.interval = if self.sold[2] {
                ConfidenceInterval::clamped(p - e, hi + three)
            } else {
                ConfidenceInterval::clamped(lo - three, p + e)
            };
            if self.decreasing && self.s as f64 > self.threshold && self.est.halve() {
                self.s = 0;
            }
        } else {
            self.est.double();
            self.s = 0;
            let (a_int, a) = self.anchor;
            self.interval = rebuilt_interval(a_int, a, k, self.est.get());
            if !self.decreasing && self.est.at_cap() {
                self.enter_terminal();
            }
        }
        self.round += 1;
    }
}

impl<S: Scalar> PricingStrategy<S> for Triplets<S> {
    fn next_price(&mut self) -> S {
        if let Some(b) = self.terminal.as_mut() {
            return b.next_price();
        }
        if self.pos == 0 {
            let e = self.est.get();
            self.prices = [self.interval.lo(), (self.interval.hi() + e).unit_clamp(), self.interval.mid()];
        }
        self.prices[self.pos]
    }

    fn observe(&mut self, sold: bool) {
        if let Some(b) = self.terminal.as_mut() {
            b.observe(sold);
            return;
        }
        self.sold[self.pos] = sold;
        self.pos += 1;
        if self.pos == 3 {
            self.pos = 0;
            self.close_round();
        }
    }

    fn belief(&self) -> Option<ConfidenceInterval<S>> {
        match &self.terminal {
            Some(b) => b.belief(),
            None => (self.pos == 0).then_some(self.interval),
        }
    }

    fn eps_hat(&self) -> Option<S> {
        Some(self.est.get())
    }
}
