use super::{PhaseMode, PhaseState, PricingStrategy};
use crate::model::{ConfidenceInterval, Horizon};
use crate::scalar::Scalar;

/// Symmetric-loss strategy for arbitrary unknown rates. Each phase probes
/// `lo - d_j` and `hi + d_j` for `d_j = 2^j / T`, `j = 0, 1, ...`, until the
/// value is seen between the two probes, then bisects once with the
/// midpoint of the phase's starting interval.
#[derive(Debug, Clone)]
pub struct SerializedProbes<S> {
    horizon: usize,
    max_j: u32,
    interval: ConfidenceInterval<S>,
    j: u32,
    /// 0: low probe, 1: high probe, 2: midpoint.
    step: u8,
    low_sold: bool,
    price: S,
    t: usize,
    start: usize,
    count: usize,
}

impl<S: Scalar> SerializedProbes<S> {
    pub fn new(horizon: Horizon) -> Self {
        let max_j = (2.0 * horizon.get() as f64).log2().ceil() as u32;
        SerializedProbes {
            horizon: horizon.get(),
            max_j,
            interval: ConfidenceInterval::full(),
            j: 0,
            step: 0,
            low_sold: false,
            price: S::zero(),
            t: 1,
            start: 1,
            count: 0,
        }
    }

    /// `2^j / T` before clamping.
    pub fn delta(&self, j: u32) -> S {
        S::of(2f64.powi(j as i32) / self.horizon as f64)
    }

    /// Largest probe index before a phase is forced to close.
    pub fn max_j(&self) -> u32 {
        self.max_j
    }

    pub fn interval(&self) -> ConfidenceInterval<S> {
        self.interval
    }

    fn saturated(&self, j: u32) -> bool {
        let d = self.delta(j);
        self.interval.lo() - d <= S::zero() && self.interval.hi() + d >= S::one()
    }
}

impl<S: Scalar> PricingStrategy<S> for SerializedProbes<S> {
    fn next_price(&mut self) -> S {
        let d = self.delta(self.j);
        self.price = match self.step {
            0 => (self.interval.lo() - d).unit_clamp(),
            1 => (self.interval.hi() + d).unit_clamp(),
            _ => self.interval.mid(),
        };
        self.price
    }

    fn observe(&mut self, sold: bool) {
        self.t += 1;
        match self.step {
            0 => {
                self.low_sold = sold;
                self.step = 1;
            }
            1 => {
                let bracketed = self.low_sold && !sold;
                if bracketed || self.j >= self.max_j || self.saturated(self.j) {
                    self.step = 2;
                } else {
                    self.j += 1;
                    self.step = 0;
                }
            }
            _ => {
                let d = self.delta(self.j);
                let p = self.price;
                self.interval = if sold {
                    ConfidenceInterval::clamped(p, self.interval.hi() + d)
                } else {
                    ConfidenceInterval::clamped(self.interval.lo() - d, p)
                };
                self.j = 0;
                self.step = 0;
                self.start = self.t;
                self.count += 1;
            }
        }
    }

    /// The phase's starting interval. Not a containment claim: the value
    /// may have left it while the probes run.
    fn belief(&self) -> Option<ConfidenceInterval<S>> {
        (self.step == 0 && self.j == 0).then_some(self.interval)
    }

    fn phase(&self) -> Option<PhaseState<S>> {
        Some(PhaseState {
            start: self.start,
            len: 2 * (self.j as usize + 1) + 1,
            check: None,
            interval: self.interval,
            offset: self.delta(self.j),
            mode: PhaseMode::Locating,
            count: self.count,
        })
    }
}
