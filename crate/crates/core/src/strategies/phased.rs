use super::bisection::{check_rate, locate_stop, Rates};
use super::{PhaseMode, PhaseState, PricingStrategy};
use crate::error::Result;
use crate::model::{ConfidenceInterval, Horizon, RateSchedule};
use crate::scalar::{round_count, Scalar};

#[derive(Debug, Clone, PartialEq)]
enum LenRule<S> {
    Fixed(usize),
    /// Longest phase whose first `m - 1` rates (or squared rates) sum to at
    /// most `budget`.
    PrefixSum { budget: S, squared: bool },
}

/// Known-rate revenue strategies: locate, then exploit for a phase.
///
/// The adversarial flavour prices at the bottom of the tracked interval;
/// the stochastic flavour posts one discounted price for the whole phase.
/// The interval is carried through exploitation using the feedback, so it
/// stays a valid belief at every round when the rates are respected.
#[derive(Debug, Clone)]
pub struct KnownPhased<S> {
    rates: Rates<S>,
    horizon: usize,
    t: usize,
    interval: ConfidenceInterval<S>,
    mode: PhaseMode,
    left: usize,
    target: S,
    offset: S,
    stochastic: bool,
    len_rule: LenRule<S>,
    phase_start: usize,
    phase_len: usize,
    fixed_price: S,
    price: S,
    count: usize,
}

/// `4 x^{2/3} sqrt(log_factor)`, the discount of the stochastic phases.
pub(crate) fn azuma_offset<S: Scalar>(x: S, log_factor: S) -> S {
    S::of(4.0) * x.powf(S::of(2.0 / 3.0)) * log_factor.max(S::zero()).sqrt()
}

impl<S: Scalar> KnownPhased<S> {
    fn build(rates: Rates<S>, horizon: usize, target: S, offset: S, stochastic: bool, len_rule: LenRule<S>) -> Self {
        let mut s = KnownPhased {
            rates,
            horizon,
            t: 1,
            interval: ConfidenceInterval::full(),
            mode: PhaseMode::Locating,
            left: 0,
            target,
            offset,
            stochastic,
            len_rule,
            phase_start: 1,
            phase_len: 0,
            fixed_price: S::zero(),
            price: S::zero(),
            count: 0,
        };
        s.settle();
        s
    }

    /// Rates below `1/T` are raised to `1/T`.
    fn effective(eps: S, horizon: Horizon) -> S {
        eps.max(S::one() / S::of_usize(horizon.get()))
    }

    /// Phases of `round(eps^{-1/2})` steps priced at the interval bottom,
    /// located to width `sqrt(eps)`.
    pub fn adversarial_fixed(eps: S, horizon: Horizon) -> Result<Self> {
        let eps = Self::effective(check_rate(eps)?, horizon);
        let m = round_count(eps.powf(-S::half()));
        Ok(Self::build(Rates::Fixed(eps), horizon.get(), eps.sqrt(), S::zero(), false, LenRule::Fixed(m)))
    }

    /// Phases of `round(eps^{-2/3})` steps at `lo - 4 eps^{2/3} sqrt(ln 1/eps)`,
    /// located to width `6 eps`.
    pub fn stochastic_fixed(eps: S, horizon: Horizon) -> Result<Self> {
        let eps = Self::effective(check_rate(eps)?, horizon);
        let m = round_count(eps.powf(S::of(-2.0 / 3.0)));
        let offset = azuma_offset(eps, eps.recip().ln());
        Ok(Self::build(Rates::Fixed(eps), horizon.get(), S::of(6.0) * eps, offset, true, LenRule::Fixed(m)))
    }

    /// Phase ends once the rates inside it add up to `sqrt(avg)`.
    pub fn adversarial_dynamic(schedule: &RateSchedule<S>) -> Self {
        let h = schedule.horizon();
        let root = Self::effective(schedule.avg(), h).sqrt();
        Self::build(
            Rates::Dynamic(schedule.eps().to_vec()),
            h.get(),
            root,
            S::zero(),
            false,
            LenRule::PrefixSum { budget: root, squared: false },
        )
    }

    /// Phase ends once the squared rates add up to `q^{4/3}` for the
    /// quadratic mean `q`; discount `4 q^{2/3} sqrt(ln T)`.
    pub fn stochastic_dynamic(schedule: &RateSchedule<S>) -> Self {
        let h = schedule.horizon();
        let q = Self::effective(schedule.quad_mean(), h);
        let q23 = q.powf(S::of(2.0 / 3.0));
        let offset = azuma_offset(q, S::of_usize(h.get()).ln());
        Self::build(
            Rates::Dynamic(schedule.eps().to_vec()),
            h.get(),
            S::of(4.0) * q23,
            offset,
            true,
            LenRule::PrefixSum { budget: q23 * q23, squared: true },
        )
    }

    pub fn offset(&self) -> S {
        self.offset
    }

    pub fn target(&self) -> S {
        self.target
    }

    /// Exploitation length of a phase starting at round `t`.
    pub fn phase_len_at(&self, t: usize) -> usize {
        let remaining = (self.horizon + 1).saturating_sub(t).max(1);
        match &self.len_rule {
            LenRule::Fixed(m) => *m,
            LenRule::PrefixSum { budget, squared } => {
                let mut sum = S::zero();
                let mut m = 1;
                while m < remaining {
                    let e = self.rates.at(t + m - 1);
                    sum = sum + if *squared { e * e } else { e };
                    if sum > *budget {
                        break;
                    }
                    m += 1;
                }
                m
            }
        }
    }

    fn settle(&mut self) {
        if self.mode == PhaseMode::Locating && self.interval.width() < locate_stop(self.target, self.rates.at(self.t)) {
            let m = self.phase_len_at(self.t);
            self.mode = PhaseMode::Exploiting;
            self.left = m;
            self.phase_start = self.t;
            self.phase_len = m;
            self.fixed_price = (self.interval.lo() - self.offset).unit_clamp();
            self.count += 1;
        }
    }
}

impl<S: Scalar> PricingStrategy<S> for KnownPhased<S> {
    fn next_price(&mut self) -> S {
        self.price = match self.mode {
            PhaseMode::Locating => self.interval.mid(),
            PhaseMode::Exploiting if self.stochastic => self.fixed_price,
            PhaseMode::Exploiting => self.interval.lo(),
        };
        self.price
    }

    fn observe(&mut self, sold: bool) {
        let eps = self.rates.at(self.t);
        self.interval = self.interval.refined(self.price, sold, eps);
        if self.mode == PhaseMode::Exploiting {
            self.left -= 1;
            if self.left == 0 {
                self.mode = PhaseMode::Locating;
            }
        }
        self.t += 1;
        self.settle();
    }

    fn belief(&self) -> Option<ConfidenceInterval<S>> {
        Some(self.interval)
    }

    fn phase(&self) -> Option<PhaseState<S>> {
        Some(PhaseState {
            start: self.phase_start,
            len: self.phase_len,
            check: None,
            interval: self.interval,
            offset: self.offset,
            mode: self.mode,
            count: self.count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(n: usize) -> Horizon {
        Horizon::new(n).unwrap()
    }

    #[test]
    fn s3_parameters() {
        let s = KnownPhased::adversarial_fixed(0.01f64, h(10_000)).unwrap();
        assert_eq!(s.phase_len_at(1), 10);
        assert!((s.target() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn s3_exploitation_step() {
        let mut s = KnownPhased::adversarial_fixed(0.01f64, h(10_000)).unwrap();
        s.interval = ConfidenceInterval::new(0.40, 0.50).unwrap();
        s.settle();
        assert_eq!(s.mode, PhaseMode::Exploiting);
        assert_eq!(s.next_price(), 0.40);
        s.observe(true);
        let i = s.interval;
        assert!((i.lo() - 0.39).abs() < 1e-12 && (i.hi() - 0.51).abs() < 1e-12);
    }

    #[test]
    fn s3_sells_every_exploitation_step_on_a_constant_value() {
        let v = 0.5;
        let mut s = KnownPhased::adversarial_fixed(0.01, h(10_000)).unwrap();
        let mut phases_seen = 0;
        let mut t = 0;
        while phases_seen < 3 || s.mode == PhaseMode::Exploiting {
            let exploiting = s.mode == PhaseMode::Exploiting;
            let p = s.next_price();
            if exploiting {
                assert!(p <= v);
            }
            s.observe(p <= v);
            phases_seen = s.count;
            t += 1;
            assert!(t < 1000);
        }
    }

    #[test]
    fn s4_parameters() {
        let s = KnownPhased::stochastic_fixed(0.001, h(1_000_000)).unwrap();
        assert_eq!(s.phase_len_at(1), 100);
        let expected = 4.0 * 0.001f64.powf(2.0 / 3.0) * 1000f64.ln().sqrt();
        assert!((s.offset() - expected).abs() < 1e-12);
        assert!((s.offset() - 0.10513).abs() < 1e-5);
    }

    #[test]
    fn s4_price_clamps_to_zero_for_large_eps() {
        let mut s = KnownPhased::stochastic_fixed(1.0 / 16.0, h(10_000)).unwrap();
        assert!(s.offset() > 1.0);
        let mut t = 0;
        while s.mode != PhaseMode::Exploiting {
            let p = s.next_price();
            s.observe(p <= 0.3);
            t += 1;
            assert!(t < 100);
        }
        assert_eq!(s.next_price(), 0.0);
    }

    #[test]
    fn small_eps_is_raised_to_one_over_t() {
        let s = KnownPhased::adversarial_fixed(1e-9, h(10_000)).unwrap();
        assert_eq!(s.phase_len_at(1), 100);
    }

    #[test]
    fn s13_prefix_rule() {
        let mut eps = vec![0.3f64, 0.2, 0.1];
        eps.extend(std::iter::repeat(0.1).take(97));
        let sched = RateSchedule::new(eps).unwrap();
        let s = KnownPhased::adversarial_dynamic(&sched);
        let budget = sched.avg().sqrt();
        // Sum of the first m-1 rates stays within the budget, the first m exceed it.
        let m = s.phase_len_at(1);
        let within: f64 = sched.eps()[..m - 1].iter().sum();
        let beyond: f64 = sched.eps()[..m].iter().sum();
        assert!(within <= budget && beyond > budget, "m={m} budget={budget}");
    }

    #[test]
    fn s13_constant_schedule_length() {
        let eps = 0.01;
        let sched = RateSchedule::constant(eps, h(10_000)).unwrap();
        let s = KnownPhased::adversarial_dynamic(&sched);
        let m3 = KnownPhased::adversarial_fixed(eps, h(10_000)).unwrap().phase_len_at(1);
        let m13 = s.phase_len_at(1);
        assert!(m13.abs_diff(m3) <= 1, "{m13} vs {m3}");
    }

    #[test]
    fn s14_constant_schedule_length() {
        let eps = 0.001;
        let sched = RateSchedule::constant(eps, h(100_000)).unwrap();
        let s = KnownPhased::stochastic_dynamic(&sched);
        let m4 = KnownPhased::stochastic_fixed(eps, h(100_000)).unwrap().phase_len_at(1);
        let m14 = s.phase_len_at(1);
        assert!(m14.abs_diff(m4) <= 1, "{m14} vs {m4}");
    }
}
