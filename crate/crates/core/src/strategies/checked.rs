use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bisection::locate_stop;
use super::estimate::EpsilonEstimate;
use super::phased::azuma_offset;
use super::{PhaseMode, PhaseState, PricingStrategy, StrategyId, StrategyParams};
use crate::error::{Error, Result};
use crate::model::{ConfidenceInterval, Horizon};
use crate::scalar::{round_count, Scalar};

/// Discount used by the stochastic checked strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffsetRule {
    /// `4 e^{2/3} sqrt(ln T)`.
    #[default]
    Standard,
    /// `4 e^{2/3} ln^4(1/e)`, doubling only once detected bad events exceed
    /// a `1/m^2` share of the rounds spent at the current guess.
    Polylog,
    /// `4 e^{-2/3} sqrt(ln T)` exactly as printed. Debugging only: it
    /// exceeds 1 for every useful guess.
    Literal,
}

impl std::str::FromStr for OffsetRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "standard" => Ok(OffsetRule::Standard),
            "polylog" => Ok(OffsetRule::Polylog),
            "literal" => Ok(OffsetRule::Literal),
            other => Err(Error::Param(format!("unknown offset rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for OffsetRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OffsetRule::Standard => "standard",
            OffsetRule::Polylog => "polylog",
            OffsetRule::Literal => "literal",
        })
    }
}

/// Where the checking step falls inside a phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckPlacement {
    /// Uniform over the exploitation steps, drawn from the strategy's own RNG.
    #[default]
    Random,
    /// Fixed 0-based position (clamped to the phase length).
    Fixed(usize),
}

/// Unknown-rate revenue strategies: phases of locate then exploit, with one
/// random checking step per phase priced at the top of the belief. A failed
/// check (or a rejection at the bottom) doubles the rate guess and ends the
/// phase.
///
/// The decreasing-rate versions run blocks of phases and halve the guess
/// after a clean block.
#[derive(Debug, Clone)]
pub struct CheckedPhases<S> {
    stochastic: bool,
    decreasing: bool,
    rule: OffsetRule,
    placement: CheckPlacement,
    ln_t: S,
    est: EpsilonEstimate<S>,
    rng: ChaCha8Rng,
    t: usize,
    price: S,
    interval: ConfidenceInterval<S>,
    mode: PhaseMode,
    start: usize,
    len: usize,
    done: usize,
    check: usize,
    located: ConfidenceInterval<S>,
    offset: S,
    anchor: Option<(ConfidenceInterval<S>, usize)>,
    block_done: usize,
    block_size: usize,
    terminal: bool,
    bad_events: usize,
    level_steps: usize,
    count: usize,
}

impl<S: Scalar> CheckedPhases<S> {
    pub fn new(id: StrategyId, horizon: Horizon, seed: u64, params: &StrategyParams<S>) -> Result<Self> {
        let (stochastic, decreasing) = match id {
            StrategyId::S6 => (false, false),
            StrategyId::S7 => (true, false),
            StrategyId::S9 => (false, true),
            StrategyId::S10 => (true, true),
            other => return Err(Error::Param(format!("{other} is not a checked-phase strategy"))),
        };
        let floor = S::one() / S::of_usize(horizon.get());
        let start = params.initial_eps_hat.unwrap_or(if decreasing { S::half() } else { floor });
        let mut s = CheckedPhases {
            stochastic,
            decreasing,
            rule: params.offset_rule,
            placement: params.check_placement,
            ln_t: S::of_usize(horizon.get()).ln(),
            est: EpsilonEstimate::new(start, floor, S::half()),
            rng: ChaCha8Rng::seed_from_u64(seed),
            t: 1,
            price: S::zero(),
            interval: ConfidenceInterval::full(),
            mode: PhaseMode::Locating,
            start: 1,
            len: 0,
            done: 0,
            check: 0,
            located: ConfidenceInterval::full(),
            offset: S::zero(),
            anchor: None,
            block_done: 0,
            block_size: 1,
            terminal: !decreasing && start >= S::half(),
            bad_events: 0,
            level_steps: 0,
            count: 0,
        };
        s.settle();
        Ok(s)
    }

    /// Phase length (and block size) for a guess `e`.
    pub fn phase_len(&self, e: S) -> usize {
        let exp = if self.stochastic { S::of(-2.0 / 3.0) } else { -S::half() };
        round_count(e.powf(exp))
    }

    /// Locate target width for a guess `e`.
    pub fn target(&self, e: S) -> S {
        if self.stochastic {
            S::of(6.0) * e
        } else {
            e.sqrt()
        }
    }

    /// Price discount for a guess `e`.
    pub fn offset_for(&self, e: S) -> S {
        if !self.stochastic {
            return S::zero();
        }
        match self.rule {
            OffsetRule::Standard => azuma_offset(e, self.ln_t),
            OffsetRule::Polylog => S::of(4.0) * e.powf(S::of(2.0 / 3.0)) * e.recip().ln().powi(4),
            OffsetRule::Literal => S::of(4.0) * e.powf(S::of(-2.0 / 3.0)) * self.ln_t.sqrt(),
        }
    }

    pub fn in_terminal_mode(&self) -> bool {
        self.terminal
    }

    fn settle(&mut self) {
        let e = self.est.get();
        if self.mode != PhaseMode::Locating || self.interval.width() >= locate_stop(self.target(e), e) {
            return;
        }
        let m = self.phase_len(e);
        if self.decreasing && self.block_done == 0 {
            self.block_size = m;
        }
        let pos = match self.placement {
            CheckPlacement::Random => self.rng.random_range(0..m),
            CheckPlacement::Fixed(k) => k.min(m - 1),
        };
        self.mode = PhaseMode::Exploiting;
        self.start = self.t;
        self.len = m;
        self.done = 0;
        self.check = self.t + pos;
        self.located = self.interval;
        self.offset = self.offset_for(e);
        self.count += 1;
    }

    fn exploit_band(&self) -> ConfidenceInterval<S> {
        if self.stochastic {
            ConfidenceInterval::clamped(self.located.lo() - self.offset, self.located.hi() + self.offset)
        } else {
            self.interval
        }
    }

    fn reset_level(&mut self) {
        self.block_done = 0;
        self.bad_events = 0;
        self.level_steps = 0;
    }

    fn on_violation(&mut self) {
        self.bad_events += 1;
        let escalate = match self.rule {
            OffsetRule::Polylog if self.stochastic => {
                let m = self.len.max(1);
                self.bad_events * m * m > self.level_steps
            }
            _ => true,
        };
        if escalate && !self.terminal {
            self.est.double();
            if !self.decreasing && self.est.at_cap() {
                self.terminal = true;
            }
            self.reset_level();
        }
        if self.decreasing {
            self.block_done = 0;
        }
        let e = self.est.get();
        self.interval = match self.anchor {
            Some((a, ta)) => a.expanded(S::of_usize(self.t + 1 - ta) * e),
            None => ConfidenceInterval::full(),
        };
        self.mode = PhaseMode::Locating;
    }
}

impl<S: Scalar> PricingStrategy<S> for CheckedPhases<S> {
    fn next_price(&mut self) -> S {
        self.price = match self.mode {
            PhaseMode::Locating => self.interval.mid(),
            PhaseMode::Exploiting => {
                let band = self.exploit_band();
                if self.t == self.check {
                    band.hi()
                } else {
                    band.lo()
                }
            }
        };
        self.price
    }

    fn observe(&mut self, sold: bool) {
        let e = self.est.get();
        self.level_steps += 1;
        match self.mode {
            PhaseMode::Locating => self.interval = self.interval.refined(self.price, sold, e),
            PhaseMode::Exploiting => {
                let violated = if self.t == self.check {
                    sold && self.price < S::one()
                } else {
                    !sold && self.price > S::zero()
                };
                if violated {
                    self.on_violation();
                } else {
                    self.interval = self.interval.refined(self.price, sold, e);
                    self.done += 1;
                    if self.done == self.len {
                        self.anchor = Some((self.located, self.start));
                        self.mode = PhaseMode::Locating;
                        if self.decreasing {
                            self.block_done += 1;
                            if self.block_done >= self.block_size {
                                self.est.halve();
                                self.reset_level();
                            }
                        }
                    }
                }
            }
        }
        self.t += 1;
        self.settle();
    }

    fn belief(&self) -> Option<ConfidenceInterval<S>> {
        Some(match self.mode {
            PhaseMode::Locating => self.interval,
            PhaseMode::Exploiting => self.exploit_band(),
        })
    }

    fn eps_hat(&self) -> Option<S> {
        Some(self.est.get())
    }

    fn phase(&self) -> Option<PhaseState<S>> {
        Some(PhaseState {
            start: self.start,
            len: self.len,
            check: (self.mode == PhaseMode::Exploiting).then_some(self.check),
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

    fn make(id: StrategyId, t: usize, e0: f64, placement: CheckPlacement, seed: u64) -> CheckedPhases<f64> {
        let params = StrategyParams { initial_eps_hat: Some(e0), check_placement: placement, ..Default::default() };
        CheckedPhases::new(id, Horizon::new(t).unwrap(), seed, &params).unwrap()
    }

    /// Drives a strategy until it starts exploiting, answering as a fixed value.
    fn locate(s: &mut CheckedPhases<f64>, v: f64) {
        let mut n = 0;
        while s.mode != PhaseMode::Exploiting {
            let p = s.next_price();
            s.observe(p <= v);
            n += 1;
            assert!(n < 200);
        }
    }

    #[test]
    fn s6_phase_length_and_uniform_check() {
        let mut hits = [0usize; 5];
        for seed in 0..5000 {
            let mut s = make(StrategyId::S6, 100_000, 0.04, CheckPlacement::Random, seed);
            locate(&mut s, 0.5);
            assert_eq!(s.len, 5);
            hits[s.check - s.start] += 1;
        }
        for h in hits {
            assert!((h as f64 / 5000.0 - 0.2).abs() < 0.03, "{hits:?}");
        }
    }

    #[test]
    fn s6_passing_check_keeps_phase() {
        let mut s = make(StrategyId::S6, 100_000, 0.04, CheckPlacement::Fixed(0), 1);
        locate(&mut s, 0.5);
        let p = s.next_price();
        assert_eq!(p, s.interval.hi());
        s.observe(false);
        assert_eq!(s.est.get(), 0.04);
        assert_eq!(s.mode, PhaseMode::Exploiting);
    }

    #[test]
    fn detection_rate_is_k_over_m() {
        // Bad rounds put the value above the belief: the bottom price still
        // sells, and only a check placed on a bad round detects it.
        let m = 5;
        for bad in [vec![], vec![2], vec![0, 3], vec![1, 2, 4], vec![0, 1, 2, 3, 4]] {
            let mut detected = 0;
            for pos in 0..m {
                let mut s = make(StrategyId::S6, 100_000, 0.04, CheckPlacement::Fixed(pos), 7);
                locate(&mut s, 0.5);
                let mut caught = false;
                for i in 0..m {
                    let b = s.belief().unwrap();
                    let v = if bad.contains(&i) { (b.hi() + 0.01).min(1.0) } else { b.mid() };
                    let p = s.next_price();
                    let before = s.est.get();
                    s.observe(p <= v);
                    if s.est.get() > before {
                        caught = true;
                        break;
                    }
                }
                detected += caught as usize;
            }
            assert_eq!(detected, bad.len(), "bad set {bad:?}");
        }
    }

    #[test]
    fn s7_parameters() {
        let s = make(StrategyId::S7, 1_000_000, 0.001, CheckPlacement::Random, 0);
        assert_eq!(s.phase_len(0.001), 100);
        let expected = 4.0 * 0.001f64.powf(2.0 / 3.0) * (1e6f64).ln().sqrt();
        assert!((s.offset_for(0.001) - expected).abs() < 1e-12);
        assert!((expected - 0.14869).abs() < 1e-4);
    }

    #[test]
    fn s7_variants() {
        let params = StrategyParams { offset_rule: OffsetRule::Polylog, initial_eps_hat: Some(0.001), ..Default::default() };
        let s = CheckedPhases::<f64>::new(StrategyId::S7, Horizon::new(1_000_000).unwrap(), 0, &params).unwrap();
        let expected = 4.0 * 0.01 * (1000f64).ln().powi(4);
        assert!((s.offset_for(0.001) - expected).abs() < 1e-9);
        let params = StrategyParams { offset_rule: OffsetRule::Literal, ..params };
        let s = CheckedPhases::<f64>::new(StrategyId::S7, Horizon::new(1_000_000).unwrap(), 0, &params).unwrap();
        assert!(s.offset_for(0.001) > 1.0);
    }

    #[test]
    fn block_sizes() {
        // The block size is fixed by the first phase of the block.
        let mut s = make(StrategyId::S9, 100_000, 0.04, CheckPlacement::Random, 0);
        assert_eq!(s.phase_len(0.04), 5);
        locate(&mut s, 0.5);
        assert_eq!(s.block_size, 5);
        let s = make(StrategyId::S10, 100_000, 0.001, CheckPlacement::Random, 0);
        assert_eq!(s.phase_len(0.001), 100);
    }

    #[test]
    fn violation_restarts_block_and_clean_block_halves() {
        let mut s = make(StrategyId::S9, 100_000, 0.04, CheckPlacement::Fixed(4), 3);
        let v = 0.5;
        // Two clean phases, then a rejection at the bottom price.
        for _ in 0..2 {
            locate(&mut s, v);
            while s.mode == PhaseMode::Exploiting {
                let p = s.next_price();
                s.observe(p <= v);
            }
        }
        assert_eq!(s.block_done, 2);
        locate(&mut s, v);
        let p = s.next_price();
        assert!(p > 0.0);
        s.observe(false);
        assert_eq!(s.est.get(), 0.08);
        assert_eq!(s.block_done, 0);
        assert_eq!(s.mode, PhaseMode::Locating);

        // A full clean block at the new guess halves it.
        let blocks = s.phase_len(0.08);
        for _ in 0..blocks {
            locate(&mut s, v);
            while s.mode == PhaseMode::Exploiting {
                let p = s.next_price();
                s.observe(p <= v);
            }
        }
        assert_eq!(s.est.get(), 0.04);
    }

    #[test]
    fn exhaustion_freezes_guess() {
        let mut s = make(StrategyId::S6, 1000, 0.1, CheckPlacement::Fixed(0), 3);
        // One clean phase to set an anchor.
        locate(&mut s, 0.5);
        while s.mode == PhaseMode::Exploiting {
            let p = s.next_price();
            s.observe(p <= 0.5);
        }
        // Then feedback that contradicts every exploitation price.
        let mut n = 0;
        while !s.in_terminal_mode() {
            let p = s.next_price();
            let answer = if s.mode == PhaseMode::Exploiting { s.t == s.check } else { p <= 0.5 };
            s.observe(answer);
            n += 1;
            assert!(n < 1000);
        }
        assert_eq!(s.est.get(), 0.5);
        for _ in 0..100 {
            let p = s.next_price();
            s.observe(p <= 0.9);
        }
        assert_eq!(s.est.get(), 0.5);
    }
}
