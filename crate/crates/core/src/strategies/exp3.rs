use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bisection::check_rate;
use super::PricingStrategy;
use crate::error::{Error, Result};
use crate::model::Horizon;
use crate::scalar::{round_count, Scalar};

const RENORMALIZE_ABOVE: f64 = 1e30;

/// EXP3 over the price grid `eps, 2 eps, ..., m eps` with `m = round(1/eps)`.
#[derive(Debug, Clone)]
pub struct Exp3<S> {
    eps: S,
    eta: S,
    weights: Vec<S>,
    probs: Vec<S>,
    rng: ChaCha8Rng,
    arm: usize,
    price: S,
}

impl<S: Scalar> Exp3<S> {
    pub fn new(eps: S, horizon: Horizon, seed: u64) -> Result<Self> {
        let eps = check_rate(eps)?;
        if eps <= S::zero() {
            return Err(Error::Param("EXP3 needs a positive grid step".into()));
        }
        let m = round_count(eps.recip());
        let mf = S::of_usize(m);
        let eta = (mf.ln() / (S::of_usize(horizon.get()) * mf)).sqrt();
        let mut s = Exp3 {
            eps,
            eta,
            weights: vec![S::one(); m],
            probs: vec![S::zero(); m],
            rng: ChaCha8Rng::seed_from_u64(seed),
            arm: 0,
            price: S::zero(),
        };
        s.refresh();
        Ok(s)
    }

    pub fn arms(&self) -> usize {
        self.weights.len()
    }

    pub fn eta(&self) -> S {
        self.eta
    }

    /// Current sampling distribution `q`.
    pub fn distribution(&self) -> &[S] {
        &self.probs
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Price of arm `i` (0-based), clamped to 1.
    pub fn arm_price(&self, i: usize) -> S {
        (S::of_usize(i + 1) * self.eps).min(S::one())
    }

    fn refresh(&mut self) {
        let m = S::of_usize(self.weights.len());
        let total = self.weights.iter().fold(S::zero(), |a, &w| a + w);
        let mix = self.eta / m;
        for (q, &w) in self.probs.iter_mut().zip(&self.weights) {
            *q = (S::one() - self.eta) * w / total + mix;
        }
    }

    fn sample(&mut self) -> usize {
        let u = S::of(self.rng.random::<f64>());
        let mut acc = S::zero();
        for (i, &q) in self.probs.iter().enumerate() {
            acc = acc + q;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

impl<S: Scalar> PricingStrategy<S> for Exp3<S> {
    fn next_price(&mut self) -> S {
        self.arm = self.sample();
        self.price = self.arm_price(self.arm);
        self.price
    }

    fn observe(&mut self, sold: bool) {
        if !sold {
            return;
        }
        let m = S::of_usize(self.weights.len());
        let gain = self.price / (m * self.probs[self.arm]);
        let w = &mut self.weights[self.arm];
        *w = *w * (self.eta * gain).exp();
        if *w > S::of(RENORMALIZE_ABOVE) {
            let top = *w;
            for w in self.weights.iter_mut() {
                *w = *w / top;
            }
        }
        self.refresh();
    }
}
