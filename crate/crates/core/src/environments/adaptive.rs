use super::{RoundContext, ValueProcess};
use crate::environments::generators::drift;
use crate::scalar::Scalar;

/// Adversary that pushes the value away from the last posted price by the
/// full allowed rate: up after a sale, down after a rejection.
#[derive(Debug, Clone)]
pub struct Evader<S> {
    v1: S,
}

impl<S: Scalar> Evader<S> {
    pub fn new(v1: S) -> Self {
        Evader { v1 }
    }
}

impl<S: Scalar> ValueProcess<S> for Evader<S> {
    fn next_value(&mut self, ctx: &RoundContext<'_, S>) -> S {
        let (prev, eps) = match (ctx.prev_value, ctx.prev_rate) {
            (Some(v), Some(e)) => (v, e),
            _ => return self.v1,
        };
        let sold = *ctx.sold.last().expect("history present after round 1");
        let step = if sold { eps } else { -eps };
        drift(prev, step, eps)
    }
}
