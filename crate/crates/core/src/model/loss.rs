use std::ops::Add;

use super::{EpisodeTrace, StepRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_unit<S: Scalar>(what: &'static str, x: S) -> Result<()> {
    if x.in_unit() {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value: x.as_f64() })
    }
}

/// Sale bit: the buyer purchases iff `price <= value`.
pub fn feedback<S: Scalar>(value: S, price: S) -> Result<bool> {
    check_unit("value", value)?;
    check_unit("price", price)?;
    Ok(price <= value)
}

/// `value - price * sold`: the shortfall against pricing exactly at value.
pub fn revenue_loss_step<S: Scalar>(value: S, price: S) -> Result<S> {
    let sold = feedback(value, price)?;
    Ok(if sold { value - price } else { value })
}

/// `|value - price|`.
pub fn symmetric_loss_step<S: Scalar>(value: S, price: S) -> Result<S> {
    check_unit("value", value)?;
    check_unit("price", price)?;
    Ok((value - price).abs())
}

/// Running sums over a block of steps. Adding two blocks gives the sums of
/// their concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTotals<S> {
    pub steps: usize,
    pub revenue: S,
    pub opt: S,
    pub symmetric: S,
}

impl<S: Scalar> Add for LossTotals<S> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        LossTotals {
            steps: self.steps + rhs.steps,
            revenue: self.revenue + rhs.revenue,
            opt: self.opt + rhs.opt,
            symmetric: self.symmetric + rhs.symmetric,
        }
    }
}

pub fn summarize_steps<S: Scalar>(steps: &[StepRecord<S>]) -> LossTotals<S> {
    let mut totals = LossTotals { steps: steps.len(), ..LossTotals::default() };
    for s in steps {
        if s.sold {
            totals.revenue = totals.revenue + s.price;
        }
        totals.opt = totals.opt + s.value;
        totals.symmetric = totals.symmetric + (s.value - s.price).abs();
    }
    totals
}

/// Per-episode averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSummary<S> {
    pub total_revenue: S,
    pub opt: S,
    pub avg_revenue_loss: S,
    pub avg_symmetric_loss: S,
}

impl<S: Scalar> LossSummary<S> {
    pub fn from_totals(totals: &LossTotals<S>) -> Result<Self> {
        if totals.steps == 0 {
            return Err(Error::EmptyTrace);
        }
        let n = S::of_usize(totals.steps);
        Ok(LossSummary {
            total_revenue: totals.revenue,
            opt: totals.opt,
            avg_revenue_loss: (totals.opt - totals.revenue) / n,
            avg_symmetric_loss: totals.symmetric / n,
        })
    }
}

pub fn summarize<S: Scalar>(trace: &EpisodeTrace<S>) -> Result<LossSummary<S>> {
    LossSummary::from_totals(&summarize_steps(trace.steps()))
}
