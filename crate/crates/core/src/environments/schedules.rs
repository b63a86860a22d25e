//! Rate schedules used by the dynamic-rate experiments.

use crate::error::{Error, Result};
use crate::model::{Horizon, RateSchedule};
use crate::scalar::Scalar;

/// Non-increasing schedule families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecreasingKind<S> {
    Constant { eps: S },
    /// `eps_t = max(eps1 * ratio^(t-1), floor)`.
    Geometric { eps1: S, ratio: S, floor: S },
    /// `eps_t = max(eps1 * t^(-exponent), floor)`.
    Polynomial { eps1: S, exponent: S, floor: S },
}

pub fn decreasing_rate_schedule<S: Scalar>(kind: DecreasingKind<S>, horizon: Horizon) -> Result<RateSchedule<S>> {
    let n = horizon.get() - 1;
    let eps: Vec<S> = match kind {
        DecreasingKind::Constant { eps } => vec![eps; n],
        DecreasingKind::Geometric { eps1, ratio, floor } => {
            if ratio > S::one() || ratio <= S::zero() {
                return Err(Error::IncreasingSchedule { index: 1 });
            }
            let mut e = eps1;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                out.push(e.max(floor));
                e = e * ratio;
            }
            out
        }
        DecreasingKind::Polynomial { eps1, exponent, floor } => {
            if exponent < S::zero() {
                return Err(Error::IncreasingSchedule { index: 1 });
            }
            (1..=n).map(|t| (eps1 * S::of_usize(t).powf(-exponent)).max(floor)).collect()
        }
    };
    let schedule = RateSchedule::new(eps)?;
    check_non_increasing(&schedule)?;
    Ok(schedule)
}

pub fn check_non_increasing<S: Scalar>(schedule: &RateSchedule<S>) -> Result<()> {
    match schedule.eps().windows(2).position(|w| w[1] > w[0]) {
        Some(i) => Err(Error::IncreasingSchedule { index: i + 1 }),
        None => Ok(()),
    }
}

/// Rates alternating between `high` for `spike_len` steps and `low` for the
/// rest of every `period` steps.
pub fn spike_schedule<S: Scalar>(high: S, low: S, period: usize, spike_len: usize, horizon: Horizon) -> Result<RateSchedule<S>> {
    if period == 0 || spike_len > period {
        return Err(Error::Param(format!("spike block {spike_len} of period {period}")));
    }
    RateSchedule::new(
        (0..horizon.get() - 1)
            .map(|i| if i % period < spike_len { high } else { low })
            .collect(),
    )
}
