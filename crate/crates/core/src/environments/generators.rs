//! Value-process generators. Each is a pure function of its parameters and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Horizon, RateSchedule};
use crate::scalar::{round_count, Scalar};

/// Moves from `prev` by `step`. If rounding makes the float difference
/// exceed `bound`, the step is shortened by a relative amount that doubles
/// each try, starting at one ulp; at worst it reaches zero.
pub(crate) fn drift<S: Scalar>(prev: S, step: S, bound: S) -> S {
    let target = (prev + step).unit_clamp();
    let d = target - prev;
    let mut next = target;
    let mut cut = S::epsilon();
    while (next - prev).abs() > bound {
        next = if cut >= S::one() { prev } else { (prev + d * (S::one() - cut)).unit_clamp() };
        cut = cut * S::two();
    }
    next
}

/// Unbiased `+-eps_t` walk. When either `v - eps_t` or `v + eps_t` would
/// leave `[0, 1]` the step is zero, so `E[v_{t+1} | v_t] = v_t` holds on
/// every step and increments stay within the bound.
pub fn martingale_walk<S: Scalar>(schedule: &RateSchedule<S>, v1: S, seed: u64) -> Result<Vec<S>> {
    if !v1.in_unit() {
        return Err(Error::OutOfRange { what: "v1", value: v1.as_f64() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(schedule.horizon().get());
    let mut v = v1;
    values.push(v);
    for &eps in schedule.eps() {
        let up: bool = rng.random();
        let step = if v - eps < S::zero() || v + eps > S::one() {
            S::zero()
        } else if up {
            eps
        } else {
            -eps
        };
        v = drift(v, step, eps);
        values.push(v);
    }
    Ok(values)
}

/// Phase length `round(eps^{-1/2})` of the phase-monotone instance.
pub fn phase_monotone_length<S: Scalar>(eps: S) -> usize {
    round_count(eps.powf(-S::half()))
}

/// Per-phase directions (`true` = ascending), i.i.d. fair coins.
pub fn phase_directions(seed: u64, phases: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..phases).map(|_| rng.random()).collect()
}

/// Phases of `round(eps^{-1/2})` steps; each phase moves monotonically by
/// `eps` per step, up or down with probability 1/2, clamped to `[0, 1]`.
/// Phase `k` covers steps `2 + k*m ..= 1 + (k+1)*m` and continues from the
/// value the previous phase ended on.
pub fn phase_monotone<S: Scalar>(eps: S, v1: S, seed: u64, horizon: Horizon) -> Result<Vec<S>> {
    if !(eps > S::zero() && eps <= S::one()) {
        return Err(Error::Param(format!("phase_monotone eps {eps} not in (0, 1]")));
    }
    if !v1.in_unit() {
        return Err(Error::OutOfRange { what: "v1", value: v1.as_f64() });
    }
    let m = phase_monotone_length(eps);
    let t = horizon.get();
    let dirs = phase_directions(seed, (t - 1).div_ceil(m));
    let mut values = Vec::with_capacity(t);
    let mut v = v1;
    values.push(v);
    for i in 0..t - 1 {
        let step = if dirs[i / m] { eps } else { -eps };
        v = drift(v, step, eps);
        values.push(v);
    }
    Ok(values)
}

/// Half-period `m = round(1/eps)` of the sawtooth.
pub fn sawtooth_half_period<S: Scalar>(eps: S) -> usize {
    round_count(eps.recip())
}

/// Deterministic period-`2m` sawtooth: `v_{2km+j} = j*eps` and
/// `v_{2km+m+j} = 1 - (j-1)*eps` for `1 <= j <= m`.
pub fn sawtooth<S: Scalar>(eps: S, horizon: Horizon) -> Result<Vec<S>> {
    if !(eps > S::zero() && eps <= S::one()) {
        return Err(Error::Param(format!("sawtooth eps {eps} not in (0, 1]")));
    }
    let m = sawtooth_half_period(eps);
    if m < 2 {
        return Err(Error::Param(format!("sawtooth needs round(1/eps) >= 2, got {m}")));
    }
    let mut values: Vec<S> = Vec::with_capacity(horizon.get());
    for i in 0..horizon.get() {
        let pos = i % (2 * m);
        let raw = if pos < m {
            S::of_usize(pos + 1) * eps
        } else {
            S::one() - S::of_usize(pos - m) * eps
        };
        let v = match values.last() {
            Some(&prev) => drift(prev, raw.unit_clamp() - prev, eps),
            None => raw.unit_clamp(),
        };
        values.push(v);
    }
    Ok(values)
}

pub fn constant<S: Scalar>(v: S, horizon: Horizon) -> Result<Vec<S>> {
    if !v.in_unit() {
        return Err(Error::OutOfRange { what: "v1", value: v.as_f64() });
    }
    Ok(vec![v; horizon.get()])
}

/// Checks `|v_{t+1} - v_t| <= eps_t` for all `t`; reports the first 1-based
/// `t` that fails.
pub fn validate_rate<S: Scalar>(values: &[S], schedule: &RateSchedule<S>) -> Result<()> {
    if values.len() != schedule.horizon().get() {
        return Err(Error::ScheduleLength { got: schedule.eps().len(), horizon: values.len() });
    }
    for (i, (w, &bound)) in values.windows(2).zip(schedule.eps()).enumerate() {
        let jump = (w[1] - w[0]).abs();
        if jump > bound {
            return Err(Error::RateViolation { t: i + 1, jump: jump.as_f64(), bound: bound.as_f64() });
        }
    }
    Ok(())
}
