//! Reference computations that re-derive results from raw trace steps,
//! without going through the strategy or loss code paths they check.

use serde::Serialize;

use crate::model::{EpisodeTrace, LossSummary, StepRecord};
use crate::scalar::Scalar;

/// Recomputes the loss summary from `(v, p)` alone. The sale bit is
/// re-derived rather than read from the record; summation runs in step
/// order, so the result is bit-equal to [`crate::summarize`] on a valid trace.
pub fn recompute_losses<S: Scalar>(steps: &[StepRecord<S>]) -> Option<LossSummary<S>> {
    if steps.is_empty() {
        return None;
    }
    let (mut rev, mut opt, mut sym) = (S::zero(), S::zero(), S::zero());
    for s in steps {
        if s.price <= s.value {
            rev = rev + s.price;
        }
        opt = opt + s.value;
        sym = sym + (s.value - s.price).abs();
    }
    let n = S::of_usize(steps.len());
    Some(LossSummary { total_revenue: rev, opt, avg_revenue_loss: (opt - rev) / n, avg_symmetric_loss: sym / n })
}

/// Offline benchmarks of a value path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Benchmarks {
    /// `sum v_t`: pricing exactly at value every step.
    pub first_best: f64,
    /// Revenue-maximizing single price.
    pub best_fixed_price: f64,
    pub best_fixed_revenue: f64,
}

/// First-best revenue and the best fixed price. Candidate prices are the
/// observed values and the multiples of `grid` in `[0, 1]` (pass 0 to skip
/// the grid). Over observed values the search is exact: the revenue of a
/// fixed price only jumps at a value.
pub fn clairvoyant_opt<S: Scalar>(trace: &EpisodeTrace<S>, grid: f64) -> Benchmarks {
    let values: Vec<f64> = trace.steps().iter().map(|s| s.value.as_f64()).collect();
    let first_best = trace.steps().iter().fold(S::zero(), |a, s| a + s.value).as_f64();
    let (best_fixed_price, best_fixed_revenue) = best_fixed_price(&values, grid);
    Benchmarks { first_best, best_fixed_price, best_fixed_revenue }
}

/// `max_p p * #{t : p <= v_t}` over the observed values and the `grid` multiples.
pub fn best_fixed_price(values: &[f64], grid: f64) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut candidates = sorted.clone();
    if grid > 0.0 {
        let n = (1.0 / grid).floor() as usize;
        candidates.extend((0..=n).map(|k| (k as f64 * grid).min(1.0)));
    }
    let mut best = (0.0, 0.0);
    for p in candidates {
        let buyers = sorted.len() - sorted.partition_point(|&v| v < p);
        let revenue = p * buyers as f64;
        if revenue > best.1 {
            best = (p, revenue);
        }
    }
    best
}

/// A step whose snapshot interval misses the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub t: usize,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Which snapshot steps the containment audit checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditScope {
    /// Every step carrying an interval.
    All,
    /// For unknown-rate strategies: only steps whose recorded estimate is at
    /// least the largest rate in the schedule, starting from the first such step.
    CalibratedEstimate,
}

/// Lists every audited step where `lo <= v <= hi` fails.
pub fn audit_containment<S: Scalar>(trace: &EpisodeTrace<S>, scope: AuditScope) -> Vec<Violation> {
    let max_rate = trace.schedule().max();
    trace
        .steps()
        .iter()
        .filter(|s| match scope {
            AuditScope::All => true,
            AuditScope::CalibratedEstimate => s.eps_hat.is_some_and(|e| e >= max_rate),
        })
        .filter_map(|s| {
            let iv = s.interval?;
            (!iv.contains(s.value)).then(|| Violation {
                t: s.t,
                value: s.value.as_f64(),
                lo: iv.lo().as_f64(),
                hi: iv.hi().as_f64(),
            })
        })
        .collect()
}

pub fn violations_json(violations: &[Violation]) -> String {
    serde_json::to_string(violations).expect("violations serialize")
}

/// Absolute slack on the width recursion; only rounding in the clamp and
/// the halving can exceed the exact bound.
pub const WIDTH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthCheck {
    pub pass: bool,
    /// First step `t` where `a_{t+1} > a_t / 2 + 2 eps_t`.
    pub first_failure: Option<usize>,
    pub total_width: f64,
    /// `8 sum eps_t + 2 a_1`.
    pub total_bound: f64,
    pub widths: Vec<f64>,
}

/// Checks the width recursion of a bisection trace with interval snapshots:
/// `a_{t+1} <= a_t / 2 + 2 eps_t` at every step and
/// `sum a_t <= 8 sum eps_t + 2 a_1`. Fails if a snapshot is missing.
pub fn width_recursion_check<S: Scalar>(trace: &EpisodeTrace<S>) -> WidthCheck {
    let widths: Vec<f64> = trace.steps().iter().map(|s| s.interval.map_or(f64::NAN, |i| i.width().as_f64())).collect();
    let eps: Vec<f64> = trace.schedule().eps().iter().map(|e| e.as_f64()).collect();
    let mut first_failure = widths.iter().position(|w| w.is_nan()).map(|i| i + 1);
    if first_failure.is_none() {
        first_failure = widths
            .windows(2)
            .zip(&eps)
            .position(|(w, e)| w[1] > w[0] / 2.0 + 2.0 * e + WIDTH_TOLERANCE)
            .map(|i| i + 1);
    }
    let total_width: f64 = widths.iter().sum();
    let total_bound = 8.0 * eps.iter().sum::<f64>() + 2.0 * widths[0];
    let pass = first_failure.is_none() && total_width <= total_bound + WIDTH_TOLERANCE * widths.len() as f64;
    WidthCheck { pass, first_failure, total_width, total_bound, widths }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{summarize, ConfidenceInterval, RateSchedule};

    fn trace(values: &[f64], prices: &[f64], eps: f64) -> EpisodeTrace<f64> {
        let steps = values
            .iter()
            .zip(prices)
            .enumerate()
            .map(|(i, (&v, &p))| StepRecord::new(i + 1, v, p).unwrap())
            .collect();
        EpisodeTrace::new(RateSchedule::new(vec![eps; values.len() - 1]).unwrap(), steps, 0).unwrap()
    }

    #[test]
    fn constant_value_benchmarks() {
        let t = trace(&[0.8; 10], &[0.5; 10], 0.0);
        let b = clairvoyant_opt(&t, 0.0);
        assert!((b.first_best - 8.0).abs() < 1e-12);
        assert_eq!(b.best_fixed_price, 0.8);
        assert!((b.best_fixed_revenue - 8.0).abs() < 1e-12);
    }

    #[test]
    fn recomputation_matches_summary() {
        let t = trace(&[0.5, 0.55, 0.6, 0.5], &[0.4, 0.6, 0.6, 0.0], 0.1);
        assert_eq!(recompute_losses(t.steps()).unwrap(), summarize(&t).unwrap());
    }

    #[test]
    fn corrupted_interval_is_flagged_once() {
        let mut steps: Vec<StepRecord<f64>> =
            (1..=5).map(|t| StepRecord::new(t, 0.5, 0.5).unwrap()).collect();
        for s in &mut steps {
            s.interval = Some(ConfidenceInterval::new(0.4, 0.6).unwrap());
        }
        steps[2].interval = Some(ConfidenceInterval::new(0.6, 0.7).unwrap());
        let t = EpisodeTrace::new(RateSchedule::new(vec![0.0; 4]).unwrap(), steps, 0).unwrap();
        let v = audit_containment(&t, AuditScope::All);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].t, 3);
        assert!(violations_json(&v).contains("\"t\":3"));
    }

    #[test]
    fn missing_snapshot_fails_width_check() {
        let t = trace(&[0.5; 4], &[0.5; 4], 0.0);
        assert_eq!(width_recursion_check(&t).first_failure, Some(1));
    }
}
