//! Line-oriented JSON trace format.
//!
//! The first line is a header `{"T":..,"seed":..,"schedule_digest":"..","scalar":".."}`.
//! Each following line is one step with keys `t`, `v`, `p`, `sold`, plus
//! `eps` (the bound to the next step, absent on the last step) and the
//! optional `lo`, `hi`, `eps_hat`. Reals are written with 17 significant
//! digits so every `f64` (and `f32`) reads back bit-identical.

use std::io::{BufRead, Write};

use serde::Deserialize;

use super::{ConfidenceInterval, EpisodeTrace, RateSchedule, StepRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceHeader {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub schedule_digest: String,
    #[serde(default)]
    pub scalar: Option<String>,
}

#[derive(Deserialize)]
struct StepLine {
    t: usize,
    v: f64,
    p: f64,
    sold: u8,
    #[serde(default)]
    eps: Option<f64>,
    #[serde(default)]
    lo: Option<f64>,
    #[serde(default)]
    hi: Option<f64>,
    #[serde(default)]
    eps_hat: Option<f64>,
}

fn num<S: Scalar>(x: S) -> String {
    format!("{:.16e}", x.as_f64())
}

fn scalar_name<S: Scalar>() -> &'static str {
    if std::mem::size_of::<S>() == 4 {
        "f32"
    } else {
        "f64"
    }
}

pub fn write_trace<S: Scalar, W: Write>(trace: &EpisodeTrace<S>, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{{\"T\":{},\"seed\":{},\"schedule_digest\":\"{:016x}\",\"scalar\":\"{}\"}}",
        trace.horizon().get(),
        trace.seed(),
        trace.schedule().digest(),
        scalar_name::<S>()
    )?;
    let eps = trace.schedule().eps();
    for s in trace.steps() {
        let mut line = format!(
            "{{\"t\":{},\"v\":{},\"p\":{},\"sold\":{}",
            s.t,
            num(s.value),
            num(s.price),
            u8::from(s.sold)
        );
        if let Some(e) = eps.get(s.t - 1) {
            line.push_str(&format!(",\"eps\":{}", num(*e)));
        }
        if let Some(iv) = s.interval {
            line.push_str(&format!(",\"lo\":{},\"hi\":{}", num(iv.lo()), num(iv.hi())));
        }
        if let Some(e) = s.eps_hat {
            line.push_str(&format!(",\"eps_hat\":{}", num(e)));
        }
        line.push('}');
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse_err(line: usize, e: impl std::fmt::Display) -> Error {
    Error::Parse { line, msg: e.to_string() }
}

pub fn read_trace<S: Scalar, R: BufRead>(input: R) -> Result<EpisodeTrace<S>> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| match l {
        Ok(l) => !l.trim().is_empty(),
        Err(_) => true,
    });
    let (_, first) = lines.next().ok_or(Error::EmptyTrace)?;
    let header: TraceHeader = serde_json::from_str(&first?).map_err(|e| parse_err(1, e))?;

    let mut eps = Vec::with_capacity(header.horizon.saturating_sub(1));
    let mut steps = Vec::with_capacity(header.horizon);
    for (i, line) in lines {
        let line = line?;
        let raw: StepLine = serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e))?;
        if raw.t < header.horizon {
            let e = raw.eps.ok_or_else(|| parse_err(i + 1, "missing eps"))?;
            eps.push(S::of(e));
        }
        let interval = match (raw.lo, raw.hi) {
            (Some(lo), Some(hi)) => Some(ConfidenceInterval::new(S::of(lo), S::of(hi))?),
            (None, None) => None,
            _ => return Err(parse_err(i + 1, "lo and hi must appear together")),
        };
        steps.push(StepRecord {
            t: raw.t,
            value: S::of(raw.v),
            price: S::of(raw.p),
            sold: raw.sold != 0,
            interval,
            eps_hat: raw.eps_hat.map(S::of),
        });
    }
    let schedule = RateSchedule::new(eps)?;
    let digest = format!("{:016x}", schedule.digest());
    if digest != header.schedule_digest {
        return Err(parse_err(1, format!("schedule digest {digest} != header {}", header.schedule_digest)));
    }
    EpisodeTrace::new(schedule, steps, header.seed)
}
