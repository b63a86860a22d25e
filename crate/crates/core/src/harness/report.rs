//! Sweep results and their CSV/JSON forms.
//!
//! The CSV has the header `strategy,environment,eps_bar,T,reps,mean_loss,stderr_loss`
//! and one row per cell. Slopes and failed cells follow as comment lines:
//!
//! ```text
//! # slopes
//! # slope,s1,martingale,0.98,0.3,0.01,0.95,1.01,7,0
//! # failure,s3,sawtooth,0.5,schedule too coarse
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading a
//! report back gives an identical value.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::fit::LogLogFit;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "strategy,environment,eps_bar,T,reps,mean_loss,stderr_loss";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub strategy: String,
    pub environment: String,
    pub eps_bar: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub reps: usize,
    pub mean_loss: f64,
    /// Absent when `reps == 1`.
    pub stderr_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub strategy: String,
    pub environment: String,
    pub fit: LogLogFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub strategy: String,
    pub environment: String,
    /// Grid value of the failing cell.
    pub eps: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub slopes: Vec<SlopeRecord>,
    pub failures: Vec<CellFailure>,
}

fn fnum(x: f64) -> String {
    format!("{x:?}")
}

fn pnum(field: &str, s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("{field}: {e}") })
}

fn pint(field: &str, s: &str, line: usize) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|e| Error::Parse { line, msg: format!("{field}: {e}") })
}

fn csv_line(fields: &[String]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(fields).map_err(|e| Error::Param(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::Param(e.to_string()))?;
    let mut s = String::from_utf8(bytes).map_err(|e| Error::Param(e.to_string()))?;
    s.pop();
    Ok(s)
}

fn csv_fields(line: &str, lineno: usize) -> Result<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
    match r.records().next() {
        Some(Ok(rec)) => Ok(rec.iter().map(str::to_string).collect()),
        Some(Err(e)) => Err(Error::Parse { line: lineno, msg: e.to_string() }),
        None => Ok(Vec::new()),
    }
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            let fields = [
                r.strategy.clone(),
                r.environment.clone(),
                fnum(r.eps_bar),
                r.horizon.to_string(),
                r.reps.to_string(),
                fnum(r.mean_loss),
                r.stderr_loss.map(fnum).unwrap_or_default(),
            ];
            writeln!(out, "{}", csv_line(&fields)?)?;
        }
        if !self.slopes.is_empty() || !self.failures.is_empty() {
            writeln!(out, "# slopes")?;
        }
        for s in &self.slopes {
            let f = &s.fit;
            let fields = [
                "slope".to_string(),
                s.strategy.clone(),
                s.environment.clone(),
                fnum(f.slope),
                fnum(f.intercept),
                fnum(f.stderr),
                fnum(f.ci95.0),
                fnum(f.ci95.1),
                f.points.to_string(),
                f.dropped.to_string(),
            ];
            writeln!(out, "# {}", csv_line(&fields)?)?;
        }
        for c in &self.failures {
            let fields =
                ["failure".to_string(), c.strategy.clone(), c.environment.clone(), fnum(c.eps), c.message.clone()];
            writeln!(out, "# {}", csv_line(&fields)?)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Param(e.to_string()))
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut report = SweepReport::default();
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == CSV_HEADER => {}
            Some((_, Ok(h))) => return Err(Error::Parse { line: 1, msg: format!("unexpected header `{h}`") }),
            Some((_, Err(e))) => return Err(e.into()),
            None => return Err(Error::Parse { line: 1, msg: "empty report".into() }),
        }
        for (i, line) in lines {
            let line = line?;
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let f = csv_fields(rest.trim_start(), n)?;
                match f.first().map(String::as_str) {
                    Some("slope") if f.len() == 10 => report.slopes.push(SlopeRecord {
                        strategy: f[1].clone(),
                        environment: f[2].clone(),
                        fit: LogLogFit {
                            slope: pnum("slope", &f[3], n)?,
                            intercept: pnum("intercept", &f[4], n)?,
                            stderr: pnum("stderr", &f[5], n)?,
                            ci95: (pnum("ci_lo", &f[6], n)?, pnum("ci_hi", &f[7], n)?),
                            points: pint("points", &f[8], n)?,
                            dropped: pint("dropped", &f[9], n)?,
                        },
                    }),
                    Some("failure") if f.len() == 5 => report.failures.push(CellFailure {
                        strategy: f[1].clone(),
                        environment: f[2].clone(),
                        eps: pnum("eps", &f[3], n)?,
                        message: f[4].clone(),
                    }),
                    Some("slope") | Some("failure") => {
                        return Err(Error::Parse { line: n, msg: "malformed comment record".into() })
                    }
                    _ => {}
                }
                continue;
            }
            let f = csv_fields(&line, n)?;
            if f.len() != 7 {
                return Err(Error::Parse { line: n, msg: format!("expected 7 fields, got {}", f.len()) });
            }
            report.rows.push(ReportRow {
                strategy: f[0].clone(),
                environment: f[1].clone(),
                eps_bar: pnum("eps_bar", &f[2], n)?,
                horizon: pint("T", &f[3], n)?,
                reps: pint("reps", &f[4], n)?,
                mean_loss: pnum("mean_loss", &f[5], n)?,
                stderr_loss: if f[6].trim().is_empty() { None } else { Some(pnum("stderr_loss", &f[6], n)?) },
            });
        }
        Ok(report)
    }

    /// The slope block as JSON (the sibling file of the CSV).
    pub fn slopes_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.slopes).map_err(|e| Error::Param(e.to_string()))
    }

    /// `(eps_bar, mean_loss)` points of one strategy and environment.
    pub fn points(&self, strategy: &str, environment: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy && r.environment == environment)
            .map(|r| (r.eps_bar, r.mean_loss))
            .collect()
    }

    pub fn slope(&self, strategy: &str, environment: &str) -> Option<&LogLogFit> {
        self.slopes.iter().find(|s| s.strategy == strategy && s.environment == environment).map(|s| &s.fit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepReport {
        SweepReport {
            rows: vec![
                ReportRow {
                    strategy: "s1".into(),
                    environment: "martingale".into(),
                    eps_bar: 0.1 + 0.2,
                    horizon: 100_000,
                    reps: 20,
                    mean_loss: 1.0 / 3.0,
                    stderr_loss: Some(1e-17),
                },
                ReportRow {
                    strategy: "s1".into(),
                    environment: "evader".into(),
                    eps_bar: 0.0625,
                    horizon: 10,
                    reps: 1,
                    mean_loss: 0.25,
                    stderr_loss: None,
                },
            ],
            slopes: vec![SlopeRecord {
                strategy: "s1".into(),
                environment: "martingale".into(),
                fit: LogLogFit { slope: 0.987654321, intercept: -0.1, stderr: 0.0, ci95: (0.9, 1.1), points: 7, dropped: 0 },
            }],
            failures: vec![CellFailure {
                strategy: "s3".into(),
                environment: "sawtooth".into(),
                eps: 0.5,
                message: "needs a constant schedule, \"quoted\"".into(),
            }],
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let text = r.to_csv_string().unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(SweepReport::read_csv(text.as_bytes()).unwrap(), r);
    }

    #[test]
    fn absent_stderr_is_an_empty_field() {
        let text = sample().to_csv_string().unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with(",0.25,"));
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(SweepReport::read_csv("a,b\n".as_bytes()).is_err());
    }
}
