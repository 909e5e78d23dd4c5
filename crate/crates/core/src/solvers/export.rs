//! CSV export and import of trajectories.
//!
//! The first line is a `#` comment carrying the method, the gradient-mapping
//! stepsize, the status and the objective constants. Each following row is
//! one iterate; `t_or_gamma` is the step taken from that iterate (empty on
//! the last row) and absent metrics are empty cells.

use std::io::{BufRead, Write};

use super::{Method, Metrics, Status, Trajectory};
use crate::error::{Error, Result};
use crate::objectives::Constants;
use crate::vector::Vector;

const METRIC_COLUMNS: [&str; 5] = [
    "dist_sq",
    "f_gap",
    "grad_diff_sq",
    "grad_map_norm",
    "fw_gap",
];

fn fmt(v: f64) -> String {
    // 17 significant digits
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let constants = serde_json::to_string(&traj.constants).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(
        out,
        "# method={} gamma={} status={:?} constants={}",
        traj.method,
        fmt(traj.gamma),
        traj.status,
        constants
    )?;
    let d = traj.iterates.first().map_or(0, |x| x.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string()];
    header.extend((0..d).map(|i| format!("x_{i}")));
    header.push("t_or_gamma".into());
    header.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (k, (x, m)) in traj.iterates.iter().zip(&traj.metrics).enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.iter().map(|&c| fmt(c)));
        row.push(opt(traj.steps.get(k).copied()));
        row.extend([
            opt(m.dist_sq),
            opt(m.f_gap),
            opt(m.grad_diff_sq),
            opt(m.grad_map_norm),
            opt(m.fw_gap),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cell(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

pub fn read_csv<R: BufRead>(mut input: R) -> Result<Trajectory> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let comment = first
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing '# method=...' header line".into()))?;
    let mut method = None;
    let mut gamma = 1.0;
    let mut status = Status::MaxIters;
    let mut constants = Constants::default();
    for field in comment.split_whitespace() {
        let Some((key, value)) = field.split_once('=') else {
            continue;
        };
        match key {
            "method" => method = Some(value.parse::<Method>()?),
            "gamma" => gamma = cell(value)?.unwrap_or(1.0),
            "status" => {
                status = match value {
                    "MaxIters" => Status::MaxIters,
                    "Stationary" => Status::Stationary,
                    "Converged" => Status::Converged,
                    other => return Err(Error::Parse(format!("unknown status {other:?}"))),
                }
            }
            "constants" => {
                constants = serde_json::from_str(value).map_err(|e| Error::Parse(e.to_string()))?
            }
            _ => {}
        }
    }
    let method = method.ok_or_else(|| Error::Parse("header lacks method=".into()))?;

    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let d = headers.iter().filter(|h| h.starts_with("x_")).count();
    if headers.len() != d + 2 + METRIC_COLUMNS.len() {
        return Err(Error::Parse(format!(
            "unexpected column count {}",
            headers.len()
        )));
    }
    let mut iterates = Vec::new();
    let mut steps = Vec::new();
    let mut metrics = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let x: Result<Vec<f64>> = (0..d)
            .map(|i| cell(&rec[1 + i])?.ok_or_else(|| Error::Parse("empty coordinate".into())))
            .collect();
        iterates.push(Vector::from(x?));
        if let Some(s) = cell(&rec[1 + d])? {
            steps.push(s);
        }
        let m = |j: usize| cell(&rec[2 + d + j]);
        metrics.push(Metrics {
            dist_sq: m(0)?,
            f_gap: m(1)?,
            grad_diff_sq: m(2)?,
            grad_map_norm: m(3)?,
            fw_gap: m(4)?,
        });
    }
    if iterates.is_empty() || steps.len() + 1 != iterates.len() {
        return Err(Error::Parse("inconsistent trajectory lengths".into()));
    }
    Ok(Trajectory {
        method,
        gamma,
        constants,
        iterates,
        steps,
        metrics,
        sampled: Vec::new(),
        status,
    })
}
