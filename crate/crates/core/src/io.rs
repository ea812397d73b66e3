//! On-disk formats: the CSDF1 binary field dump and the CSV layouts for
//! trajectories, probe reports, and sweep results.
//!
//! CSDF1: one ASCII header line
//! `CSDF1 n=<n> L=<dom_half_width> rep=<pos|freq> comps=<1|2>\n`
//! followed by little-endian `f64` pairs `(re, im)` in row-major order, one
//! full component after the other. The header prints `L` with the shortest
//! representation that parses back to the identical double, so a write/read
//! cycle is bit-exact.

use crate::error::{CsdError, Result};
use crate::estimates::ProbeReport;
use crate::evolution::TrajectoryRecord;
use crate::field::{Rep, ScalarField, SpinorField};
use crate::grid::GridSpec;
use crate::illposed::SweepResult;
use num_complex::Complex64 as C64;
use std::io::{Read, Write};

fn rep_tag(rep: Rep) -> &'static str {
    match rep {
        Rep::Position => "pos",
        Rep::Frequency => "freq",
    }
}

fn write_header(w: &mut impl Write, grid: &GridSpec, rep: Rep, comps: usize) -> Result<()> {
    writeln!(
        w,
        "CSDF1 n={} L={} rep={} comps={}",
        grid.n,
        grid.dom_half_width,
        rep_tag(rep),
        comps
    )?;
    Ok(())
}

fn write_payload(w: &mut impl Write, values: &[C64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Write a scalar field (`comps=1`).
pub fn write_csdf1_scalar(w: &mut impl Write, f: &ScalarField) -> Result<()> {
    write_header(w, &f.grid, f.rep, 1)?;
    write_payload(w, &f.values)
}

/// Write a spinor field (`comps=2`, components stored sequentially).
pub fn write_csdf1_spinor(w: &mut impl Write, psi: &SpinorField) -> Result<()> {
    write_header(w, psi.grid(), psi.rep(), 2)?;
    write_payload(w, &psi.up.values)?;
    write_payload(w, &psi.down.values)
}

/// Parsed CSDF1 content.
pub enum Csdf1 {
    Scalar(ScalarField),
    Spinor(SpinorField),
}

fn parse_header(line: &str) -> Result<(usize, f64, Rep, usize)> {
    let mut parts = line.trim_end().split(' ');
    if parts.next() != Some("CSDF1") {
        return Err(CsdError::Format("missing CSDF1 magic".into()));
    }
    let mut n = None;
    let mut l = None;
    let mut rep = None;
    let mut comps = None;
    for kv in parts {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CsdError::Format(format!("malformed header token '{kv}'")))?;
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|e| CsdError::Format(e.to_string()))?),
            "L" => l = Some(value.parse::<f64>().map_err(|e| CsdError::Format(e.to_string()))?),
            "rep" => {
                rep = Some(match value {
                    "pos" => Rep::Position,
                    "freq" => Rep::Frequency,
                    other => return Err(CsdError::Format(format!("unknown rep '{other}'"))),
                })
            }
            "comps" => {
                comps =
                    Some(value.parse::<usize>().map_err(|e| CsdError::Format(e.to_string()))?)
            }
            other => return Err(CsdError::Format(format!("unknown header key '{other}'"))),
        }
    }
    match (n, l, rep, comps) {
        (Some(n), Some(l), Some(rep), Some(c)) if c == 1 || c == 2 => Ok((n, l, rep, c)),
        _ => Err(CsdError::Format("incomplete CSDF1 header".into())),
    }
}

/// Read a CSDF1 stream.
pub fn read_csdf1(r: &mut impl Read) -> Result<Csdf1> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CsdError::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| CsdError::Format("header is not UTF-8".into()))?;
    let (n, l, rep, comps) = parse_header(header)?;
    let grid = GridSpec::new(n, l)?;
    let payload = &bytes[nl + 1..];
    let expected = comps * grid.len() * 16;
    if payload.len() != expected {
        return Err(CsdError::Format(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            expected
        )));
    }
    let mut components = Vec::with_capacity(comps);
    for c in 0..comps {
        let mut values = Vec::with_capacity(grid.len());
        let base = c * grid.len() * 16;
        for i in 0..grid.len() {
            let o = base + i * 16;
            let re = f64::from_le_bytes(payload[o..o + 8].try_into().unwrap());
            let im = f64::from_le_bytes(payload[o + 8..o + 16].try_into().unwrap());
            values.push(C64::new(re, im));
        }
        components.push(ScalarField::from_values(grid, rep, values)?);
    }
    if comps == 1 {
        Ok(Csdf1::Scalar(components.pop().unwrap()))
    } else {
        let down = components.pop().unwrap();
        let up = components.pop().unwrap();
        Ok(Csdf1::Spinor(SpinorField::new(up, down)?))
    }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Quote a CSV field when it contains a comma, quote, or newline.
fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Trajectory CSV: header `t,Q,Hs(<s1>),...` and one row per recorded time.
pub fn trajectory_csv(rec: &TrajectoryRecord) -> String {
    let mut out = String::from("t,Q");
    for s in &rec.sobolev_indices {
        out.push_str(&format!(",Hs({s})"));
    }
    out.push('\n');
    for (k, t) in rec.times.iter().enumerate() {
        out.push_str(&format!("{t},{}", rec.charge[k]));
        for col in &rec.hs_norms {
            out.push_str(&format!(",{}", col[k]));
        }
        out.push('\n');
    }
    out
}

/// One probe report as a CSV row:
/// `probe,params,n,min_ratio,max_ratio,bound,slack,seed`.
pub fn probe_csv_row(rep: &ProbeReport) -> String {
    let params = rep
        .params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{},{},{},{},{},{},{},{}\n",
        csv_quote(&rep.probe),
        csv_quote(&params),
        rep.n_samples,
        rep.min_ratio,
        rep.max_ratio,
        rep.bound,
        rep.slack,
        rep.seed
    )
}

pub fn probe_csv_header() -> &'static str {
    "probe,params,n,min_ratio,max_ratio,bound,slack,seed\n"
}

/// Sweep CSV: `lambda,mu,t,phi_hs,L_hs,ratio,c1` rows followed by a footer
/// row `fit,<slope>,<residual>,<expected_slope>,,,`.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("lambda,mu,t,phi_hs,L_hs,ratio,c1\n");
    for r in &sweep.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.lambda, r.mu, r.t, r.phi_hs, r.l_hs, r.ratio, r.c1
        ));
    }
    out.push_str(&format!(
        "fit,{},{},{},,,\n",
        sweep.slope, sweep.residual, sweep.expected_slope
    ));
    out
}
