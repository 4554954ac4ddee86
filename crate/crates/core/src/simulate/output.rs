//! CSV output of sweep results.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Scheme, SweepResult, SweepRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["axis", "scheme", "mean_wsr_bps_hz", "stderr", "realizations", "failures", "seed"];

/// Shortest decimal rendering of `v` rounded to 9 significant digits.
fn sig9(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            sig9(r.axis),
            r.scheme.to_string(),
            sig9(r.mean_wsr),
            sig9(r.stderr),
            r.realizations.to_string(),
            r.failures.to_string(),
            result.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `result` to `path`, one row per (axis point, scheme).
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io)?;
    write_csv(result, file).map_err(|e| io(std::io::Error::other(e)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSweep {
    pub seed: Option<u64>,
    pub rows: Vec<SweepRow>,
}

pub fn parse_csv<R: Read>(input: R) -> Result<ParsedSweep> {
    let bad = |what: &str| Error::InvalidInput(format!("malformed sweep CSV: {what}"));
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| bad(&e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad("unexpected header"));
    }
    let mut seed = None;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(&e.to_string()))?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(&rec[i]));
        let u = |i: usize| rec[i].parse::<u64>().map_err(|_| bad(&rec[i]));
        seed = Some(u(6)?);
        rows.push(SweepRow {
            axis: f(0)?,
            scheme: rec[1].parse::<Scheme>()?,
            mean_wsr: f(2)?,
            stderr: f(3)?,
            realizations: u(4)? as usize,
            failures: u(5)? as usize,
        });
    }
    Ok(ParsedSweep { seed, rows })
}
