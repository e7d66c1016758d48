use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scenario::ResultRow;

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "param",
    "param_value",
    "metric",
    "analytic",
    "mc_mean",
    "mc_stderr",
    "n_trials",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Usage(format!("unknown format `{s}`; expected csv or json"))),
        }
    }
}

/// Floats use the shortest scientific form that parses back to the same value.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.param.clone(),
            format!("{:e}", r.param_value),
            r.metric.clone(),
            format!("{:e}", r.analytic),
            format!("{:e}", r.mc_mean),
            format!("{:e}", r.mc_stderr),
            r.n_trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out).map_err(serde_json::Error::io)?;
    Ok(())
}

/// Write `rows` to `path`, or to stdout when `path` is `None`.
pub fn emit(rows: &[ResultRow], format: Format, path: Option<&Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Usage("nothing to emit".into()));
    }
    let write = |w: &mut dyn Write| match format {
        Format::Csv => write_csv(rows, w),
        Format::Json => write_json(rows, w),
    };
    match path {
        Some(p) => {
            let io_err = |source| Error::Io {
                path: p.to_path_buf(),
                source,
            };
            let mut w = BufWriter::new(File::create(p).map_err(io_err)?);
            write(&mut w)?;
            w.flush().map_err(io_err)
        }
        None => write(&mut io::stdout().lock()),
    }
}
