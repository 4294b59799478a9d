//! Trajectory files.
//!
//! CSV: header `t,x_1,...,x_n,residual`, one row per mesh point, values in
//! `{:.16e}` (17 significant digits). JSON lines: one object
//! `{"t": .., "x": [..], "residual": ..}` per mesh point.

use crate::CliError;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spectral_dae::Solution;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[value(name = "jsonl", alias = "jsonlines")]
    JsonLines,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        }
    }
}

/// One mesh point as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub x: Vec<f64>,
    pub residual: f64,
}

pub fn records(traj: &Solution) -> Vec<Record> {
    traj.states
        .iter()
        .zip(&traj.residuals)
        .map(|(s, r)| Record {
            t: s.t,
            x: s.x.iter().copied().collect(),
            residual: *r,
        })
        .collect()
}

pub fn write_records(out: impl Write, records: &[Record], format: Format) -> Result<(), CliError> {
    let mut w = BufWriter::new(out);
    match format {
        Format::Csv => {
            let n = records.first().map_or(0, |r| r.x.len());
            let mut header = vec!["t".to_string()];
            header.extend((1..=n).map(|i| format!("x_{i}")));
            header.push("residual".into());
            writeln!(w, "{}", header.join(","))?;
            for r in records {
                let mut line = format!("{:.16e}", r.t);
                for v in &r.x {
                    line.push_str(&format!(",{v:.16e}"));
                }
                line.push_str(&format!(",{:.16e}", r.residual));
                writeln!(w, "{line}")?;
            }
        }
        Format::JsonLines => {
            for r in records {
                serde_json::to_writer(&mut w, r).map_err(|e| CliError::Io(e.into()))?;
                writeln!(w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(input: impl Read, format: Format) -> Result<Vec<Record>, CliError> {
    let reader = BufReader::new(input);
    let bad = |line: usize, what: &str| CliError::Usage(format!("line {line}: {what}"));
    let mut out = Vec::new();
    match format {
        Format::Csv => {
            let mut lines = reader.lines();
            let header = lines.next().ok_or_else(|| bad(1, "missing header"))??;
            let cols: Vec<&str> = header.split(',').collect();
            if cols.len() < 2 || cols[0] != "t" || cols[cols.len() - 1] != "residual" {
                return Err(bad(1, "header must be t,x_1..x_n,residual"));
            }
            for (i, line) in lines.enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let vals = line
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| bad(i + 2, &e.to_string()))?;
                if vals.len() != cols.len() {
                    return Err(bad(i + 2, "wrong column count"));
                }
                out.push(Record {
                    t: vals[0],
                    x: vals[1..vals.len() - 1].to_vec(),
                    residual: vals[vals.len() - 1],
                });
            }
        }
        Format::JsonLines => {
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                out.push(serde_json::from_str(&line).map_err(|e| bad(i + 1, &e.to_string()))?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_17_digits() {
        let recs = vec![
            Record {
                t: 0.1,
                x: vec![1.0 / 3.0, -2e-300, 12345.678901234567],
                residual: 0.0,
            },
            Record {
                t: 0.2,
                x: vec![std::f64::consts::PI, 0.0, -1.0],
                residual: 1e-17,
            },
        ];
        for format in [Format::Csv, Format::JsonLines] {
            let mut buf = Vec::new();
            write_records(&mut buf, &recs, format).unwrap();
            assert_eq!(read_records(buf.as_slice(), format).unwrap(), recs);
        }
        let mut buf = Vec::new();
        write_records(&mut buf, &recs, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x_1,x_2,x_3,residual\n"));
    }

    #[test]
    fn malformed_csv() {
        assert!(read_records("a,b\n1,2\n".as_bytes(), Format::Csv).is_err());
        assert!(read_records("t,x_1,residual\n1,2\n".as_bytes(), Format::Csv).is_err());
    }
}
