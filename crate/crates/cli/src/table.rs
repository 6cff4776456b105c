//! CSV persistence of risk tables.
//!
//! Schema: `instance,estimator,S,A,n,repeats,mean_risk,stderr,seed`.
//! Floats are written with 17 significant digits so every `f64` survives a
//! write/read cycle bit for bit.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use transferlab::{EstimatorKind, InstanceKind, RiskEstimate, RiskRow};

pub const HEADER: [&str; 9] = [
    "instance",
    "estimator",
    "S",
    "A",
    "n",
    "repeats",
    "mean_risk",
    "stderr",
    "seed",
];

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rows<W: Write>(out: W, rows: &[RiskRow]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record([
            row.instance.to_string(),
            row.estimator.tag().to_string(),
            row.inputs.to_string(),
            row.labels.to_string(),
            row.n.to_string(),
            row.estimate.repeats.to_string(),
            format_float(row.estimate.mean),
            format_float(row.estimate.stderr),
            row.seed.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<RiskRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = reader.headers().context("reading CSV header")?.clone();
    if header.iter().ne(HEADER) {
        bail!(
            "unexpected CSV header '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        );
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.with_context(|| format!("line {line}"))?;
        let field = |k: usize| -> Result<&str> {
            record
                .get(k)
                .with_context(|| format!("line {line}: missing column {}", HEADER[k]))
        };
        let parse_err = |k: usize| format!("line {line}: bad {}", HEADER[k]);
        rows.push(RiskRow {
            instance: field(0)?
                .parse::<InstanceKind>()
                .with_context(|| parse_err(0))?,
            estimator: field(1)?
                .parse::<EstimatorKind>()
                .with_context(|| parse_err(1))?,
            inputs: field(2)?.parse().with_context(|| parse_err(2))?,
            labels: field(3)?.parse().with_context(|| parse_err(3))?,
            n: field(4)?.parse().with_context(|| parse_err(4))?,
            estimate: RiskEstimate {
                repeats: field(5)?.parse().with_context(|| parse_err(5))?,
                mean: field(6)?.parse().with_context(|| parse_err(6))?,
                stderr: field(7)?.parse().with_context(|| parse_err(7))?,
            },
            seed: field(8)?.parse().with_context(|| parse_err(8))?,
        });
    }
    Ok(rows)
}
