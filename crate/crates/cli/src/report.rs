//! Versioned CSV outputs. Every file starts with a `# schema=1` comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pem::diagnostics::TraceRow;
use pem::metrics::confidence_interval;

use crate::error::CliError;
use crate::pipeline::{ResultRecord, Status};

pub const SCHEMA_LINE: &str = "# schema=1";

pub const RESULT_COLUMNS: [&str; 15] = [
    "name",
    "seed",
    "domain",
    "n",
    "m",
    "T",
    "rho",
    "snr_in_db",
    "variant",
    "status",
    "msnr_db_mean",
    "per_source_msnr",
    "mean_inner_iters",
    "infeasible_fraction",
    "wall_time_s",
];

pub const SUMMARY_COLUMNS: [&str; 12] = [
    "name",
    "domain",
    "n",
    "m",
    "T",
    "rho",
    "snr_in_db",
    "variant",
    "seeds",
    "ok_seeds",
    "msnr_db_mean",
    "ci95_half_width",
];

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{SCHEMA_LINE}")?;
    Ok(csv::Writer::from_writer(file))
}

fn with_axis(axis: Option<&str>, columns: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(columns.len() + 1);
    out.push(columns[0].to_string());
    if axis.is_some() {
        out.push("axis".into());
    }
    out.extend(columns[1..].iter().map(|c| c.to_string()));
    out
}

fn result_fields(r: &ResultRecord, axis: Option<&str>) -> Vec<String> {
    let status = match &r.status {
        Status::Ok => "ok".to_string(),
        Status::Diverged(msg) => format!("diverged: {msg}"),
    };
    let per = r
        .per_source_msnr
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let mut f = vec![r.name.clone()];
    if let Some(a) = axis {
        f.push(a.to_string());
    }
    f.extend([
        r.seed.to_string(),
        r.domain.to_string(),
        r.n.to_string(),
        r.m.to_string(),
        r.t.to_string(),
        num(r.rho),
        opt(r.snr_in_db),
        r.variant.to_string(),
        status,
        num(r.msnr_db_mean),
        per,
        num(r.mean_inner_iters),
        num(r.infeasible_fraction),
        format!("{:.3}", r.wall_time_s),
    ]);
    f
}

/// One row per seed, in the order given.
pub fn write_results(path: &Path, records: &[ResultRecord], axis: Option<&str>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(with_axis(axis, &RESULT_COLUMNS))?;
    for r in records {
        w.write_record(result_fields(r, axis))?;
    }
    w.flush()?;
    Ok(())
}

/// Mean mSNR over the successful seeds of `group` and its 95% half-width
/// (NaN with fewer than two successful seeds).
pub fn aggregate(group: &[ResultRecord]) -> Result<(usize, f64, f64), CliError> {
    let ok: Vec<f64> = group
        .iter()
        .filter(|r| r.status == Status::Ok)
        .map(|r| r.msnr_db_mean)
        .collect();
    let (mean, half) = match ok.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (ok[0], f64::NAN),
        _ => confidence_interval(&ok, 0.95)?,
    };
    Ok((ok.len(), mean, half))
}

/// One aggregate row per group of records sharing a configuration.
pub fn write_summary(path: &Path, groups: &[Vec<ResultRecord>], axis: Option<&str>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(with_axis(axis, &SUMMARY_COLUMNS))?;
    for group in groups {
        let Some(first) = group.first() else { continue };
        let (ok, mean, half) = aggregate(group)?;
        let mut f = vec![first.name.clone()];
        if let Some(a) = axis {
            f.push(a.to_string());
        }
        f.extend([
            first.domain.to_string(),
            first.n.to_string(),
            first.m.to_string(),
            first.t.to_string(),
            num(first.rho),
            opt(first.snr_in_db),
            first.variant.to_string(),
            group.len().to_string(),
            ok.to_string(),
            num(mean),
            num(half),
        ]);
        w.write_record(f)?;
    }
    w.flush()?;
    Ok(())
}

/// Diagnostics trace rows, optionally prefixed by the seed they came from.
pub fn write_diag(path: &Path, rows: &[(Option<u64>, &TraceRow)]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let with_seed = rows.first().is_some_and(|(s, _)| s.is_some());
    let mut header: Vec<&str> = Vec::new();
    if with_seed {
        header.push("seed");
    }
    header.extend(TraceRow::HEADER);
    w.write_record(&header)?;
    for (seed, row) in rows {
        let mut f = Vec::new();
        if let Some(s) = seed {
            f.push(s.to_string());
        }
        f.extend(row.fields());
        w.write_record(f)?;
    }
    w.flush()?;
    Ok(())
}
