//! CSV files: breathing signal, rates, RVS matrix and synthesis ground truth.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back yields bit-identical values.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::estimator::rate::RateEstimate;
use crate::estimator::signal::BreathingSignal;
use crate::rvs::Rvs;
use crate::synth::GroundTruth;

pub const SIGNAL_HEADER: [&str; 2] = ["t_s", "value"];
pub const RATE_HEADER: [&str; 3] = ["t_center_s", "bpm", "confidence"];
pub const TRUTH_HEADER: [&str; 3] = ["t_s", "phase_rad", "rate_bpm"];
/// Top-left cell of the RVS matrix: rows are frequencies, columns are times.
pub const RVS_CORNER: &str = "f_hz\\t_s";

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("line {line}: {s:?} is not a number")))
}

/// Reads a numeric CSV with an exact expected header.
fn read_columns<R: Read, const N: usize>(r: R, header: [&str; N]) -> Result<Vec<[f64; N]>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let got: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if got != header {
        return Err(Error::InvalidParameter(format!(
            "expected header {header:?}, got {got:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != N {
            return Err(Error::InvalidParameter(format!("line {}: expected {N} fields", i + 2)));
        }
        let mut row = [0.0; N];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = parse_f64(field, i + 2)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_signal_csv<W: Write>(w: W, sig: &BreathingSignal) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(SIGNAL_HEADER)?;
    for (t, v) in sig.times.iter().zip(&sig.values) {
        wtr.write_record([t.to_string(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `t_s,value` rows as `(times, values)`.
pub fn read_signal_csv<R: Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = read_columns(r, SIGNAL_HEADER)?;
    Ok(rows.into_iter().map(|[t, v]| (t, v)).unzip())
}

pub fn write_rates_csv<W: Write>(w: W, rates: &[RateEstimate]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(RATE_HEADER)?;
    for r in rates {
        wtr.write_record([r.t_center.to_string(), r.bpm.to_string(), r.confidence.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_rates_csv<R: Read>(r: R) -> Result<Vec<RateEstimate>> {
    Ok(read_columns(r, RATE_HEADER)?
        .into_iter()
        .map(|[t_center, bpm, confidence]| RateEstimate {
            t_center,
            bpm,
            confidence,
        })
        .collect())
}

pub fn write_ground_truth_csv<W: Write>(w: W, truth: &GroundTruth) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(TRUTH_HEADER)?;
    for i in 0..truth.len() {
        wtr.write_record([
            truth.times[i].to_string(),
            truth.phase_rad[i].to_string(),
            truth.rate_bpm[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_ground_truth_csv<R: Read>(r: R) -> Result<GroundTruth> {
    let rows = read_columns(r, TRUTH_HEADER)?;
    let mut truth = GroundTruth {
        times: Vec::with_capacity(rows.len()),
        phase_rad: Vec::with_capacity(rows.len()),
        rate_bpm: Vec::with_capacity(rows.len()),
    };
    for [t, p, r] in rows {
        truth.times.push(t);
        truth.phase_rad.push(p);
        truth.rate_bpm.push(r);
    }
    Ok(truth)
}

/// First row: corner cell then column centre times. Each further row: bin
/// centre frequency then magnitudes, lowest frequency first.
pub fn write_rvs_csv<W: Write>(w: W, rvs: &Rvs) -> Result<()> {
    let mut wtr = writer(w);
    let mut head = vec![RVS_CORNER.to_string()];
    head.extend(rvs.times_s.iter().map(f64::to_string));
    wtr.write_record(&head)?;
    for (fi, f) in rvs.freqs_hz.iter().enumerate() {
        let mut row = vec![f.to_string()];
        row.extend(rvs.columns.iter().map(|c| c[fi].to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
