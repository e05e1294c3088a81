//! Deterministic artifact writers and readers.
//!
//! Every file starts with (or embeds) the same metadata block: the
//! effective config hash and master seed, so a result can always be
//! traced back to the exact invocation that produced it. Identical
//! configs produce byte-identical files; all maps are ordered and floats
//! use the shortest round-trip representation.

use crate::error::{LabError, Result};
use crate::experiments::{ExperimentTable, Row};
use crate::map::OrbitSample;
use crate::measure::DensityEstimate;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

fn open_out(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(File::create(path)?)
}

fn write_comment_block(f: &mut File, metadata: &BTreeMap<String, String>) -> Result<()> {
    for (k, v) in metadata {
        writeln!(f, "# {k}={v}")?;
    }
    Ok(())
}

fn metadata_json(metadata: &BTreeMap<String, String>) -> Value {
    let mut m = Map::new();
    for (k, v) in metadata {
        m.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(m)
}

/// Long-form statistic table as RFC-4180 CSV with `#` metadata comments.
pub fn write_table_csv(path: &Path, table: &ExperimentTable) -> Result<()> {
    let mut f = open_out(path)?;
    write_comment_block(&mut f, &table.metadata)?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["alpha", "n", "trial", "statistic", "value"])
        .map_err(io_like)?;
    for r in &table.rows {
        w.write_record([
            r.alpha.to_string(),
            r.n.to_string(),
            r.trial.to_string(),
            r.statistic.clone(),
            r.value.to_string(),
        ])
        .map_err(io_like)?;
    }
    w.flush()?;
    Ok(())
}

/// Table as a single JSON object: metadata plus a rows array.
pub fn write_table_json(path: &Path, table: &ExperimentTable) -> Result<()> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({
                "alpha": r.alpha,
                "n": r.n,
                "trial": r.trial,
                "statistic": r.statistic,
                "value": r.value,
            })
        })
        .collect();
    let doc = json!({
        "metadata": metadata_json(&table.metadata),
        "rows": rows,
    });
    let mut f = open_out(path)?;
    serde_json::to_writer_pretty(&mut f, &doc).map_err(io_like)?;
    writeln!(f)?;
    Ok(())
}

fn io_like<E: std::fmt::Display>(e: E) -> LabError {
    LabError::Io(std::io::Error::other(e.to_string()))
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| LabError::Config(format!("table parse: bad {what} value {s:?}")))
}

/// Reads a table written by `write_table_csv`.
pub fn read_table_csv(path: &Path) -> Result<ExperimentTable> {
    let f = BufReader::new(File::open(path)?);
    let mut metadata = BTreeMap::new();
    let mut body = String::new();
    for line in f.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                metadata.insert(k.to_string(), v.to_string());
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(io_like)?;
        if record.len() != 5 {
            return Err(LabError::Config(format!(
                "table parse: expected 5 columns, got {}",
                record.len()
            )));
        }
        rows.push(Row {
            alpha: parse_field(&record[0], "alpha")?,
            n: parse_field(&record[1], "n")?,
            trial: parse_field(&record[2], "trial")?,
            statistic: record[3].to_string(),
            value: parse_field(&record[4], "value")?,
        });
    }
    Ok(ExperimentTable { metadata, rows })
}

/// Reads a table written by `write_table_json`.
pub fn read_table_json(path: &Path) -> Result<ExperimentTable> {
    let f = BufReader::new(File::open(path)?);
    let doc: Value = serde_json::from_reader(f).map_err(io_like)?;
    let mut metadata = BTreeMap::new();
    if let Some(m) = doc.get("metadata").and_then(Value::as_object) {
        for (k, v) in m {
            if let Some(s) = v.as_str() {
                metadata.insert(k.clone(), s.to_string());
            }
        }
    }
    let rows_value = doc
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| LabError::Config("table parse: missing rows array".into()))?;
    let mut rows = Vec::new();
    for r in rows_value {
        let get = |k: &str| {
            r.get(k)
                .ok_or_else(|| LabError::Config(format!("table parse: row missing {k}")))
        };
        rows.push(Row {
            alpha: get("alpha")?.as_f64().unwrap_or(f64::NAN),
            n: get("n")?.as_u64().unwrap_or(0),
            trial: get("trial")?.as_u64().unwrap_or(0) as u32,
            statistic: get("statistic")?.as_str().unwrap_or("").to_string(),
            value: get("value")?.as_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(ExperimentTable { metadata, rows })
}

/// Density table: one row per cell, `cell_lo,cell_hi,mass,density`.
pub fn write_density_csv(
    path: &Path,
    density: &DensityEstimate,
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    let mut f = open_out(path)?;
    write_comment_block(&mut f, metadata)?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["cell_lo", "cell_hi", "mass", "density"])
        .map_err(io_like)?;
    for i in 0..density.partition().len() {
        let (lo, hi) = density.partition().cell(i);
        w.write_record([
            lo.to_string(),
            hi.to_string(),
            density.weights()[i].to_string(),
            density.density(i).to_string(),
        ])
        .map_err(io_like)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_density_json(
    path: &Path,
    density: &DensityEstimate,
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    let cells: Vec<Value> = (0..density.partition().len())
        .map(|i| {
            let (lo, hi) = density.partition().cell(i);
            json!({
                "cell_lo": lo,
                "cell_hi": hi,
                "mass": density.weights()[i],
                "density": density.density(i),
            })
        })
        .collect();
    let doc = json!({
        "metadata": metadata_json(metadata),
        "cells": cells,
    });
    let mut f = open_out(path)?;
    serde_json::to_writer_pretty(&mut f, &doc).map_err(io_like)?;
    writeln!(f)?;
    Ok(())
}

/// Orbit trace: `index,point,digit`.
pub fn write_orbit_csv(
    path: &Path,
    samples: &[OrbitSample],
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    let mut f = open_out(path)?;
    write_comment_block(&mut f, metadata)?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["index", "point", "digit"]).map_err(io_like)?;
    for s in samples {
        w.write_record([
            s.index.to_string(),
            s.point.value().to_string(),
            s.digit.as_u8().to_string(),
        ])
        .map_err(io_like)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_orbit_json(
    path: &Path,
    samples: &[OrbitSample],
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    let rows: Vec<Value> = samples
        .iter()
        .map(|s| {
            json!({
                "index": s.index,
                "point": s.point.value(),
                "digit": s.digit.as_u8(),
            })
        })
        .collect();
    let doc = json!({
        "metadata": metadata_json(metadata),
        "rows": rows,
    });
    let mut f = open_out(path)?;
    serde_json::to_writer_pretty(&mut f, &doc).map_err(io_like)?;
    writeln!(f)?;
    Ok(())
}

/// Arbitrary summary document (fits, report aggregates) with the shared
/// metadata block attached.
pub fn write_summary_json(
    path: &Path,
    metadata: &BTreeMap<String, String>,
    body: Value,
) -> Result<()> {
    let doc = json!({
        "metadata": metadata_json(metadata),
        "summary": body,
    });
    let mut f = open_out(path)?;
    serde_json::to_writer_pretty(&mut f, &doc).map_err(io_like)?;
    writeln!(f)?;
    Ok(())
}
