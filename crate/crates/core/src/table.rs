//! Long-format result tables: one row per `(axis value, quantity)`.

use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One simulated or theoretical quantity at one axis value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub axis: String,
    pub value: f64,
    pub quantity: String,
    pub estimate: f64,
    pub std: f64,
    pub runs: usize,
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub lambda: f64,
    pub alpha2: f64,
    pub sigma2: f64,
    pub activation: String,
    pub data_law: String,
    pub seed: u64,
}

/// A [`Record`] from the empirical pipeline. `alpha2` and `sigma2` are empty
/// for real data, where they are unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRecord {
    pub axis: String,
    pub value: f64,
    pub quantity: String,
    pub estimate: f64,
    pub std: f64,
    pub runs: usize,
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub lambda: f64,
    pub alpha2: Option<f64>,
    pub sigma2: Option<f64>,
    pub activation: String,
    pub data_law: String,
    pub seed: u64,
    pub n_s: usize,
    pub n_i: usize,
    pub dataset: String,
}

/// Writes rows with a header. Floats use the shortest decimal that parses
/// back to the same value.
pub fn write_csv<T: Serialize, W: io::Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: io::Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_csv_file<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

pub fn read_csv_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_csv(std::fs::File::open(path)?)
}
