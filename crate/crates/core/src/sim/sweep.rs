use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::estimate::{functionals_in, mse_direct_in};
use super::SimConfig;
use crate::error::{Error, Result};
use crate::table::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Delta,
    Pi,
    Lambda,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Delta => "delta",
            SweepAxis::Pi => "pi",
            SweepAxis::Lambda => "lambda",
        }
    }

    /// The template with this axis set to `value`.
    pub fn apply(self, template: &SimConfig, value: f64) -> SimConfig {
        let r = template.ratios();
        match self {
            SweepAxis::Delta => template.with_ratios(r.pi, value),
            SweepAxis::Pi => template.with_ratios(value, r.delta),
            SweepAxis::Lambda => SimConfig {
                lambda: value,
                ..template.clone()
            },
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "delta" => Ok(SweepAxis::Delta),
            "pi" => Ok(SweepAxis::Pi),
            "lambda" => Ok(SweepAxis::Lambda),
            other => Err(Error::Config(format!("unknown axis '{other}' (expected delta, pi or lambda)"))),
        }
    }
}

/// What each sweep cell estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Direct Monte Carlo MSE only.
    Mse,
    /// All functional estimates.
    Functionals,
}

fn record(axis: &str, value: f64, c: &SimConfig, quantity: &str, mean: f64, std: f64) -> Record {
    Record {
        axis: axis.to_string(),
        value,
        quantity: quantity.to_string(),
        estimate: mean,
        std,
        runs: c.runs,
        n: c.n,
        d: c.d,
        p: c.p,
        lambda: c.lambda,
        alpha2: c.alpha2,
        sigma2: c.sigma2,
        activation: c.activation.name(),
        data_law: c.data_law.to_string(),
        seed: c.seed,
    }
}

fn run_cell(axis: &str, value: f64, c: &SimConfig, kind: SweepKind) -> Result<Vec<Record>> {
    c.validate()?;
    Ok(match kind {
        SweepKind::Mse => {
            let e = mse_direct_in(c)?;
            vec![record(axis, value, c, "mse", e.mean, e.std)]
        }
        SweepKind::Functionals => functionals_in(c)?
            .named()
            .iter()
            .map(|(q, e)| record(axis, value, c, q, e.mean, e.std))
            .collect(),
    })
}

/// Runs prepared cells `(axis value, config)` and concatenates their records
/// in cell order. Each cell's seed must already be set.
pub fn sweep_cells(axis: &str, cells: &[(f64, SimConfig)], kind: SweepKind, threads: usize) -> Result<Vec<Record>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let tables = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, (value, c))| {
                run_cell(axis, *value, c, kind).map_err(|e| e.in_cell(format!("cell {i} ({axis} = {value})")))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(tables.into_iter().flatten().collect())
}

/// The cells of a sweep: cell `k` gets the template with the axis set to
/// `values[k]` and seed `template.seed ^ k`, so any cell can be rerun alone.
pub fn sweep_plan(template: &SimConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<(f64, SimConfig)>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{axis} values must be finite")));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config(format!("{axis} values must be sorted in increasing order")));
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut c = axis.apply(template, v);
            c.seed = template.seed ^ k as u64;
            (v, c)
        })
        .collect())
}

/// Long-format records for every value of `axis`.
pub fn sweep(template: &SimConfig, axis: SweepAxis, values: &[f64], kind: SweepKind) -> Result<Vec<Record>> {
    let cells = sweep_plan(template, axis, values)?;
    sweep_cells(axis.name(), &cells, kind, template.threads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> SimConfig {
        let mut c = SimConfig::from_ratios(20, 0.5, 1.0, 0.1);
        c.k_outer = 4;
        c.k_grid = 2;
        c.runs = 2;
        c
    }

    #[test]
    fn empty_values_give_empty_table() {
        assert!(sweep(&template(), SweepAxis::Delta, &[], SweepKind::Mse).unwrap().is_empty());
    }

    #[test]
    fn unsorted_or_nan_rejected() {
        assert!(sweep(&template(), SweepAxis::Delta, &[2.0, 1.0], SweepKind::Mse).is_err());
        assert!(sweep(&template(), SweepAxis::Lambda, &[f64::NAN], SweepKind::Mse).is_err());
    }

    #[test]
    fn cells_are_reproducible_alone() {
        let t = template();
        let rows = sweep(&t, SweepAxis::Delta, &[0.5, 1.0, 1.5], SweepKind::Mse).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].d, 30);
        let alone = sweep_cells("delta", &sweep_plan(&t, SweepAxis::Delta, &[0.5, 1.0, 1.5]).unwrap()[2..], SweepKind::Mse, 1)
            .unwrap();
        assert_eq!(alone[0], rows[2]);
    }

    #[test]
    fn cell_errors_name_the_cell() {
        let err = sweep(&template(), SweepAxis::Pi, &[0.5, 0.01], SweepKind::Functionals);
        // π sorted check comes first
        assert!(err.is_err());
        let err = sweep(&template(), SweepAxis::Pi, &[0.01, 0.5], SweepKind::Functionals).unwrap_err();
        assert!(err.to_string().starts_with("cell 0 (pi = 0.01)"), "{err}");
    }

    #[test]
    fn functionals_emit_eleven_rows_per_cell() {
        let rows = sweep(&template(), SweepAxis::Lambda, &[0.01, 0.1], SweepKind::Functionals).unwrap();
        assert_eq!(rows.len(), 22);
        assert_eq!(rows[0].quantity, "mse");
        assert_eq!(rows[11].lambda, 0.1);
    }
}
