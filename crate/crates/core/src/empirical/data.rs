use std::io;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sim::{stream, Role};

/// Rows of the bundled synthetic data set.
pub const SYNTHETIC_ROWS: usize = 2000;
/// Features of the bundled synthetic data set.
pub const SYNTHETIC_DIM: usize = 20;
pub const DEFAULT_SPLIT: f64 = 0.9;

/// A numeric table as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

/// Which column holds the response.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ResponseColumn {
    #[default]
    Last,
    /// Zero-based column index.
    Index(usize),
    Name(String),
}

impl FromStr for ResponseColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty response column".into()));
        }
        Ok(match s {
            "last" => ResponseColumn::Last,
            _ => s.parse().map_or_else(|_| ResponseColumn::Name(s.to_string()), ResponseColumn::Index),
        })
    }
}

impl RawTable {
    fn response_index(&self, which: &ResponseColumn) -> Result<usize> {
        let cols = self.names.len();
        match which {
            ResponseColumn::Last => Ok(cols - 1),
            ResponseColumn::Index(k) if *k < cols => Ok(*k),
            ResponseColumn::Index(k) => Err(Error::Config(format!(
                "response column index {k} is out of range (table has {cols} columns)"
            ))),
            ResponseColumn::Name(name) => self
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Config(format!("no column named '{name}'"))),
        }
    }
}

/// Reads a comma-separated table with a header row. Every cell must be a
/// finite number; the first bad cell is reported by its 1-based data row
/// (the header is row 0) and 1-based column.
pub fn read_table<R: io::Read>(input: R) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let names: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if names.len() < 2 {
        return Err(Error::Config("need at least one feature column and a response column".into()));
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: r + 1,
                column: c + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: r + 1,
                    column: c + 1,
                    message: format!("'{cell}' is not finite"),
                });
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Config("table has no data rows".into()));
    }
    let values = DMatrix::from_row_slice(rows, names.len(), &data);
    Ok(RawTable { names, values })
}

pub fn write_table<W: io::Write>(table: &RawTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.names)?;
    for row in table.values.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `x ~ N(0, I_d)`, `θ ~ N(0, α²I_d/d)`, `y = xᵀθ + ε` with `ε ~ N(0, σ²)`.
pub fn synthetic_linear(rows: usize, d: usize, alpha2: f64, sigma2: f64, seed: u64) -> RawTable {
    let normal = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let mut rng = stream(seed, 0, Role::Theta, 0);
    let theta = DVector::from_fn(d, |_, _| (alpha2 / d as f64).sqrt() * normal(&mut rng));
    let mut rng = stream(seed, 0, Role::Data, 0);
    let x = DMatrix::from_fn(rows, d, |_, _| normal(&mut rng));
    let mut rng = stream(seed, 0, Role::Noise, 0);
    let y = &x * &theta + DVector::from_fn(rows, |_, _| sigma2.sqrt() * normal(&mut rng));
    let mut names: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    names.push("y".into());
    let mut values = x.insert_column(d, 0.0);
    values.set_column(d, &y);
    RawTable { names, values }
}

/// Training-split means and standard deviations (population convention).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub response_mean: f64,
    pub response_std: f64,
}

/// A standardized split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub response: DVector<f64>,
    pub feature_names: Vec<String>,
    pub response_name: String,
    pub stats: Standardization,
    /// Zero-based row of each sample in the original table.
    pub row_ids: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Features in original units.
    pub fn destandardize_features(&self) -> DMatrix<f64> {
        let mut x = self.features.clone();
        for (k, mut col) in x.column_iter_mut().enumerate() {
            col.apply(|v| *v = *v * self.stats.feature_std[k] + self.stats.feature_mean[k]);
        }
        x
    }

    pub fn destandardize_response(&self) -> DVector<f64> {
        self.response.map(|v| v * self.stats.response_std + self.stats.response_mean)
    }
}

fn mean_std(col: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = col.clone().count() as f64;
    let mean = col.clone().sum::<f64>() / n;
    let var = col.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Shuffles rows with `seed`, keeps the first `⌊N·split_fraction⌋` for
/// training and standardizes both parts with the training statistics.
pub fn prepare(raw: &RawTable, response: &ResponseColumn, split_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::domain("split_fraction", "must lie in (0, 1)", split_fraction));
    }
    let total = raw.values.nrows();
    let n_train = (total as f64 * split_fraction).floor() as usize;
    if n_train < 2 || n_train == total {
        return Err(Error::Config(format!(
            "a split fraction of {split_fraction} leaves {n_train} of {total} rows for training; need at least 2 training and 1 test row"
        )));
    }
    let target = raw.response_index(response)?;
    let feature_cols: Vec<usize> = (0..raw.names.len()).filter(|&c| c != target).collect();

    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut stream(seed, 0, Role::Shuffle, 0));
    let (train_rows, test_rows) = order.split_at(n_train);

    let stats_of = |c: usize| {
        let (mean, std) = mean_std(train_rows.iter().map(|&r| raw.values[(r, c)]));
        let scale = train_rows.iter().map(|&r| raw.values[(r, c)].abs()).fold(0.0, f64::max);
        if std <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            Err(Error::Degenerate(format!(
                "column '{}' is constant on the training split",
                raw.names[c]
            )))
        } else {
            Ok((mean, std))
        }
    };
    let mut feature_mean = Vec::with_capacity(feature_cols.len());
    let mut feature_std = Vec::with_capacity(feature_cols.len());
    for &c in &feature_cols {
        let (m, s) = stats_of(c)?;
        feature_mean.push(m);
        feature_std.push(s);
    }
    let (response_mean, response_std) = stats_of(target)?;
    let stats = Standardization {
        feature_mean,
        feature_std,
        response_mean,
        response_std,
    };

    let build = |rows: &[usize]| Dataset {
        features: DMatrix::from_fn(rows.len(), feature_cols.len(), |i, k| {
            (raw.values[(rows[i], feature_cols[k])] - stats.feature_mean[k]) / stats.feature_std[k]
        }),
        response: DVector::from_fn(rows.len(), |i, _| {
            (raw.values[(rows[i], target)] - stats.response_mean) / stats.response_std
        }),
        feature_names: feature_cols.iter().map(|&c| raw.names[c].clone()).collect(),
        response_name: raw.names[target].clone(),
        stats: stats.clone(),
        row_ids: rows.to_vec(),
    };
    Ok((build(train_rows), build(test_rows)))
}

/// [`read_table`] followed by [`prepare`].
pub fn load_and_prepare(
    path: &Path,
    response: &ResponseColumn,
    split_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let raw = read_table(std::fs::File::open(path)?)?;
    prepare(&raw, response, split_fraction, seed)
}
