//! The grid protocol on tabular data: `n_s` row subsamples `Xᵢ` crossed with
//! `n_i` Haar projections `Wⱼ`, a linear ridge readout per pair and Monte
//! Carlo estimates of MSE, variance, bias and the two main effects over a
//! held-out test set.

mod data;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

pub use data::{
    load_and_prepare, prepare, read_table, synthetic_linear, write_table, Dataset, RawTable, ResponseColumn,
    Standardization, DEFAULT_SPLIT, SYNTHETIC_DIM, SYNTHETIC_ROWS,
};

use crate::error::{Error, Result};
use crate::sim::{sample_orthogonal, stream, Estimate, Role};
use crate::table::EmpiricalRecord;

/// Settings of one `n_s × n_i` fit grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Rows per subsample.
    pub n: usize,
    /// Projection dimension.
    pub p: usize,
    pub lambda: f64,
    pub n_s: usize,
    pub n_i: usize,
    pub seed: u64,
}

/// Test-set estimates from one grid. `rest = variance − v_s − v_i`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EmpiricalEstimates {
    pub mse: f64,
    pub variance: f64,
    pub bias2: f64,
    pub v_s: f64,
    pub v_i: f64,
    pub rest: f64,
}

impl EmpiricalEstimates {
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("mse", self.mse),
            ("variance", self.variance),
            ("bias2", self.bias2),
            ("v_s", self.v_s),
            ("v_i", self.v_i),
            ("rest", self.rest),
        ]
    }
}

fn check(train: &Dataset, test: &Dataset, spec: &GridSpec) -> Result<()> {
    let d = train.dim();
    if test.dim() != d {
        return Err(Error::Dimension(format!("train has {d} features but test has {}", test.dim())));
    }
    if spec.n == 0 || spec.n > train.len() {
        return Err(Error::Config(format!(
            "subsample size n = {} must lie in [1, {}] (training rows)",
            spec.n,
            train.len()
        )));
    }
    if spec.p == 0 || spec.p > d {
        return Err(Error::Dimension(format!("p = {} must lie in [1, d = {d}]", spec.p)));
    }
    if spec.n_s == 0 || spec.n_i == 0 {
        return Err(Error::Config("n_s and n_i must be at least 1".into()));
    }
    if test.is_empty() {
        return Err(Error::Config("test set is empty".into()));
    }
    crate::error::ensure_positive("lambda", spec.lambda)
}

/// `L × n_i` test predictions of the fits on subsample `i`.
fn predictions_for_subsample(
    train: &Dataset,
    test: &Dataset,
    spec: &GridSpec,
    run: u64,
    i: usize,
    projected_test: &[DMatrix<f64>],
    weights_t: &[DMatrix<f64>],
) -> Result<DMatrix<f64>> {
    let rows = index::sample(&mut stream(spec.seed, run, Role::Subsample, i as u64), train.len(), spec.n).into_vec();
    let x = train.features.select_rows(&rows);
    let y = DVector::from_iterator(spec.n, rows.iter().map(|&r| train.response[r]));
    let mut out = DMatrix::zeros(test.len(), spec.n_i);
    for (j, wt) in weights_t.iter().enumerate() {
        let z = &x * wt;
        let beta = crate::sim::ridge_coefficients(&z, &y, spec.lambda)
            .map_err(|e| e.in_cell(format!("fit (i = {i}, j = {j})")))?;
        out.set_column(j, &(&projected_test[j] * beta));
    }
    Ok(out)
}

fn grid_run(train: &Dataset, test: &Dataset, spec: &GridSpec, run: u64) -> Result<EmpiricalEstimates> {
    let d = train.dim();
    let weights_t = (0..spec.n_i as u64)
        .map(|j| Ok(sample_orthogonal(d, spec.p, &mut stream(spec.seed, run, Role::Weights, j))?.transpose()))
        .collect::<Result<Vec<_>>>()?;
    let projected_test: Vec<DMatrix<f64>> = weights_t.iter().map(|wt| &test.features * wt).collect();
    let preds = (0..spec.n_s)
        .into_par_iter()
        .map(|i| predictions_for_subsample(train, test, spec, run, i, &projected_test, &weights_t))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&preds, &test.response))
}

/// Estimators over `preds[i][(k, j)] = f̂ᵢⱼ(x_k)`.
fn summarize(preds: &[DMatrix<f64>], y: &DVector<f64>) -> EmpiricalEstimates {
    let (n_s, n_i) = (preds.len() as f64, preds[0].ncols() as f64);
    let l = y.len();
    let row_means: Vec<DVector<f64>> = preds.iter().map(|p| p.column_mean()).collect();
    let mut col_means = DMatrix::<f64>::zeros(l, preds[0].ncols());
    for p in preds {
        col_means += p;
    }
    col_means /= n_s;
    let grand = col_means.column_mean();

    let mut mse = 0.0;
    let mut variance = 0.0;
    for p in preds {
        for col in p.column_iter() {
            mse += (col - y).norm_squared();
            variance += (col - &grand).norm_squared();
        }
    }
    let cells = n_s * n_i * l as f64;
    mse /= cells;
    variance /= cells;
    let bias2 = (&grand - y).norm_squared() / l as f64;
    let v_s = row_means.iter().map(|a| (a - &grand).norm_squared()).sum::<f64>() / (n_s * l as f64);
    let v_i = col_means.column_iter().map(|b| (b - &grand).norm_squared()).sum::<f64>() / (n_i * l as f64);
    EmpiricalEstimates {
        mse,
        variance,
        bias2,
        v_s,
        v_i,
        rest: variance - v_s - v_i,
    }
}

/// Fits all `n_s · n_i` predictors and evaluates the estimators on the
/// whole test set. Subsamples are drawn without replacement within a draw
/// and independently across draws.
pub fn empirical_grid(train: &Dataset, test: &Dataset, spec: &GridSpec) -> Result<EmpiricalEstimates> {
    check(train, test, spec)?;
    grid_run(train, test, spec, 0)
}

/// `{i·10⁻ʲ : i ∈ {1, 2, 5}, j ∈ 0..=3}` in increasing order.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut out: Vec<f64> = (0..=3)
        .flat_map(|j| [1.0, 2.0, 5.0].map(|i| i * 10f64.powi(-j)))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Tolerance under which two empirical MSEs count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Candidate with the smallest grid MSE; ties go to the largest `λ`.
/// Returns the chosen `λ` and its estimates.
pub fn lambda_select(
    train: &Dataset,
    test: &Dataset,
    candidates: &[f64],
    spec: &GridSpec,
) -> Result<(f64, EmpiricalEstimates)> {
    lambda_select_run(train, test, candidates, spec, 0)
}

fn lambda_select_run(
    train: &Dataset,
    test: &Dataset,
    candidates: &[f64],
    spec: &GridSpec,
    run: u64,
) -> Result<(f64, EmpiricalEstimates)> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate penalties".into()));
    }
    let fits = candidates
        .iter()
        .map(|&lambda| {
            let s = GridSpec { lambda, ..spec.clone() };
            check(train, test, &s)?;
            Ok((lambda, grid_run(train, test, &s, run)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = fits.iter().map(|(_, e)| e.mse).fold(f64::INFINITY, f64::min);
    let chosen = fits
        .iter()
        .filter(|(_, e)| e.mse <= best + TIE_TOL)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .copied()
        .expect("at least one candidate attains the minimum");
    Ok(chosen)
}

/// How the penalty is set in each cell of an `n` sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    Fixed(f64),
    /// Selected per run by [`lambda_select`] from these candidates.
    Select(Vec<f64>),
}

/// Mean and spread over runs of one `n`-sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n: usize,
    pub estimates: Vec<(&'static str, Estimate)>,
    /// Penalty used in each run.
    pub lambdas: Vec<f64>,
}

impl SweepCell {
    pub fn get(&self, quantity: &str) -> Option<Estimate> {
        self.estimates.iter().find(|(q, _)| *q == quantity).map(|(_, e)| *e)
    }
}

/// Runs the grid at every subsample size in `ns`, `runs` times each with
/// run-specific draws, inside a pool of `threads` workers (`0`: default).
/// Cell `k` uses seed `spec.seed ^ k`.
pub fn n_sweep(
    train: &Dataset,
    test: &Dataset,
    spec: &GridSpec,
    ns: &[usize],
    penalty: &Penalty,
    runs: usize,
    threads: usize,
) -> Result<Vec<SweepCell>> {
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    if ns.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("n values must be sorted in increasing order".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        ns.par_iter()
            .enumerate()
            .map(|(k, &n)| {
                let cell_spec = GridSpec {
                    n,
                    seed: spec.seed ^ k as u64,
                    ..spec.clone()
                };
                let per_run = (0..runs as u64)
                    .into_par_iter()
                    .map(|r| match penalty {
                        Penalty::Fixed(lambda) => {
                            let s = GridSpec {
                                lambda: *lambda,
                                ..cell_spec.clone()
                            };
                            check(train, test, &s)?;
                            Ok((*lambda, grid_run(train, test, &s, r)?))
                        }
                        Penalty::Select(c) => lambda_select_run(train, test, c, &cell_spec, r),
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| e.in_cell(format!("cell {k} (n = {n})")))?;
                let estimates = EmpiricalEstimates::default()
                    .named()
                    .iter()
                    .enumerate()
                    .map(|(q, (name, _))| {
                        let xs: Vec<f64> = per_run.iter().map(|(_, e)| e.named()[q].1).collect();
                        (*name, Estimate::from_samples(&xs))
                    })
                    .collect();
                Ok(SweepCell {
                    n,
                    estimates,
                    lambdas: per_run.iter().map(|(l, _)| *l).collect(),
                })
            })
            .collect()
    })
}

/// Long-format rows for an `n` sweep. `lambda` is the mean penalty over
/// runs when it was selected.
pub fn sweep_records(
    cells: &[SweepCell],
    spec: &GridSpec,
    d: usize,
    runs: usize,
    dataset: &str,
    known: Option<(f64, f64)>,
) -> Vec<EmpiricalRecord> {
    cells
        .iter()
        .enumerate()
        .flat_map(|(k, cell)| {
            let lambda = cell.lambdas.iter().sum::<f64>() / cell.lambdas.len() as f64;
            cell.estimates.iter().map(move |(q, e)| EmpiricalRecord {
                axis: "n".into(),
                value: cell.n as f64,
                quantity: q.to_string(),
                estimate: e.mean,
                std: e.std,
                runs,
                n: cell.n,
                d,
                p: spec.p,
                lambda,
                alpha2: known.map(|k| k.0),
                sigma2: known.map(|k| k.1),
                activation: "identity".into(),
                data_law: "empirical".into(),
                seed: spec.seed ^ k as u64,
                n_s: spec.n_s,
                n_i: spec.n_i,
                dataset: dataset.to_string(),
            })
        })
        .collect()
}
