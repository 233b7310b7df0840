use std::path::Path;

use ridge_anova::empirical::{
    default_lambda_grid, load_and_prepare, n_sweep, prepare, sweep_records, synthetic_linear, GridSpec, Penalty,
    ResponseColumn, DEFAULT_SPLIT, SYNTHETIC_DIM, SYNTHETIC_ROWS,
};
use ridge_anova::sim::DEFAULT_SEED;
use ridge_anova::table::EmpiricalRecord;

use crate::args::EmpiricalArgs;
use crate::config::Layer;
use crate::error::CliError;
use crate::output::{PlotSink, Sink};
use crate::parse::{n_grid, LambdaArg};
use crate::svg::{self, Series};

pub fn run(args: &EmpiricalArgs, layer: &Layer, seed: Option<u64>, threads: Option<usize>, sink: Sink, plot: PlotSink) -> Result<(), CliError> {
    let seed = layer.get(seed, "seed", DEFAULT_SEED)?;
    let threads = layer.get(threads, "threads", 0)?;
    let data: String = layer.get(args.data.clone(), "data", "synthetic".into())?;
    let response: String = layer.get(args.response.clone(), "response", "last".into())?;
    let response: ResponseColumn = response.parse().map_err(|e| CliError::flag("response", e))?;
    let split = layer.get(args.split, "split", DEFAULT_SPLIT)?;
    let pi = layer.get(args.pi, "pi", 0.2)?;
    if !(pi > 0.0 && pi <= 1.0) {
        return Err(CliError::flag("pi", format!("pi must lie in (0,1] (got {pi})")));
    }
    let lambda: String = layer.get(args.lambda.clone(), "lambda", "0.01".into())?;
    let penalty = match lambda.parse::<LambdaArg>().map_err(|e| CliError::flag("lambda", e))? {
        LambdaArg::Value(v) if v.is_finite() && v > 0.0 => Penalty::Fixed(v),
        LambdaArg::Value(v) => {
            return Err(CliError::flag("lambda", format!("lambda must be a finite positive number (got {v})")))
        }
        LambdaArg::Select => Penalty::Select(default_lambda_grid()),
        LambdaArg::Optimal => {
            return Err(CliError::flag("lambda", "'optimal' needs known model parameters; use a number or 'select'"))
        }
    };
    let ns: String = layer.get(args.n_grid.clone(), "n-grid", "50:1000".into())?;
    let ns = n_grid(&ns).map_err(|e| CliError::flag("n-grid", e))?;
    let n_s = layer.get(args.n_s, "n-s", 50)?;
    let n_i = layer.get(args.n_i, "n-i", 50)?;
    let runs = layer.get(args.runs, "runs", 5)?;

    let (train, test, dataset, known) = if data.eq_ignore_ascii_case("synthetic") {
        let alpha = layer.get(args.alpha, "alpha", 1.0)?;
        let sigma = layer.get(args.sigma, "sigma", 0.5)?;
        let rows = layer.get(args.rows, "rows", SYNTHETIC_ROWS)?;
        let dim = layer.get(args.dim, "dim", SYNTHETIC_DIM)?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CliError::flag("alpha", format!("alpha must be a finite positive number (got {alpha})")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(CliError::flag("sigma", format!("sigma must be finite and non-negative (got {sigma})")));
        }
        if dim == 0 || rows < 3 {
            return Err(CliError::usage("--rows/--dim: need at least 3 rows and 1 feature"));
        }
        let raw = synthetic_linear(rows, dim, alpha * alpha, sigma * sigma, seed);
        let (tr, te) = prepare(&raw, &response, split, seed)?;
        (tr, te, "synthetic".to_string(), Some((alpha * alpha, sigma * sigma)))
    } else {
        let path = Path::new(&data);
        let (tr, te) = load_and_prepare(path, &response, split, seed)
            .map_err(|e| CliError::usage(format!("--data {}: {e}", path.display())))?;
        let name = path.file_stem().map_or(data.clone(), |s| s.to_string_lossy().into_owned());
        (tr, te, name, None)
    };

    let d = train.dim();
    let p = ((pi * d as f64).round() as usize).clamp(1, d);
    let spec = GridSpec {
        n: 0,
        p,
        lambda: match &penalty {
            Penalty::Fixed(v) => *v,
            // Replaced per candidate during selection.
            Penalty::Select(c) => c[0],
        },
        n_s,
        n_i,
        seed,
    };
    let cells = n_sweep(&train, &test, &spec, &ns, &penalty, runs, threads)?;
    let records = sweep_records(&cells, &spec, d, runs, &dataset, known);
    let head = format!("{dataset}: d = {d}, p = {p}, lambda = {lambda}, {n_s} x {n_i} grid");
    let plot_records = records.clone();
    sink.write(&records)?;
    plot.write(|| chart(&plot_records, &head))
}

fn chart(records: &[EmpiricalRecord], title: &str) -> String {
    let series: Vec<Series> = ["mse", "variance", "bias2", "v_s", "v_i"]
        .iter()
        .map(|q| {
            let rows: Vec<&EmpiricalRecord> = records.iter().filter(|r| r.quantity == *q).collect();
            Series::markers(*q, rows.iter().map(|r| (r.value, r.estimate)).collect(), rows.iter().map(|r| r.std).collect())
        })
        .collect();
    svg::line_chart(title, "n", "standardized value", &series)
}
