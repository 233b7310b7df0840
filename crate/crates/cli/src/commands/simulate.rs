use std::collections::BTreeSet;

use ridge_anova::sim::{sweep_cells, sweep_plan, DataLaw, Estimator, SimConfig, SweepAxis, SweepKind, WeightDraw, DEFAULT_SEED};
use ridge_anova::table::Record;

use crate::args::{SimArgs, SimFlags, SweepArgs};
use crate::commands::theory::{theory_row, TheoryRow};
use crate::config::Layer;
use crate::error::CliError;
use crate::model::Model;
use crate::output::{PlotSink, Sink};
use crate::parse::{float_grid, LambdaArg};
use crate::svg::{self, Series};

/// Prefix of the quantity column for theory rows mixed into simulation tables.
pub const THEORY_PREFIX: &str = "theory:";

struct Defaults {
    k_outer: usize,
    runs: usize,
    /// `None`: canonical weights for Gaussian data, Haar otherwise.
    weights: Option<WeightDraw>,
    estimator: Estimator,
}

fn parse_weights(s: &str) -> Result<Option<WeightDraw>, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "haar" => Ok(Some(WeightDraw::Haar)),
        "canonical" => Ok(Some(WeightDraw::Canonical)),
        "auto" => Ok(None),
        other => Err(CliError::flag("weights", format!("unknown weight draw '{other}' (expected haar, canonical or auto)"))),
    }
}

fn parse_estimator(s: &str) -> Result<Estimator, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "plugin" | "plug-in" => Ok(Estimator::PlugIn),
        "unbiased" => Ok(Estimator::Unbiased),
        other => Err(CliError::flag("estimator", format!("unknown estimator '{other}' (expected plugin or unbiased)"))),
    }
}

fn template(f: &SimFlags, layer: &Layer, seed: Option<u64>, threads: Option<usize>, d: Defaults) -> Result<(Model, SimConfig), CliError> {
    let model = Model::resolve(&f.model, layer)?;
    let n = layer.get(f.n, "n", 150)?;
    let mut c = SimConfig::from_ratios(n, model.pi, model.delta, 1.0);
    c.alpha2 = model.alpha * model.alpha;
    c.sigma2 = model.sigma * model.sigma;
    c.activation = model.activation.clone();
    let law: String = layer.get(f.data_law.clone(), "data-law", "gaussian".into())?;
    c.data_law = law.parse::<DataLaw>().map_err(|e| CliError::flag("data-law", e))?;
    c.k_outer = layer.get(f.k_outer, "k-outer", d.k_outer)?;
    c.k_grid = layer.get(f.k_grid, "k-grid", c.k_grid)?;
    c.runs = layer.get(f.runs, "runs", d.runs)?;
    let weights = match layer.opt(f.weights.clone(), "weights")? {
        Some(s) => parse_weights(&s)?,
        None => d.weights,
    };
    c.weight_draw = weights.unwrap_or(if c.data_law.is_gaussian() { WeightDraw::Canonical } else { WeightDraw::Haar });
    c.estimator = match layer.opt(f.estimator.clone(), "estimator")? {
        Some(s) => parse_estimator(&s)?,
        None => d.estimator,
    };
    c.seed = layer.get(seed, "seed", DEFAULT_SEED)?;
    c.threads = layer.get(threads, "threads", 0)?;
    Ok((model, c))
}

/// Sweep cells with the penalty resolved at each cell's nominal ratios.
fn cells(model: &Model, template: &SimConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<(f64, SimConfig)>, CliError> {
    if axis == SweepAxis::Lambda && model.lambda == LambdaArg::Optimal {
        return Err(CliError::flag("lambda", "'optimal' cannot be combined with --axis lambda"));
    }
    let mut plan = sweep_plan(template, axis, values).map_err(|e| CliError::flag("values", e))?;
    let mut warnings = BTreeSet::new();
    for (_, c) in plan.iter_mut() {
        if axis != SweepAxis::Lambda {
            let r = c.ratios();
            c.lambda = model.lambda_at(r.pi, r.delta)?;
        }
        warnings.extend(c.validate()?);
    }
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(plan)
}

fn theory_records(model: &Model, plan: &[(f64, SimConfig)], axis: &str, quantities: &[&str]) -> Result<Vec<Record>, CliError> {
    let mut out = Vec::new();
    for (value, c) in plan {
        // Closed forms assume Gaussian data beyond the linear case.
        if !model.activation.is_linear() && !c.data_law.is_gaussian() {
            continue;
        }
        let r = c.ratios();
        let row = theory_row(model, axis, *value, r.pi, r.delta, c.lambda)?;
        for q in quantities {
            if let Some(v) = theory_quantity(&row, q) {
                out.push(Record {
                    axis: axis.into(),
                    value: *value,
                    quantity: format!("{THEORY_PREFIX}{q}"),
                    estimate: v,
                    std: 0.0,
                    runs: 0,
                    n: c.n,
                    d: c.d,
                    p: c.p,
                    lambda: c.lambda,
                    alpha2: c.alpha2,
                    sigma2: c.sigma2,
                    activation: c.activation.name(),
                    data_law: c.data_law.to_string(),
                    seed: c.seed,
                });
            }
        }
    }
    Ok(out)
}

fn theory_quantity(row: &TheoryRow, q: &str) -> Option<f64> {
    match q {
        "mse" => Some(row.excess_mse),
        "bias2" => Some(row.bias2),
        "variance" => Some(row.variance),
        "sigma_label" => row.sigma_label,
        "sigma_sample" => row.sigma_sample,
        "sigma_init" => row.sigma_init,
        "v_s" => row.v_s,
        "v_i" => row.v_i,
        "v_sl" => row.v_sl,
        "v_si" => row.v_si,
        "v_sli" => row.v_sli,
        _ => None,
    }
}

/// Simulated quantities as markers with `±std`, theory as lines.
fn chart(records: &[Record], axis: &str, title: &str) -> String {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.quantity.as_str()) {
            names.push(&r.quantity);
        }
    }
    let series: Vec<Series> = names
        .iter()
        .map(|q| {
            let rows: Vec<&Record> = records.iter().filter(|r| r.quantity == *q).collect();
            let pts = rows.iter().map(|r| (r.value, r.estimate)).collect();
            if q.starts_with(THEORY_PREFIX) {
                Series::line(*q, pts)
            } else {
                Series::markers(*q, pts, rows.iter().map(|r| r.std).collect())
            }
        })
        .collect();
    svg::line_chart(title, axis, "value", &series)
}

fn title(c: &SimConfig) -> String {
    format!("n = {}, lambda = {}, {}, {}", c.n, c.lambda, c.activation.name(), c.data_law)
}

pub fn run_sweep(args: &SweepArgs, layer: &Layer, seed: Option<u64>, threads: Option<usize>, sink: Sink, plot: PlotSink) -> Result<(), CliError> {
    let defaults = Defaults {
        k_outer: 100,
        runs: 5,
        weights: Some(WeightDraw::Haar),
        estimator: Estimator::PlugIn,
    };
    let (model, t) = template(&args.sim, layer, seed, threads, defaults)?;
    let axis: String = layer.get(args.axis.clone(), "axis", "delta".into())?;
    let axis: SweepAxis = axis.parse().map_err(|e| CliError::flag("axis", e))?;
    let kind = match layer.get(args.kind.clone(), "kind", "mse".into())?.to_ascii_lowercase().as_str() {
        "mse" => SweepKind::Mse,
        "functionals" => SweepKind::Functionals,
        other => return Err(CliError::flag("kind", format!("unknown kind '{other}' (expected mse or functionals)"))),
    };
    let default = match axis {
        SweepAxis::Delta => (0.25, 3.0, 12),
        SweepAxis::Pi => (0.1, 1.0, 10),
        SweepAxis::Lambda => (0.01, 1.0, 10),
    };
    let values = float_grid(&args.grid, layer, default)?;
    let plan = cells(&model, &t, axis, &values)?;
    let records = sweep_cells(axis.name(), &plan, kind, t.threads)?;
    let head = plan.first().map(|(_, c)| title(c)).unwrap_or_default();
    let plot_records = records.clone();
    sink.write(&records)?;
    plot.write(|| chart(&plot_records, axis.name(), &head))
}

fn run_delta(args: &SimArgs, layer: &Layer, seed: Option<u64>, threads: Option<usize>, kind: SweepKind, sink: Sink, plot: PlotSink) -> Result<(), CliError> {
    let defaults = match kind {
        SweepKind::Mse => Defaults {
            k_outer: 400,
            runs: 20,
            weights: None,
            estimator: Estimator::PlugIn,
        },
        SweepKind::Functionals => Defaults {
            k_outer: 100,
            runs: 5,
            weights: Some(WeightDraw::Haar),
            estimator: Estimator::Unbiased,
        },
    };
    let (model, t) = template(&args.sim, layer, seed, threads, defaults)?;
    let values = float_grid(&args.grid, layer, (0.25, 3.0, 12))?;
    let plan = cells(&model, &t, SweepAxis::Delta, &values)?;
    let mut records = sweep_cells("delta", &plan, kind, t.threads)?;
    let quantities: Vec<String> = {
        let mut seen = Vec::new();
        for r in &records {
            if !seen.contains(&r.quantity) {
                seen.push(r.quantity.clone());
            }
        }
        seen
    };
    let qs: Vec<&str> = quantities.iter().map(String::as_str).collect();
    records.extend(theory_records(&model, &plan, "delta", &qs)?);
    let head = plan.first().map(|(_, c)| title(c)).unwrap_or_default();
    let plot_records = records.clone();
    sink.write(&records)?;
    plot.write(|| {
        // The ANOVA chart shows the five components; the table has everything.
        let keep = |q: &str| {
            let base = q.strip_prefix(THEORY_PREFIX).unwrap_or(q);
            kind == SweepKind::Mse || base.starts_with("v_")
        };
        let shown: Vec<Record> = plot_records.into_iter().filter(|r| keep(&r.quantity)).collect();
        chart(&shown, "delta", &head)
    })
}

pub fn run_simulate(args: &SimArgs, layer: &Layer, seed: Option<u64>, threads: Option<usize>, sink: Sink, plot: PlotSink) -> Result<(), CliError> {
    run_delta(args, layer, seed, threads, SweepKind::Mse, sink, plot)
}

pub fn run_anova(args: &SimArgs, layer: &Layer, seed: Option<u64>, threads: Option<usize>, sink: Sink, plot: PlotSink) -> Result<(), CliError> {
    run_delta(args, layer, seed, threads, SweepKind::Functionals, sink, plot)
}
