use ridge_anova::theory::linear::{risk_decomposition, variance_components};
use ridge_anova::theory::nonlinear::nonlinear_risk;
use ridge_anova::theory::shape::{linspace, Quantity, DELTA_RANGE, PI_RANGE};
use serde::Serialize;

use crate::args::{Format, TheoryArgs};
use crate::config::Layer;
use crate::error::CliError;
use crate::model::{flag_error, Model};
use crate::output::{PlotSink, Sink};
use crate::parse::{float_grid, LambdaArg};
use crate::svg::{self, Series};

/// One point of a theory curve. Component columns are empty for nonlinear
/// activations, where only bias, variance and MSE have limits.
#[derive(Debug, Clone, Serialize)]
pub struct TheoryRow {
    pub axis: String,
    pub value: f64,
    pub alpha2: f64,
    pub sigma2: f64,
    pub pi: f64,
    pub delta: f64,
    pub lambda: f64,
    pub activation: String,
    pub mse: f64,
    pub excess_mse: f64,
    pub bias2: f64,
    pub variance: f64,
    pub sigma_label: Option<f64>,
    pub sigma_sample: Option<f64>,
    pub sigma_init: Option<f64>,
    pub v_s: Option<f64>,
    pub v_i: Option<f64>,
    pub v_sl: Option<f64>,
    pub v_si: Option<f64>,
    pub v_sli: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CurveAxis {
    Delta,
    Pi,
    Lambda,
}

fn parse_axis(s: &str) -> Result<CurveAxis, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "delta" => Ok(CurveAxis::Delta),
        "pi" => Ok(CurveAxis::Pi),
        "lambda" => Ok(CurveAxis::Lambda),
        other => Err(CliError::flag("axis", format!("unknown axis '{other}' (expected delta, pi or lambda)"))),
    }
}

/// Theory at one `(π, δ, λ)`.
pub fn theory_row(model: &Model, axis: &str, value: f64, pi: f64, delta: f64, lambda: f64) -> Result<TheoryRow, CliError> {
    let p = model.params(pi, delta, lambda).map_err(flag_error)?;
    let mut row = TheoryRow {
        axis: axis.into(),
        value,
        alpha2: p.alpha2,
        sigma2: p.sigma2,
        pi,
        delta,
        lambda,
        activation: model.activation.name(),
        mse: 0.0,
        excess_mse: 0.0,
        bias2: 0.0,
        variance: 0.0,
        sigma_label: None,
        sigma_sample: None,
        sigma_init: None,
        v_s: None,
        v_i: None,
        v_sl: None,
        v_si: None,
        v_sli: None,
    };
    let ctx = |e: ridge_anova::Error| CliError::usage(format!("{axis} = {value}: {e}"));
    if model.activation.is_identity() {
        let r = risk_decomposition(&p).map_err(ctx)?;
        let v = variance_components(&p).map_err(ctx)?;
        let o = r.ordered.expect("two-layer risk carries ordered terms");
        row.mse = r.mse;
        row.excess_mse = r.excess_mse();
        row.bias2 = r.bias2;
        row.variance = r.variance;
        row.sigma_label = Some(o.sigma_label);
        row.sigma_sample = Some(o.sigma_sample);
        row.sigma_init = Some(o.sigma_init);
        row.v_s = Some(v.v_s);
        row.v_i = Some(v.v_i);
        row.v_sl = Some(v.v_sl);
        row.v_si = Some(v.v_si);
        row.v_sli = Some(v.v_sli);
    } else {
        let r = nonlinear_risk(&p, &model.activation).map_err(ctx)?;
        row.mse = r.mse;
        row.excess_mse = r.excess_mse();
        row.bias2 = r.bias2;
        row.variance = r.variance;
    }
    Ok(row)
}

pub fn curve(model: &Model, axis: &str, values: &[f64]) -> Result<Vec<TheoryRow>, CliError> {
    let ax = parse_axis(axis)?;
    if ax == CurveAxis::Lambda && model.lambda == LambdaArg::Optimal {
        return Err(CliError::flag("lambda", "'optimal' cannot be combined with --axis lambda"));
    }
    values
        .iter()
        .map(|&x| {
            let (pi, delta) = match ax {
                CurveAxis::Delta => (model.pi, x),
                CurveAxis::Pi => (x, model.delta),
                CurveAxis::Lambda => (model.pi, model.delta),
            };
            let lambda = if ax == CurveAxis::Lambda { x } else { model.lambda_at(pi, delta)? };
            theory_row(model, axis, x, pi, delta, lambda)
        })
        .collect()
}

fn quantity_value(row: &TheoryRow, q: Quantity) -> Option<f64> {
    match q {
        Quantity::Mse => Some(row.excess_mse),
        Quantity::Bias2 => Some(row.bias2),
        Quantity::Variance => Some(row.variance),
        Quantity::SigmaLabel => row.sigma_label,
        Quantity::SigmaSample => row.sigma_sample,
        Quantity::SigmaInit => row.sigma_init,
    }
}

#[derive(Serialize)]
struct HeatCell {
    pi: f64,
    delta: f64,
    lambda: f64,
    quantity: &'static str,
    value: f64,
}

fn heatmap(model: &Model, args: &TheoryArgs, layer: &Layer, sink: Sink, plot: PlotSink) -> Result<(), CliError> {
    let q: String = layer.get(args.quantity.clone(), "quantity", "variance".into())?;
    let q: Quantity = q.parse().map_err(|e| CliError::flag("quantity", e))?;
    let points = layer.get(args.grid.points, "points", 50)?;
    if points < 2 {
        return Err(CliError::flag("points", "a heatmap needs at least 2 points per axis"));
    }
    let pis = linspace(PI_RANGE.0, PI_RANGE.1, points);
    let deltas = linspace(DELTA_RANGE.0, DELTA_RANGE.1, points);
    let mut cells = Vec::new();
    let mut z = Vec::new();
    for &delta in &deltas {
        let mut row = Vec::new();
        for &pi in &pis {
            let lambda = model.lambda_at(pi, delta)?;
            let r = theory_row(model, "heatmap", pi, pi, delta, lambda)?;
            let v = quantity_value(&r, q)
                .ok_or_else(|| CliError::flag("quantity", format!("'{q}' has no limit for this activation")))?;
            row.push(v);
            cells.push(HeatCell {
                pi,
                delta,
                lambda,
                quantity: q.name(),
                value: v,
            });
        }
        z.push(row);
    }
    if sink.format() == Format::Csv {
        // A matrix: one row per delta, one column per pi.
        let mut text = String::from("delta\\pi");
        for pi in &pis {
            text.push_str(&format!(",{pi}"));
        }
        text.push('\n');
        for (delta, row) in deltas.iter().zip(&z) {
            text.push_str(&delta.to_string());
            for v in row {
                text.push_str(&format!(",{v}"));
            }
            text.push('\n');
        }
        sink.write_text(&text)?;
    } else {
        sink.write(&cells)?;
    }
    plot.write(|| svg::heatmap(&format!("{q} at lambda = {}", model.lambda), "pi", "delta", &pis, &deltas, &z))
}

pub fn run(args: &TheoryArgs, layer: &Layer, sink: Sink, plot: PlotSink) -> Result<(), CliError> {
    let model = Model::resolve(&args.model, layer)?;
    if layer.switch(args.heatmap, "heatmap")? {
        return heatmap(&model, args, layer, sink, plot);
    }
    let axis: String = layer.get(args.axis.clone(), "axis", "delta".into())?;
    let default = match parse_axis(&axis)? {
        CurveAxis::Delta => (DELTA_RANGE.0, DELTA_RANGE.1, 120),
        CurveAxis::Pi => (PI_RANGE.0, PI_RANGE.1, 120),
        CurveAxis::Lambda => (0.001, 2.0, 120),
    };
    let values = float_grid(&args.grid, layer, default)?;
    let rows = curve(&model, &axis, &values)?;
    let stacked = layer.switch(args.stacked, "stacked")?;
    let title = format!(
        "alpha = {}, sigma = {}, lambda = {}, {}",
        model.alpha,
        model.sigma,
        model.lambda,
        model.activation.name()
    );
    let plot_rows = rows.clone();
    sink.write(&rows)?;
    plot.write(|| {
        let x: Vec<f64> = plot_rows.iter().map(|r| r.value).collect();
        let col = |f: &dyn Fn(&TheoryRow) -> Option<f64>| plot_rows.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect::<Vec<_>>();
        let has_components = plot_rows.first().is_some_and(|r| r.v_s.is_some());
        if stacked && has_components {
            let layers = vec![
                ("bias2".to_string(), col(&|r| Some(r.bias2))),
                ("v_s".to_string(), col(&|r| r.v_s)),
                ("v_i".to_string(), col(&|r| r.v_i)),
                ("v_sl".to_string(), col(&|r| r.v_sl)),
                ("v_si".to_string(), col(&|r| r.v_si)),
                ("v_sli".to_string(), col(&|r| r.v_sli)),
            ];
            svg::stacked_chart(&title, &axis, "cumulative excess MSE", &x, &layers)
        } else {
            let mut names: Vec<(&str, Vec<f64>)> = vec![
                ("mse - sigma^2", col(&|r| Some(r.excess_mse))),
                ("bias2", col(&|r| Some(r.bias2))),
                ("variance", col(&|r| Some(r.variance))),
            ];
            if has_components {
                names.extend([
                    ("v_s", col(&|r| r.v_s)),
                    ("v_i", col(&|r| r.v_i)),
                    ("v_sl", col(&|r| r.v_sl)),
                    ("v_si", col(&|r| r.v_si)),
                    ("v_sli", col(&|r| r.v_sli)),
                ]);
            }
            let series: Vec<Series> = names
                .into_iter()
                .map(|(n, ys)| Series::line(n, x.iter().copied().zip(ys).collect()))
                .collect();
            svg::line_chart(&title, &axis, "value", &series)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ridge_anova::theory::linear::optimal_lambda;

    fn model(lambda: LambdaArg, act: &str) -> Model {
        Model {
            alpha: 1.0,
            sigma: 0.3,
            pi: 0.8,
            delta: 1.0,
            lambda,
            activation: act.parse().unwrap(),
        }
    }

    #[test]
    fn optimal_lambda_per_point() {
        let m = model(LambdaArg::Optimal, "identity");
        let rows = curve(&m, "delta", &[0.5, 1.0, 2.0]).unwrap();
        for r in &rows {
            assert!((r.lambda - r.delta * (1.0 - 0.8 + 0.09)).abs() < 1e-15);
            let p = m.params(r.pi, r.delta, 1.0).unwrap();
            assert_eq!(r.lambda, optimal_lambda(&p).unwrap());
        }
    }

    #[test]
    fn components_sum_to_variance() {
        let rows = curve(&model(LambdaArg::Value(0.01), "identity"), "pi", &[0.3, 0.9]).unwrap();
        for r in rows {
            let sum = r.v_s.unwrap() + r.v_i.unwrap() + r.v_sl.unwrap() + r.v_si.unwrap() + r.v_sli.unwrap();
            assert!((sum - r.variance).abs() < 1e-10);
            assert!((r.excess_mse - r.bias2 - r.variance).abs() < 1e-10);
        }
    }

    #[test]
    fn nonlinear_rows_have_no_components() {
        let rows = curve(&model(LambdaArg::Value(0.01), "crelu"), "delta", &[1.0]).unwrap();
        assert!(rows[0].v_s.is_none());
        assert!(rows[0].variance > 0.0);
    }

    #[test]
    fn lambda_axis_rejects_optimal() {
        assert!(curve(&model(LambdaArg::Optimal, "identity"), "lambda", &[0.1]).is_err());
        let rows = curve(&model(LambdaArg::Value(0.01), "identity"), "lambda", &[0.1, 0.2]).unwrap();
        assert_eq!(rows[1].lambda, 0.2);
    }
}
