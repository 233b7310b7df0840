//! Flag value grammars shared by several subcommands.

use std::fmt;
use std::str::FromStr;

use ridge_anova::theory::shape::linspace;

use crate::args::GridArgs;
use crate::config::Layer;
use crate::error::CliError;

/// `--lambda`: a number, `optimal` (theory and simulation) or `select`
/// (empirical).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Value(f64),
    Optimal,
    Select,
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimal" | "opt" => Ok(LambdaArg::Optimal),
            "select" => Ok(LambdaArg::Select),
            t => t
                .parse()
                .map(LambdaArg::Value)
                .map_err(|_| format!("expected a number, 'optimal' or 'select', got '{s}'")),
        }
    }
}

impl fmt::Display for LambdaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaArg::Value(v) => write!(f, "{v}"),
            LambdaArg::Optimal => f.write_str("optimal"),
            LambdaArg::Select => f.write_str("select"),
        }
    }
}

pub fn float_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect()
}

/// Resolves a grid from `--values` or `--from/--to/--points`.
pub fn float_grid(g: &GridArgs, layer: &Layer, default: (f64, f64, usize)) -> Result<Vec<f64>, CliError> {
    if let Some(v) = layer.opt(g.values.clone(), "values")? {
        let vals = float_list(&v).map_err(|e| CliError::flag("values", e))?;
        if vals.is_empty() {
            return Err(CliError::flag("values", "no values given"));
        }
        return Ok(vals);
    }
    let from = layer.get(g.from, "from", default.0)?;
    let to = layer.get(g.to, "to", default.1)?;
    let points = layer.get(g.points, "points", default.2)?;
    if !(from.is_finite() && to.is_finite()) || from > to {
        return Err(CliError::usage(format!("--from/--to: need finite from <= to (got {from}, {to})")));
    }
    if points == 0 || (points == 1 && from != to) {
        return Err(CliError::flag("points", format!("need at least 2 points for a range, got {points}")));
    }
    Ok(if points == 1 { vec![from] } else { linspace(from, to, points) })
}

/// `a:b` (20 evenly spaced integers, deduplicated), `a:b:step`, or `a,b,c`.
pub fn n_grid(s: &str) -> Result<Vec<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a non-negative integer"));
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [one] => one.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        [a, b] => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("range {a}:{b} is decreasing"));
            }
            let mut v: Vec<usize> = linspace(a as f64, b as f64, 20).iter().map(|x| x.round() as usize).collect();
            v.dedup();
            v
        }
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step == 0 || a > b {
                return Err(format!("range {a}:{b}:{step} needs a positive step and a <= b"));
            }
            (a..=b).step_by(step).collect()
        }
        _ => return Err(format!("cannot parse '{s}' (expected a:b, a:b:step or a comma list)")),
    };
    if out.is_empty() || out.contains(&0) {
        return Err("subsample sizes must be positive".into());
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err("subsample sizes must be strictly increasing".into());
    }
    Ok(out)
}
