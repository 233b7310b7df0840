//! Shape predicates at the optimal penalty: each risk quantity is evaluated
//! along a grid in `π` or `δ` and the sequence is classified as monotone,
//! unimodal or neither, then compared with the predicted shape.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::activation::ActivationSpec;
use crate::error::{Error, Result};
use crate::rmt::bisect;
use crate::theory::linear::{risk_at_optimum, ModelParams};
use crate::theory::nonlinear::nonlinear_risk_at_optimum;

/// Successive differences within this band never count as a change of direction.
pub const DIRECTION_TOL: f64 = 1e-9;
/// Differences below this are treated as flat when counting sign changes.
pub const FLAT_TOL: f64 = 1e-12;
pub const DEFAULT_POINTS: usize = 64;
pub const MIN_POINTS: usize = 16;
pub const PI_RANGE: (f64, f64) = (0.02, 1.0);
pub const DELTA_RANGE: (f64, f64) = (0.05, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Mse,
    Bias2,
    Variance,
    SigmaLabel,
    SigmaSample,
    SigmaInit,
}

impl Quantity {
    pub const LINEAR: [Quantity; 6] = [
        Quantity::Mse,
        Quantity::Bias2,
        Quantity::Variance,
        Quantity::SigmaLabel,
        Quantity::SigmaSample,
        Quantity::SigmaInit,
    ];
    pub const NONLINEAR: [Quantity; 3] = [Quantity::Mse, Quantity::Bias2, Quantity::Variance];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Mse => "mse",
            Quantity::Bias2 => "bias2",
            Quantity::Variance => "variance",
            Quantity::SigmaLabel => "sigma_label",
            Quantity::SigmaSample => "sigma_sample",
            Quantity::SigmaInit => "sigma_init",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::LINEAR
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown quantity '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Pi,
    Delta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Pi => "pi",
            Axis::Delta => "delta",
        }
    }

    pub fn default_range(self) -> (f64, f64) {
        match self {
            Axis::Pi => PI_RANGE,
            Axis::Delta => DELTA_RANGE,
        }
    }

    /// `points` equally spaced values over the default range.
    pub fn grid(self, points: usize) -> Vec<f64> {
        let (lo, hi) = self.default_range();
        linspace(lo, hi, points)
    }

    pub fn set(self, params: ModelParams, value: f64) -> ModelParams {
        match self {
            Axis::Pi => params.with_pi(value),
            Axis::Delta => params.with_delta(value),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi" => Ok(Axis::Pi),
            "delta" => Ok(Axis::Delta),
            _ => Err(Error::Config(format!("unknown axis '{s}' (expected pi or delta)"))),
        }
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points)
            .map(|k| {
                if k + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Nonincreasing,
    Nondecreasing,
    Unimodal { argmax: f64 },
    Violation { location: f64 },
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Nonincreasing => f.write_str("nonincreasing"),
            Shape::Nondecreasing => f.write_str("nondecreasing"),
            Shape::Unimodal { argmax } => write!(f, "unimodal(argmax={argmax})"),
            Shape::Violation { location } => write!(f, "violation(at={location})"),
        }
    }
}

/// Predicted shape of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "expected", rename_all = "snake_case")]
pub enum Expected {
    Nonincreasing,
    Nondecreasing,
    Unimodal { peak: f64 },
    /// The cell carries only a conjecture; its shape is reported, not judged.
    NotAsserted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(String),
    ReportedOnly,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail(_))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    pub quantity: Quantity,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub observed: Shape,
    pub expected: Expected,
    pub verdict: Verdict,
}

/// Classifies `ys` sampled at increasing `xs`.
///
/// Monotone if no step moves against the direction by more than
/// [`DIRECTION_TOL`]; unimodal if it rises to its maximum and falls after
/// it, with the same tolerance; otherwise a violation at the first offending
/// step past the first direction change.
pub fn classify(xs: &[f64], ys: &[f64]) -> Shape {
    assert_eq!(xs.len(), ys.len());
    let diffs: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().all(|&d| d <= DIRECTION_TOL) {
        return Shape::Nonincreasing;
    }
    if diffs.iter().all(|&d| d >= -DIRECTION_TOL) {
        return Shape::Nondecreasing;
    }
    let k = ys
        .iter()
        .enumerate()
        .fold(0, |best, (i, &y)| if y > ys[best] { i } else { best });
    let rises = diffs[..k].iter().all(|&d| d >= -DIRECTION_TOL);
    let falls = diffs[k..].iter().all(|&d| d <= DIRECTION_TOL);
    if rises && falls && sign_changes(&diffs) == 1 {
        return Shape::Unimodal { argmax: xs[k] };
    }
    let bad = if !rises {
        diffs[..k].iter().position(|&d| d < -DIRECTION_TOL).unwrap()
    } else if !falls {
        k + diffs[k..].iter().position(|&d| d > DIRECTION_TOL).unwrap()
    } else {
        k
    };
    Shape::Violation { location: xs[bad + 1] }
}

/// Number of sign changes among differences larger than [`FLAT_TOL`] in
/// magnitude, ignoring wiggles inside the [`DIRECTION_TOL`] band.
fn sign_changes(diffs: &[f64]) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for &d in diffs {
        if d.abs() < FLAT_TOL || d.abs() <= DIRECTION_TOL {
            continue;
        }
        let s = if d > 0.0 { 1 } else { -1 };
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

fn judge(observed: Shape, expected: Expected, grid: &[f64]) -> Verdict {
    let step = if grid.len() > 1 {
        (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64
    } else {
        0.0
    };
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let slack = step * (1.0 + 1e-9);
    let ok = match (expected, observed) {
        (Expected::NotAsserted, _) => return Verdict::ReportedOnly,
        (Expected::Nonincreasing, Shape::Nonincreasing) | (Expected::Nondecreasing, Shape::Nondecreasing) => true,
        (Expected::Unimodal { peak }, Shape::Unimodal { argmax }) => (argmax - peak).abs() <= slack,
        // A peak at or beyond the window edge leaves a monotone trace.
        (Expected::Unimodal { peak }, Shape::Nondecreasing) => peak >= hi - slack,
        (Expected::Unimodal { peak }, Shape::Nonincreasing) => peak <= lo + slack,
        _ => false,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("expected {expected:?}, observed {observed}"))
    }
}

/// Folds a peak that lies outside the grid into the monotone shape it implies.
fn clip_to_window(expected: Expected, grid: &[f64]) -> Expected {
    match expected {
        Expected::Unimodal { peak } if peak > grid[grid.len() - 1] => Expected::Nondecreasing,
        Expected::Unimodal { peak } if peak < grid[0] => Expected::Nonincreasing,
        e => e,
    }
}

/// Maximizer in `π` of `Σ_init` at the optimum: the root in `(0, 1)` of
/// `4δt³ − 2c²t + c²`, `c = δ(1 + σ²/α²) + 1`.
pub fn sigma_init_peak_in_pi(params: &ModelParams) -> Result<f64> {
    let delta = params.delta;
    let c = delta * (1.0 + params.noise_ratio()) + 1.0;
    let f = |t: f64| 4.0 * delta * t.powi(3) - 2.0 * c * c * t + c * c;
    bisect(f, 0.0, 1.0, 1e-14, 200).map(|(t, _)| t)
}

/// Predicted linear shape of `quantity` along `axis` at the slice.
pub fn expected_linear(quantity: Quantity, axis: Axis, slice: &ModelParams) -> Result<Expected> {
    let r = slice.noise_ratio();
    Ok(match (quantity, axis) {
        (Quantity::Mse | Quantity::Bias2, Axis::Pi) => Expected::Nonincreasing,
        (Quantity::Mse | Quantity::Bias2, Axis::Delta) => Expected::Nondecreasing,
        (Quantity::Variance, Axis::Pi) => {
            if slice.delta < 2.0 / (1.0 + 2.0 * r) {
                Expected::Unimodal {
                    peak: (2.0 + slice.delta * (1.0 + 2.0 * r)) / 4.0,
                }
            } else {
                Expected::Nondecreasing
            }
        }
        (Quantity::Variance, Axis::Delta) => {
            if slice.pi <= 0.5 {
                Expected::Nonincreasing
            } else {
                Expected::Unimodal {
                    peak: 2.0 * (2.0 * slice.pi - 1.0) / (1.0 + 2.0 * r),
                }
            }
        }
        (Quantity::SigmaLabel, Axis::Pi) => Expected::Nondecreasing,
        (Quantity::SigmaLabel, Axis::Delta) => Expected::Unimodal { peak: 1.0 / (1.0 + r) },
        (Quantity::SigmaInit, Axis::Pi) => Expected::Unimodal {
            peak: sigma_init_peak_in_pi(slice)?,
        },
        (Quantity::SigmaInit, Axis::Delta) => Expected::Nonincreasing,
        (Quantity::SigmaSample, _) => Expected::NotAsserted,
    })
}

/// Predicted nonlinear shape, for `mse`, `bias2` and `variance` only.
pub fn expected_nonlinear(quantity: Quantity, axis: Axis, slice: &ModelParams, act: &ActivationSpec) -> Result<Expected> {
    let rho = act.mu * act.mu / act.v;
    let r = slice.noise_ratio();
    Ok(match (quantity, axis) {
        (Quantity::Mse | Quantity::Bias2, Axis::Pi) => Expected::Nonincreasing,
        (Quantity::Mse | Quantity::Bias2, Axis::Delta) => Expected::Nondecreasing,
        (Quantity::Variance, Axis::Pi) => {
            if slice.delta < 2.0 * rho * (2.0 * rho - 1.0) / (1.0 + 2.0 * r) {
                Expected::Unimodal {
                    peak: (2.0 + slice.delta / rho * (1.0 + 2.0 * r)) / (4.0 * rho),
                }
            } else {
                Expected::Nondecreasing
            }
        }
        (Quantity::Variance, Axis::Delta) => {
            if slice.pi <= 1.0 / (2.0 * rho) {
                Expected::Nonincreasing
            } else {
                Expected::Unimodal {
                    peak: 2.0 * rho * (2.0 * slice.pi * rho - 1.0) / (1.0 + 2.0 * r),
                }
            }
        }
        (q, _) => {
            return Err(Error::Config(format!(
                "quantity '{q}' has no nonlinear shape prediction (use mse, bias2 or variance)"
            )))
        }
    })
}

fn linear_value(quantity: Quantity, params: &ModelParams) -> Result<f64> {
    let r = risk_at_optimum(params)?;
    let o = r.ordered.expect("two-layer risk carries ordered terms");
    Ok(match quantity {
        Quantity::Mse => r.mse,
        Quantity::Bias2 => r.bias2,
        Quantity::Variance => r.variance,
        Quantity::SigmaLabel => o.sigma_label,
        Quantity::SigmaSample => o.sigma_sample,
        Quantity::SigmaInit => o.sigma_init,
    })
}

fn validate_points(points: usize) -> Result<()> {
    if points < MIN_POINTS {
        return Err(Error::Config(format!("shape grids need at least {MIN_POINTS} points, got {points}")));
    }
    Ok(())
}

fn report<F>(quantity: Quantity, axis: Axis, slice: &ModelParams, points: usize, expected: Expected, eval: F) -> Result<ShapeReport>
where
    F: Fn(&ModelParams) -> Result<f64>,
{
    let grid = axis.grid(points);
    let values = grid
        .iter()
        .map(|&x| eval(&axis.set(*slice, x)).map_err(|e| e.in_cell(format!("{axis} = {x}"))))
        .collect::<Result<Vec<_>>>()?;
    let observed = classify(&grid, &values);
    let expected = clip_to_window(expected, &grid);
    let verdict = judge(observed, expected, &grid);
    Ok(ShapeReport {
        quantity,
        axis,
        grid,
        values,
        observed,
        expected,
        verdict,
    })
}

/// Classifies a linear quantity at `λ*` along `axis`; the other regime
/// parameters come from `slice` (its `λ` is ignored).
pub fn check_monotonicity(quantity: Quantity, axis: Axis, slice: &ModelParams, points: usize) -> Result<ShapeReport> {
    validate_points(points)?;
    slice.validate_regime()?;
    let expected = expected_linear(quantity, axis, slice)?;
    report(quantity, axis, slice, points, expected, |p| linear_value(quantity, p))
}

/// Nonlinear counterpart of [`check_monotonicity`] at the nonlinear `λ*`.
pub fn check_monotonicity_nl(
    quantity: Quantity,
    axis: Axis,
    slice: &ModelParams,
    act: &ActivationSpec,
    points: usize,
) -> Result<ShapeReport> {
    validate_points(points)?;
    slice.validate_regime()?;
    let expected = expected_nonlinear(quantity, axis, slice, act)?;
    report(quantity, axis, slice, points, expected, |p| {
        let r = nonlinear_risk_at_optimum(p, act)?;
        Ok(match quantity {
            Quantity::Mse => r.mse,
            Quantity::Bias2 => r.bias2,
            _ => r.variance,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice(alpha2: f64, sigma2: f64, pi: f64, delta: f64) -> ModelParams {
        ModelParams::new(alpha2, sigma2, pi, delta, 1.0).unwrap()
    }

    #[test]
    fn classifier_shapes() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let down: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_eq!(classify(&xs, &down), Shape::Nonincreasing);
        let up: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert_eq!(classify(&xs, &up), Shape::Nondecreasing);
        let hump: Vec<f64> = xs.iter().map(|x| -(x - 3.0).powi(2)).collect();
        assert_eq!(classify(&xs, &hump), Shape::Unimodal { argmax: 3.0 });
        let valley: Vec<f64> = xs.iter().map(|x| (x - 3.0).powi(2)).collect();
        assert!(matches!(classify(&xs, &valley), Shape::Violation { .. }));
        let flat = vec![1.0; 10];
        assert_eq!(classify(&xs, &flat), Shape::Nonincreasing);
        let mut wiggle = down.clone();
        wiggle[5] += 1.0 + 1e-10;
        assert_eq!(classify(&xs, &wiggle), Shape::Nonincreasing);
    }

    #[test]
    fn mse_nonincreasing_in_pi() {
        let r = check_monotonicity(Quantity::Mse, Axis::Pi, &slice(1.0, 0.25, 0.5, 1.0), 64).unwrap();
        assert_eq!(r.observed, Shape::Nonincreasing);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn variance_peak_in_delta() {
        let r = check_monotonicity(Quantity::Variance, Axis::Delta, &slice(1.0, 0.09, 0.8, 1.0), 64).unwrap();
        let Expected::Unimodal { peak } = r.expected else {
            panic!("{:?}", r.expected)
        };
        assert!((peak - 1.2 / 1.18).abs() < 1e-12);
        assert!(matches!(r.observed, Shape::Unimodal { .. }), "{:?}", r.observed);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn sigma_init_nonincreasing_in_delta() {
        let r = check_monotonicity(Quantity::SigmaInit, Axis::Delta, &slice(1.0, 0.09, 0.6, 1.0), 64).unwrap();
        assert_eq!(r.observed, Shape::Nonincreasing);
    }

    #[test]
    fn sigma_sample_is_reported_only() {
        let r = check_monotonicity(Quantity::SigmaSample, Axis::Delta, &slice(1.0, 0.09, 0.8, 1.0), 32).unwrap();
        assert_eq!(r.verdict, Verdict::ReportedOnly);
    }

    #[test]
    fn short_grids_rejected() {
        assert!(check_monotonicity(Quantity::Mse, Axis::Pi, &slice(1.0, 0.25, 0.5, 1.0), 8).is_err());
    }

    #[test]
    fn nonlinear_cells() {
        let relu = ActivationSpec::centered_relu();
        let s = slice(1.0, 0.09, 0.8, 1.0);
        let r = check_monotonicity_nl(Quantity::Mse, Axis::Pi, &s, &relu, 64).unwrap();
        assert_eq!(r.observed, Shape::Nonincreasing);
        let low_pi = ModelParams { pi: 0.5, ..s };
        let r = check_monotonicity_nl(Quantity::Variance, Axis::Delta, &low_pi, &relu, 64).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.observed);
        assert!(check_monotonicity_nl(Quantity::SigmaInit, Axis::Pi, &s, &relu, 64).is_err());
    }

    #[test]
    fn identity_matches_linear_cells() {
        let id = ActivationSpec::identity();
        let s = slice(1.0, 0.09, 0.8, 1.0);
        for q in Quantity::NONLINEAR {
            for axis in [Axis::Pi, Axis::Delta] {
                let lin = check_monotonicity(q, axis, &s, 64).unwrap();
                let nl = check_monotonicity_nl(q, axis, &s, &id, 64).unwrap();
                assert_eq!(lin.observed, nl.observed);
                assert_eq!(lin.expected, nl.expected);
            }
        }
    }
}
