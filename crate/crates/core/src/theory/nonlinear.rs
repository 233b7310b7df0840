//! Limits for the two-layer network `f(x) = σ(Wx)ᵀβ̂` with a centered
//! nonlinear activation and Gaussian data.

use crate::activation::ActivationSpec;
use crate::error::{Error, Result};
use crate::rmt;
use crate::theory::linear::ModelParams;

/// Bias, variance and MSE (floor included) of the nonlinear network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearRisk {
    pub bias2: f64,
    pub variance: f64,
    pub noise_floor: f64,
    pub mse: f64,
    /// `None` when the optimum is degenerate (`μ = 0`, or `λ* = 0`).
    pub lambda_star: Option<f64>,
}

impl NonlinearRisk {
    pub fn excess_mse(&self) -> f64 {
        self.mse - self.noise_floor
    }
}

/// Limits at `params.lambda` with `θᵢ = θᵢ(γ, λ/v)`.
///
/// Valid for `N(0, I)` data only; other laws are outside the formulas.
pub fn nonlinear_risk(params: &ModelParams, act: &ActivationSpec) -> Result<NonlinearRisk> {
    params.validate()?;
    let ModelParams {
        alpha2,
        sigma2,
        pi,
        delta,
        lambda,
    } = *params;
    let (mu, v) = (act.mu, act.v);
    if !(v > 0.0) {
        return Err(Error::Degenerate(format!("activation has v = {v}; the network output is identically zero")));
    }
    let gamma = params.gamma();
    let mu2 = mu * mu;
    let ls = lambda / v;
    let (t1, t2) = rmt::theta_pair(gamma, ls);

    let shrink = 1.0 - ls * t1;
    let common = ls * (lambda * mu2 / (v * v) - delta * (1.0 - pi)) * t2
        + (v - mu2) * (gamma / v * t1 + 1.0 / v - lambda * gamma / (v * v) * t2);
    let label = sigma2 * gamma * (t1 - ls * t2);

    let mse = alpha2 * pi * (1.0 / pi - 1.0 + delta * (1.0 - pi) * t1 + common) + label + sigma2;
    let bias2 = alpha2 * (pi * mu2 / v * shrink - 1.0).powi(2);
    let variance = alpha2
        * pi
        * (2.0 * mu2 / v - 1.0 + (-2.0 * lambda * mu2 / (v * v) + delta * (1.0 - pi)) * t1 + common
            - pi * mu2 * mu2 / (v * v) * shrink * shrink)
        + label;

    Ok(NonlinearRisk {
        bias2,
        variance,
        noise_floor: sigma2,
        mse,
        lambda_star: nonlinear_optimal_lambda(params, act).ok(),
    })
}

/// `λ* = (v²/μ²)[δ(1 − π + σ²/α²) + (v − μ²)γ/v]`. `params.lambda` is ignored.
pub fn nonlinear_optimal_lambda(params: &ModelParams, act: &ActivationSpec) -> Result<f64> {
    params.validate_regime()?;
    let (mu, v) = (act.mu, act.v);
    let mu2 = mu * mu;
    if mu.abs() <= crate::activation::CENTERING_TOL {
        return Err(Error::Degenerate(
            "activation has mu = 0: the output is uncorrelated with the signal and lambda* is undefined".into(),
        ));
    }
    let lambda = v * v / mu2 * (params.delta * (1.0 - params.pi + params.noise_ratio()) + (v - mu2) * params.gamma() / v);
    if lambda <= 0.0 {
        return Err(Error::DegenerateOptimum);
    }
    Ok(lambda)
}

/// [`nonlinear_risk`] at [`nonlinear_optimal_lambda`].
pub fn nonlinear_risk_at_optimum(params: &ModelParams, act: &ActivationSpec) -> Result<NonlinearRisk> {
    let lambda = nonlinear_optimal_lambda(params, act)?;
    nonlinear_risk(&params.with_lambda(lambda), act)
}
