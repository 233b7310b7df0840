//! Resolution of the model flags shared by `theory`, `sweep`, `simulate`,
//! `anova` and `check`.

use ridge_anova::theory::linear::{optimal_lambda, ModelParams};
use ridge_anova::theory::nonlinear::nonlinear_optimal_lambda;
use ridge_anova::{ActivationSpec, Error};

use crate::args::ModelArgs;
use crate::config::Layer;
use crate::error::CliError;
use crate::parse::LambdaArg;

/// Defaults: `α = 1`, `σ = 0.3`, `π = 0.8`, `δ = 1`, `λ = 0.01`, identity.
#[derive(Debug, Clone)]
pub struct Model {
    pub alpha: f64,
    pub sigma: f64,
    pub pi: f64,
    pub delta: f64,
    pub lambda: LambdaArg,
    pub activation: ActivationSpec,
}

/// Rewrites library domain errors so they name the flag.
pub fn flag_error(e: Error) -> CliError {
    match &e {
        Error::Domain { name, .. } => {
            let flag = match *name {
                "alpha2" => "alpha",
                "sigma2" => "sigma",
                other => other,
            };
            CliError::flag(flag, e)
        }
        _ => e.into(),
    }
}

impl Model {
    pub fn resolve(m: &ModelArgs, layer: &Layer) -> Result<Self, CliError> {
        let alpha = layer.get(m.alpha, "alpha", 1.0)?;
        let sigma = layer.get(m.sigma, "sigma", 0.3)?;
        let pi = layer.get(m.pi, "pi", 0.8)?;
        let delta = layer.get(m.delta, "delta", 1.0)?;
        let lambda_raw: String = layer.get(m.lambda.clone(), "lambda", "0.01".into())?;
        let lambda: LambdaArg = lambda_raw.parse().map_err(|e| CliError::flag("lambda", e))?;
        if let LambdaArg::Value(v) = lambda {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::flag("lambda", format!("lambda must be a finite positive number (got {v})")));
            }
        }
        let act: String = layer.get(m.activation.clone(), "activation", "identity".into())?;
        let activation: ActivationSpec = act.parse().map_err(|e| CliError::flag("activation", e))?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CliError::flag("alpha", format!("alpha must be a finite positive number (got {alpha})")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(CliError::flag("sigma", format!("sigma must be finite and non-negative (got {sigma})")));
        }
        let model = Self {
            alpha,
            sigma,
            pi,
            delta,
            lambda,
            activation,
        };
        model.params(pi, delta, 1.0).map_err(flag_error)?;
        Ok(model)
    }

    pub fn params(&self, pi: f64, delta: f64, lambda: f64) -> Result<ModelParams, Error> {
        ModelParams::new(self.alpha * self.alpha, self.sigma * self.sigma, pi, delta, lambda)
    }

    /// The penalty at `(π, δ)`: the flag value, or `λ*` for the activation.
    pub fn lambda_at(&self, pi: f64, delta: f64) -> Result<f64, CliError> {
        match self.lambda {
            LambdaArg::Value(v) => Ok(v),
            LambdaArg::Optimal => {
                let p = self.params(pi, delta, 1.0).map_err(flag_error)?;
                let l = if self.activation.is_identity() {
                    optimal_lambda(&p)
                } else {
                    nonlinear_optimal_lambda(&p, &self.activation)
                };
                l.map_err(|e| CliError::flag("lambda", format!("optimal at pi = {pi}, delta = {delta}: {e}")))
            }
            LambdaArg::Select => Err(CliError::flag("lambda", "'select' applies to the empirical command only")),
        }
    }
}
