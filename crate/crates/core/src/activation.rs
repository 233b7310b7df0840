//! Activation functions and their Gaussian moments `μ = E[Zσ(Z)]`,
//! `v = E[σ(Z)²]` for `Z ~ N(0,1)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{normal_expectation, normal_expectation_piecewise};

/// Tolerance on `|E σ(Z)|` for an activation to count as centered.
pub const CENTERING_TOL: f64 = 1e-8;

/// How a custom activation is brought to zero Gaussian mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Centering {
    /// Subtract `E σ(Z)` computed by quadrature.
    Auto,
    /// Subtract the given constant; it must center the function.
    Given(f64),
}

#[derive(Clone)]
pub struct CustomActivation {
    pub name: String,
    pub func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Points where the function is not smooth; quadrature splits there.
    pub breakpoints: Vec<f64>,
    pub centering: Centering,
    /// Caller's statement that `|σ(x)|, |σ'(x)| ≤ c₁e^{c₂|x|}`.
    pub growth_attested: bool,
}

impl fmt::Debug for CustomActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomActivation")
            .field("name", &self.name)
            .field("breakpoints", &self.breakpoints)
            .field("centering", &self.centering)
            .field("growth_attested", &self.growth_attested)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum ActivationKind {
    Identity,
    ScaledLinear(f64),
    /// `max(x, 0) − E max(Z, 0)`.
    CenteredRelu,
    Custom(CustomActivation),
}

impl ActivationKind {
    fn raw(&self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => x,
            ActivationKind::ScaledLinear(k) => k * x,
            ActivationKind::CenteredRelu => x.max(0.0),
            ActivationKind::Custom(c) => (c.func)(x),
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            ActivationKind::CenteredRelu => &[0.0],
            ActivationKind::Custom(c) => &c.breakpoints,
            _ => &[],
        }
    }

    fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        if self.breakpoints().is_empty() {
            normal_expectation(f)
        } else {
            normal_expectation_piecewise(f, self.breakpoints())
        }
    }
}

/// An activation together with its centering offset and Gaussian moments.
#[derive(Debug, Clone)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub offset: f64,
    pub mu: f64,
    pub v: f64,
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind) -> Result<Self> {
        let offset = match &kind {
            ActivationKind::Identity | ActivationKind::ScaledLinear(_) => 0.0,
            ActivationKind::CenteredRelu => 1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            ActivationKind::Custom(c) => match c.centering {
                Centering::Auto => kind.expect(|x| kind.raw(x))?,
                Centering::Given(m) => m,
            },
        };
        let mean = kind.expect(|x| kind.raw(x) - offset)?;
        if mean.abs() > CENTERING_TOL {
            return Err(Error::NotCentered { mean });
        }
        let (mu, v) = moments_of(&kind, offset)?;
        if v < mu * mu - 1e-10 {
            return Err(Error::Degenerate(format!(
                "activation moments violate v >= mu^2 (mu = {mu}, v = {v})"
            )));
        }
        Ok(Self { kind, offset, mu, v })
    }

    pub fn identity() -> Self {
        Self {
            kind: ActivationKind::Identity,
            offset: 0.0,
            mu: 1.0,
            v: 1.0,
        }
    }

    pub fn centered_relu() -> Self {
        Self::new(ActivationKind::CenteredRelu).expect("centered ReLU moments")
    }

    pub fn custom<F>(name: &str, func: F, breakpoints: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(ActivationKind::Custom(CustomActivation {
            name: name.to_string(),
            func: Arc::new(func),
            breakpoints,
            centering: Centering::Auto,
            growth_attested: true,
        }))
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::Identity => x,
            _ => self.kind.raw(x) - self.offset,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, ActivationKind::Identity)
    }

    /// `σ(x) = kx` for some `k`, equivalently `v = μ²`.
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, ActivationKind::Identity | ActivationKind::ScaledLinear(_))
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ActivationKind::Identity => "identity".into(),
            ActivationKind::ScaledLinear(k) => format!("scaled:{k}"),
            ActivationKind::CenteredRelu => "crelu".into(),
            ActivationKind::Custom(c) => c.name.clone(),
        }
    }
}

impl FromStr for ActivationSpec {
    type Err = Error;

    /// `identity`, `scaled:<k>`, `crelu`, `relu` (auto-centered), `tanh`, `abs`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "identity" | "linear" => Ok(Self::identity()),
            "crelu" | "centered-relu" | "centered_relu" => Ok(Self::centered_relu()),
            "relu" => Self::custom("relu", |x: f64| x.max(0.0), vec![0.0]),
            "tanh" => Self::custom("tanh", f64::tanh, vec![]),
            "abs" => Self::custom("abs", f64::abs, vec![0.0]),
            _ => {
                if let Some(k) = lower.strip_prefix("scaled:") {
                    let k: f64 = k
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid scale in activation '{s}'")))?;
                    if !k.is_finite() || k == 0.0 {
                        return Err(Error::Config(format!("activation scale must be finite and non-zero, got {k}")));
                    }
                    Self::new(ActivationKind::ScaledLinear(k))
                } else {
                    Err(Error::Config(format!(
                        "unknown activation '{s}' (expected identity, scaled:<k>, crelu, relu, tanh or abs)"
                    )))
                }
            }
        }
    }
}

fn moments_of(kind: &ActivationKind, offset: f64) -> Result<(f64, f64)> {
    let mu = kind.expect(|x| x * (kind.raw(x) - offset))?;
    let v = kind.expect(|x| (kind.raw(x) - offset).powi(2))?;
    Ok((mu, v))
}

/// `(μ, v)` of an activation after centering.
pub fn activation_moments(spec: &ActivationSpec) -> Result<(f64, f64)> {
    moments_of(&spec.kind, spec.offset)
}
