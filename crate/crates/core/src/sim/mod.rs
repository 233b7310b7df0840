//! Finite-size Monte Carlo engine: draws `(θ, X, W, ε, x)`, fits the ridge
//! readout in closed form and estimates MSE, bias, variance and the ANOVA
//! components.

mod estimate;
mod ridge;
mod rng;
mod sample;
mod sweep;

use std::fmt;
use std::str::FromStr;

use crate::activation::ActivationSpec;
use crate::error::{ensure_positive, Error, Result};

pub use estimate::{estimate_functionals, estimate_mse_direct, Estimate, FunctionalEstimates, RunFunctionals};
pub(crate) use ridge::ridge_coefficients;
pub use ridge::{ridge_fit, ridge_snapshot, RidgeSnapshot};
pub use rng::{stream, Role};
pub use sample::{ar1_covariance, sample_data, sample_orthogonal, sample_vector};
pub use sweep::{sweep, sweep_cells, sweep_plan, SweepAxis, SweepKind};

/// Dimension above which dense `d×d` storage starts to hurt.
pub const LARGE_D_WARNING: usize = 4096;

/// Single-coordinate law for i.i.d. data with zero mean and unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IidLaw {
    /// `±1` with equal probability.
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataLaw {
    Gaussian,
    Iid(IidLaw),
    /// Rows `N(0, Σ(r))` with `Σ(r)ᵢⱼ = r^{|i−j|}`.
    Ar1(f64),
}

impl DataLaw {
    pub fn is_gaussian(&self) -> bool {
        matches!(self, DataLaw::Gaussian) || matches!(self, DataLaw::Ar1(r) if *r == 0.0)
    }
}

impl fmt::Display for DataLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataLaw::Gaussian => f.write_str("gaussian"),
            DataLaw::Iid(IidLaw::Rademacher) => f.write_str("rademacher"),
            DataLaw::Iid(IidLaw::Uniform) => f.write_str("uniform"),
            DataLaw::Ar1(r) => write!(f, "ar1:{r}"),
        }
    }
}

impl FromStr for DataLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "gaussian" | "normal" => Ok(DataLaw::Gaussian),
            "rademacher" => Ok(DataLaw::Iid(IidLaw::Rademacher)),
            "uniform" => Ok(DataLaw::Iid(IidLaw::Uniform)),
            _ => match s.strip_prefix("ar1:") {
                Some(r) => r
                    .parse()
                    .map(DataLaw::Ar1)
                    .map_err(|_| Error::Config(format!("invalid AR-1 coefficient in '{s}'"))),
                None => Err(Error::Config(format!(
                    "unknown data law '{s}' (expected gaussian, rademacher, uniform or ar1:<r>)"
                ))),
            },
        }
    }
}

/// How first-layer weights are drawn by the direct MSE estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightDraw {
    /// A fresh Haar matrix for every tuple.
    #[default]
    Haar,
    /// `W = [I_p 0]`. For Gaussian data and `θ ~ N(0, α²I/d)` the joint law
    /// of `(XWᵀ, Wx, Xθ, xᵀθ)` is invariant under `W → WO` for orthogonal
    /// `O`, so this gives the same distribution as Haar at a fraction of the
    /// cost. Rejected for other laws and for the crossed ANOVA design.
    Canonical,
}

/// Plug-in Monte Carlo means, or the bias-corrected two-way random-effects
/// estimators for the crossed design (and the `k/(k−1)` variance correction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    PlugIn,
    Unbiased,
}

/// Nominal ratios a configuration was built from; sweeps over `π` or `δ`
/// rebuild `d = ⌊nδ⌋`, `p = ⌊dπ⌋` from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratios {
    pub pi: f64,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub alpha2: f64,
    pub sigma2: f64,
    pub lambda: f64,
    pub activation: ActivationSpec,
    pub data_law: DataLaw,
    pub k_outer: usize,
    pub k_grid: usize,
    pub runs: usize,
    pub seed: u64,
    /// Worker threads; `0` lets the pool decide. Results never depend on it.
    pub threads: usize,
    pub weight_draw: WeightDraw,
    pub estimator: Estimator,
    pub ratios: Option<Ratios>,
}

pub const DEFAULT_SEED: u64 = 20_240_917;

impl SimConfig {
    /// `d = ⌊nδ⌋`, `p = ⌊dπ⌋` with the remaining settings at their defaults
    /// (`α² = 1`, `σ² = 0.09`, `k_outer = 100`, `k_grid = 20`, 5 runs).
    pub fn from_ratios(n: usize, pi: f64, delta: f64, lambda: f64) -> Self {
        let (d, p) = dims(n, pi, delta);
        Self {
            n,
            d,
            p,
            alpha2: 1.0,
            sigma2: 0.09,
            lambda,
            activation: ActivationSpec::identity(),
            data_law: DataLaw::Gaussian,
            k_outer: 100,
            k_grid: 20,
            runs: 5,
            seed: DEFAULT_SEED,
            threads: 0,
            weight_draw: WeightDraw::Haar,
            estimator: Estimator::PlugIn,
            ratios: Some(Ratios { pi, delta }),
        }
    }

    /// Same settings at new nominal ratios.
    pub fn with_ratios(&self, pi: f64, delta: f64) -> Self {
        let (d, p) = dims(self.n, pi, delta);
        Self {
            d,
            p,
            ratios: Some(Ratios { pi, delta }),
            ..self.clone()
        }
    }

    /// Nominal `(π, δ)`, falling back to `(p/d, d/n)`.
    pub fn ratios(&self) -> Ratios {
        self.ratios.unwrap_or(Ratios {
            pi: self.p as f64 / self.d as f64,
            delta: self.d as f64 / self.n as f64,
        })
    }

    /// Checks the configuration; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n == 0 || self.d == 0 || self.p == 0 {
            return Err(Error::Dimension(format!(
                "n, d, p must be at least 1 (got n = {}, d = {}, p = {})",
                self.n, self.d, self.p
            )));
        }
        if self.p > self.d {
            return Err(Error::Dimension(format!("p = {} exceeds d = {}", self.p, self.d)));
        }
        ensure_positive("alpha2", self.alpha2)?;
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(Error::domain("sigma2", "must be finite and non-negative", self.sigma2));
        }
        ensure_positive("lambda", self.lambda)?;
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if let DataLaw::Ar1(r) = self.data_law {
            if !(r.abs() < 1.0) {
                return Err(Error::Factorization(format!(
                    "AR-1 covariance is not positive definite for r = {r} (need |r| < 1)"
                )));
            }
        }
        if self.weight_draw == WeightDraw::Canonical && !self.data_law.is_gaussian() {
            return Err(Error::Config(
                "canonical weights are only equivalent to Haar weights for Gaussian data".into(),
            ));
        }
        let mut warnings = Vec::new();
        if self.d > LARGE_D_WARNING {
            warnings.push(format!(
                "d = {} exceeds {LARGE_D_WARNING}: dense d x d matrices will use a lot of memory",
                self.d
            ));
        }
        if !self.data_law.is_gaussian() && !self.activation.is_linear() {
            warnings.push("nonlinear limits assume Gaussian data; this run is exploratory".into());
        }
        Ok(warnings)
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
    }
}

fn dims(n: usize, pi: f64, delta: f64) -> (usize, usize) {
    let d = (n as f64 * delta).floor() as usize;
    let p = (d as f64 * pi).floor() as usize;
    (d, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_follow_floor_convention() {
        let c = SimConfig::from_ratios(150, 0.8, 1.25, 0.01);
        assert_eq!((c.d, c.p), (187, 149));
        let c = c.with_ratios(0.8, 3.0);
        assert_eq!((c.d, c.p), (450, 360));
        assert!(c.validate().unwrap().is_empty());
    }

    #[test]
    fn validation() {
        let mut c = SimConfig::from_ratios(10, 0.5, 1.0, 0.1);
        c.p = 11;
        assert!(matches!(c.validate(), Err(Error::Dimension(_))));
        let mut c = SimConfig::from_ratios(10, 0.5, 1.0, 0.1);
        c.data_law = DataLaw::Ar1(1.0);
        assert!(matches!(c.validate(), Err(Error::Factorization(_))));
        let mut c = SimConfig::from_ratios(10, 0.5, 1.0, 0.1);
        c.data_law = DataLaw::Iid(IidLaw::Rademacher);
        c.weight_draw = WeightDraw::Canonical;
        assert!(c.validate().is_err());
        let mut c = SimConfig::from_ratios(10, 0.5, 1.0, 0.1);
        c.d = 5000;
        c.p = 10;
        assert_eq!(c.validate().unwrap().len(), 1);
    }

    #[test]
    fn law_round_trip() {
        for s in ["gaussian", "rademacher", "uniform", "ar1:0.5"] {
            assert_eq!(s.parse::<DataLaw>().unwrap().to_string(), s);
        }
        assert!("cauchy".parse::<DataLaw>().is_err());
    }
}
