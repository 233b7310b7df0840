//! Closed-form asymptotics and Monte Carlo verification of the ANOVA
//! decomposition of test error for two-layer ridge-regularized networks
//! `f(x) = σ(Wx)ᵀβ` with a Haar-orthogonal first layer `W` (`WWᵀ = I_p`).
//!
//! The crate is organized bottom-up:
//!
//! * [`rmt`]: Marchenko–Pastur resolvent moments `θ₁, θ₂`, the adjusted
//!   penalty `λ̃` and the self-consistent system that characterizes it.
//! * [`theory`]: ANOVA components, bias/variance/MSE limits, optimal
//!   penalties and shape predicates for the linear and nonlinear networks.
//! * [`activation`]: activation functions and their Gaussian moments.
//! * [`sim`]: seeded finite-size simulator and functional estimators.
//! * [`empirical`]: the same estimators on tabular regression data.
//! * [`table`]: long-format result records and their CSV encoding.

pub mod activation;
pub mod empirical;
pub mod error;
pub mod quadrature;
pub mod rmt;
pub mod sim;
pub mod table;
pub mod theory;

pub use activation::{ActivationKind, ActivationSpec};
pub use error::{Error, Result};
pub use rmt::{adjusted_penalty, resolvent_moments, solve_fixed_point};
pub use rmt::{AdjustedPenalty, FixedPointSolution, ResolventMoments};
pub use theory::linear::{ModelParams, OrderedDecomposition, RiskDecomposition, VarianceComponents};
pub use theory::nonlinear::NonlinearRisk;
