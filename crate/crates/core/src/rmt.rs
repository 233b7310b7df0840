//! Marchenko–Pastur resolvent moments and the adjusted ridge penalty.
//!
//! For the MP law `F_γ` with aspect ratio `γ` the two resolvent moments are
//!
//! ```text
//! θ₁(γ, λ) = ∫ 1/(x+λ)  dF_γ(x)
//! θ₂(γ, λ) = ∫ 1/(x+λ)² dF_γ(x) = −∂θ₁/∂λ
//! ```
//!
//! Both have closed forms. `θ₁` is the positive root of
//! `λγθ² + (λ−γ+1)θ − 1 = 0`; we evaluate whichever of the two algebraically
//! equivalent root expressions avoids cancellation, and obtain `θ₂` from
//! implicit differentiation of the same quadratic, `θ₂ = θ₁(1+γθ₁)/√D`.

use crate::error::{ensure_positive, Error, Result};

/// Bisection: lower bound on the bracket used by [`solve_fixed_point`].
pub const FIXED_POINT_EPS: f64 = 1e-12;
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventMoments {
    pub gamma: f64,
    pub lambda: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl ResolventMoments {
    /// Residual of `λγθ₁² + (λ−γ+1)θ₁ − 1 = 0`.
    ///
    /// Evaluated in double-double arithmetic: for `γ > 1` and small `λ` the
    /// terms reach `1e5`, and plain `f64` would report its own cancellation
    /// rather than the error in `θ₁`.
    pub fn quadratic_residual(&self) -> f64 {
        quadratic_residual(self.gamma, self.lambda, self.theta1)
    }

    /// Residual of `1 + (γ−1)θ₁ − 2λ²γθ₁θ₂ − λ(λ−γ+1)θ₂ = 0`, in
    /// double-double arithmetic like [`Self::quadratic_residual`].
    pub fn derivative_residual(&self) -> f64 {
        derivative_residual(self.gamma, self.lambda, self.theta1, self.theta2)
    }

    /// `θ₁ − λθ₂ = ∫ x/(x+λ)² dF_γ`, which appears in every variance term.
    pub fn theta1_minus_lambda_theta2(&self) -> f64 {
        self.theta1 - self.lambda * self.theta2
    }
}

/// Unevaluated sum `hi + lo` carrying about 106 bits.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd::two_sum(s.hi, s.lo + self.lo + o.lo)
    }
}

impl std::ops::Mul<f64> for Dd {
    type Output = Dd;

    fn mul(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Dd::two_sum(p, e + self.lo * b)
    }
}

impl std::ops::Mul<Dd> for Dd {
    type Output = Dd;

    fn mul(self, b: Dd) -> Dd {
        let p = self.hi * b.hi;
        let e = self.hi.mul_add(b.hi, -p);
        Dd::two_sum(p, e + self.hi * b.lo + self.lo * b.hi)
    }
}

/// Closed-form resolvent moments of the Marchenko–Pastur law.
pub fn resolvent_moments(gamma: f64, lambda: f64) -> Result<ResolventMoments> {
    ensure_positive("gamma", gamma)?;
    ensure_positive("lambda", lambda)?;
    let (theta1, theta2) = theta_pair(gamma, lambda);
    Ok(ResolventMoments {
        gamma,
        lambda,
        theta1,
        theta2,
    })
}

/// Unchecked kernel shared by the hot paths; callers validate inputs.
pub(crate) fn theta_pair(gamma: f64, lambda: f64) -> (f64, f64) {
    // b = γ − 1 − λ; D = b² + 4λγ.
    let b = gamma - 1.0 - lambda;
    let sqrt_d = b.hypot(2.0 * (lambda * gamma).sqrt());
    let theta1 = if b > 0.0 {
        (b + sqrt_d) / (2.0 * lambda * gamma)
    } else {
        2.0 / (sqrt_d - b)
    };
    // One Newton step on each identity, with residuals in double-double,
    // brings both moments to within an ulp or two. `√D` is the derivative of
    // the quadratic at its root, and `λ√D` the θ₂-slope of the second identity.
    let theta1 = theta1 - quadratic_residual(gamma, lambda, theta1) / sqrt_d;
    let theta2 = theta1 * (1.0 + gamma * theta1) / sqrt_d;
    let theta2 = theta2 + derivative_residual(gamma, lambda, theta1, theta2) / (lambda * sqrt_d);
    (theta1, theta2)
}

fn quadratic_residual(g: f64, l: f64, t1: f64) -> f64 {
    let shift = Dd::from(l) + Dd::from(-g) + Dd::from(1.0);
    (Dd::from(l) * g * t1 * t1 + shift * t1 + Dd::from(-1.0)).value()
}

fn derivative_residual(g: f64, l: f64, t1: f64, t2: f64) -> f64 {
    let shift = Dd::from(l) + Dd::from(-g) + Dd::from(1.0);
    let r = Dd::from(1.0) + (Dd::from(g) + Dd::from(-1.0)) * t1 + Dd::from(-2.0 * l) * l * g * t1 * t2 + shift * (-l) * t2;
    r.value()
}

pub(crate) fn theta1(gamma: f64, lambda: f64) -> f64 {
    theta_pair(gamma, lambda).0
}

/// The adjusted penalty `λ̃` together with `θᵢ(δ, λ̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustedPenalty {
    pub pi: f64,
    pub delta: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub theta1_tilde: f64,
    pub theta2_tilde: f64,
}

impl AdjustedPenalty {
    /// `h(x) = πx² − [(1+π)λ + (1−π)(1−γ)]x + λ[λ + (1−δ)(1−π)]`, whose larger
    /// root is `λ̃`.
    pub fn characteristic_quadratic(&self, x: f64) -> f64 {
        let (pi, delta, lambda) = (self.pi, self.delta, self.lambda);
        let gamma = pi * delta;
        pi * x * x - ((1.0 + pi) * lambda + (1.0 - pi) * (1.0 - gamma)) * x
            + lambda * (lambda + (1.0 - delta) * (1.0 - pi))
    }
}

pub(crate) fn validate_pi(pi: f64) -> Result<()> {
    if pi.is_finite() && pi > 0.0 && pi <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("pi", "must lie in (0,1]", pi))
    }
}

/// `λ̃ = λ + (1−π)/(2π)·[λ + 1 − γ + √((λ+γ−1)² + 4λ)]` with `γ = πδ`; the
/// moments `θ̃ᵢ` are evaluated at aspect ratio `δ`.
pub fn adjusted_penalty(pi: f64, delta: f64, lambda: f64) -> Result<AdjustedPenalty> {
    validate_pi(pi)?;
    ensure_positive("delta", delta)?;
    ensure_positive("lambda", lambda)?;
    let lambda_tilde = lambda_tilde(pi, delta, lambda);
    let (theta1_tilde, theta2_tilde) = theta_pair(delta, lambda_tilde);
    Ok(AdjustedPenalty {
        pi,
        delta,
        lambda,
        lambda_tilde,
        theta1_tilde,
        theta2_tilde,
    })
}

pub(crate) fn lambda_tilde(pi: f64, delta: f64, lambda: f64) -> f64 {
    let gamma = pi * delta;
    let a = lambda + gamma - 1.0;
    let root = a.hypot(2.0 * lambda.sqrt());
    // λ + 1 − γ + root cancels when γ − 1 − λ ≫ 0; rationalize in that case.
    let bracket = if lambda + 1.0 - gamma >= 0.0 {
        lambda + 1.0 - gamma + root
    } else {
        4.0 * lambda * gamma / (root - (lambda + 1.0 - gamma))
    };
    lambda + (1.0 - pi) / (2.0 * pi) * bracket
}

/// Solution `(ē₀, e₀)` of the self-consistent system
///
/// ```text
/// ē = π (e + 1 − e ē)⁻¹
/// e = (1/ē)·[1 − (λ₂/ē) θ₁(δ, λ₁ + λ₂/ē)]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolution {
    pub pi: f64,
    pub delta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub e_bar: f64,
    pub e: f64,
    pub iterations: usize,
}

impl FixedPointSolution {
    /// `λ₁ + λ₂/ē₀`, which equals `λ̃` for every split of `λ`.
    pub fn effective_penalty(&self) -> f64 {
        self.lambda1 + self.lambda2 / self.e_bar
    }

    /// Residuals of the two equations of the system.
    pub fn residuals(&self) -> (f64, f64) {
        let (eb, e) = (self.e_bar, self.e);
        let r1 = eb - self.pi / (e + 1.0 - e * eb);
        let inner = 1.0 - self.lambda2 / eb * theta1(self.delta, self.lambda1 + self.lambda2 / eb);
        let r2 = e - inner / eb;
        (r1, r2)
    }
}

/// Solves the self-consistent system by bisection on
/// `g(x) = [1 − (λ₂/x)θ₁(δ, λ₁+λ₂/x)] − (π−x)/(1−x)`, which is increasing on
/// `(0, 1)` and changes sign there when `π < 1`.
pub fn solve_fixed_point(
    pi: f64,
    delta: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<FixedPointSolution> {
    validate_pi(pi)?;
    ensure_positive("delta", delta)?;
    ensure_positive("lambda1", lambda1)?;
    ensure_positive("lambda2", lambda2)?;

    let e_of = |eb: f64| (1.0 - lambda2 / eb * theta1(delta, lambda1 + lambda2 / eb)) / eb;

    if pi == 1.0 {
        return Ok(FixedPointSolution {
            pi,
            delta,
            lambda1,
            lambda2,
            e_bar: 1.0,
            e: e_of(1.0),
            iterations: 0,
        });
    }

    let g = |x: f64| {
        let shrink = 1.0 - lambda2 / x * theta1(delta, lambda1 + lambda2 / x);
        shrink - (pi - x) / (1.0 - x)
    };
    let (e_bar, iterations) = bisect(
        g,
        FIXED_POINT_EPS,
        1.0 - FIXED_POINT_EPS,
        FIXED_POINT_TOL,
        FIXED_POINT_MAX_ITER,
    )?;
    Ok(FixedPointSolution {
        pi,
        delta,
        lambda1,
        lambda2,
        e_bar,
        e: e_of(e_bar),
        iterations,
    })
}

/// Bisection for a function with `f(lo) < 0 < f(hi)` on a positive bracket.
/// Stops once the bracket is narrower than `tol` relative to its lower end
/// (`tol²` absolute below `tol`), so roots near zero keep their relative
/// accuracy. Returns the midpoint of the
/// final bracket and the number of halvings used.
pub(crate) fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoConvergence {
            iterations: 0,
            lo,
            hi,
        });
    }
    let increasing = f_lo < 0.0;
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, it));
        }
        if (f_mid < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * lo.max(tol) {
            return Ok((0.5 * (lo + hi), it));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        lo,
        hi,
    })
}
