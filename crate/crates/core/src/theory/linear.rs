//! Limits for the two-layer linear network `f(x) = (Wx)ᵀβ̂` and for plain
//! one-layer ridge regression.

use std::fmt;
use std::str::FromStr;

use crate::error::{ensure_positive, Error, Result};
use crate::rmt::{self, validate_pi};

/// Asymptotic regime: signal strength `α²`, label-noise variance `σ²`,
/// parametrization level `π = lim p/d`, aspect ratio `δ = lim d/n`, and the
/// ridge penalty `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha2: f64,
    pub sigma2: f64,
    pub pi: f64,
    pub delta: f64,
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(alpha2: f64, sigma2: f64, pi: f64, delta: f64, lambda: f64) -> Result<Self> {
        let params = Self {
            alpha2,
            sigma2,
            pi,
            delta,
            lambda,
        };
        params.validate_regime()?;
        Ok(params)
    }

    /// Checks everything except `λ`.
    pub fn validate_regime(&self) -> Result<()> {
        ensure_positive("alpha2", self.alpha2)?;
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(Error::domain("sigma2", "must be finite and non-negative", self.sigma2));
        }
        validate_pi(self.pi)?;
        ensure_positive("delta", self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_regime()?;
        ensure_positive("lambda", self.lambda)
    }

    /// `γ = πδ = lim p/n`.
    pub fn gamma(&self) -> f64 {
        self.pi * self.delta
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_pi(self, pi: f64) -> Self {
        Self { pi, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_sigma2(self, sigma2: f64) -> Self {
        Self { sigma2, ..self }
    }

    /// Noise-to-signal ratio `σ²/α²`.
    pub(crate) fn noise_ratio(&self) -> f64 {
        self.sigma2 / self.alpha2
    }
}

/// The seven ANOVA terms of `Var[f̂(x)]` over samples (s), label noise (l)
/// and initialization (i).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VarianceComponents {
    pub v_s: f64,
    pub v_l: f64,
    pub v_i: f64,
    pub v_sl: f64,
    pub v_si: f64,
    pub v_li: f64,
    pub v_sli: f64,
}

impl VarianceComponents {
    pub fn total(&self) -> f64 {
        self.v_s + self.v_l + self.v_i + self.v_sl + self.v_si + self.v_li + self.v_sli
    }

    /// Component by source set, e.g. `&[Source::Sample, Source::Init]` gives `V_si`.
    pub fn get(&self, sources: &[Source]) -> f64 {
        let mask = sources.iter().fold(0u8, |m, s| m | s.bit());
        match mask {
            0b001 => self.v_s,
            0b010 => self.v_l,
            0b100 => self.v_i,
            0b011 => self.v_sl,
            0b101 => self.v_si,
            0b110 => self.v_li,
            0b111 => self.v_sli,
            _ => 0.0,
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("v_s", self.v_s),
            ("v_l", self.v_l),
            ("v_i", self.v_i),
            ("v_sl", self.v_sl),
            ("v_si", self.v_si),
            ("v_li", self.v_li),
            ("v_sli", self.v_sli),
        ]
    }
}

/// A source of randomness in the fitted predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Sample,
    Label,
    Init,
}

impl Source {
    fn bit(self) -> u8 {
        match self {
            Source::Sample => 0b001,
            Source::Label => 0b010,
            Source::Init => 0b100,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Source::Sample => 's',
            Source::Label => 'l',
            Source::Init => 'i',
        }
    }
}

/// A conditioning order over `{s, l, i}`, such as `lsi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Order(pub [Source; 3]);

impl Order {
    pub fn all() -> [Order; 6] {
        use Source::*;
        [
            Order([Sample, Label, Init]),
            Order([Sample, Init, Label]),
            Order([Label, Sample, Init]),
            Order([Label, Init, Sample]),
            Order([Init, Sample, Label]),
            Order([Init, Label, Sample]),
        ]
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.0 {
            write!(f, "{}", s.letter())?;
        }
        Ok(())
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::with_capacity(3);
        for c in s.chars() {
            out.push(match c {
                's' => Source::Sample,
                'l' => Source::Label,
                'i' => Source::Init,
                _ => return Err(Error::Config(format!("unknown source '{c}' in order '{s}'"))),
            });
        }
        match out.as_slice() {
            &[a, b, c] if a != b && b != c && a != c => Ok(Order([a, b, c])),
            _ => Err(Error::Config(format!("order '{s}' must be a permutation of s, l, i"))),
        }
    }
}

/// The sequential decomposition `Var = Σᵃ + Σᵇ + Σᶜ` for the order `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedDecomposition {
    pub order: Order,
    pub term_a: f64,
    pub term_b: f64,
    pub term_c: f64,
}

impl OrderedDecomposition {
    pub fn total(&self) -> f64 {
        self.term_a + self.term_b + self.term_c
    }
}

/// The label-sample-init ordered terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelSampleInit {
    pub sigma_label: f64,
    pub sigma_sample: f64,
    pub sigma_init: f64,
}

/// Bias-variance split of the limiting risk.
///
/// `mse = bias2 + variance + noise_floor`. The floor is the test-point label
/// noise `σ²` for the two-layer formulas and `0` where a formula is stated
/// without it; [`RiskDecomposition::excess_mse`] removes it either way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskDecomposition {
    pub bias2: f64,
    pub variance: f64,
    pub noise_floor: f64,
    pub mse: f64,
    pub ordered: Option<LabelSampleInit>,
}

impl RiskDecomposition {
    pub fn excess_mse(&self) -> f64 {
        self.mse - self.noise_floor
    }
}

/// Limits of the seven ANOVA components.
pub fn variance_components(params: &ModelParams) -> Result<VarianceComponents> {
    params.validate()?;
    let ModelParams {
        alpha2,
        sigma2,
        pi,
        delta,
        lambda,
    } = *params;
    let (t1, t2) = rmt::theta_pair(params.gamma(), lambda);
    let lt = rmt::lambda_tilde(pi, delta, lambda);
    let (tt1, tt2) = rmt::theta_pair(delta, lt);

    let shrink = 1.0 - lambda * t1;
    // ∫ x²/(x+λ̃)² dF_δ
    let ew_m_norm = 1.0 - 2.0 * lt * tt1 + lt * lt * tt2;
    let m_norm = 1.0 - 2.0 * lambda * t1 + lambda * lambda * t2 + (1.0 - pi) * delta * (t1 - lambda * t2);
    let tilde_spread = tt1 - lt * tt2;

    Ok(VarianceComponents {
        v_s: alpha2 * (ew_m_norm - pi * pi * shrink * shrink),
        v_l: 0.0,
        v_i: alpha2 * pi * (1.0 - pi) * shrink * shrink,
        v_sl: sigma2 * delta * tilde_spread,
        v_si: alpha2 * (pi * m_norm - pi * (1.0 - pi) * shrink * shrink - ew_m_norm),
        v_li: 0.0,
        v_sli: sigma2 * delta * (pi * (t1 - lambda * t2) - tilde_spread),
    })
}

/// Bias, variance, MSE and the label-sample-init terms at penalty `params.lambda`.
pub fn risk_decomposition(params: &ModelParams) -> Result<RiskDecomposition> {
    params.validate()?;
    let ModelParams {
        alpha2,
        sigma2,
        pi,
        delta,
        lambda,
    } = *params;
    let (t1, t2) = rmt::theta_pair(params.gamma(), lambda);
    let spread = t1 - lambda * t2;

    let bias2 = alpha2 * (1.0 - pi + lambda * pi * t1).powi(2);
    let variance = alpha2
        * pi
        * (1.0 - pi + (pi - 1.0) * (2.0 * lambda - delta) * t1 - pi * lambda * lambda * t1 * t1
            + lambda * (lambda - delta + pi * delta) * t2)
        + sigma2 * pi * delta * spread;
    let sigma_label = sigma2 * pi * delta * spread;
    let sigma_sample =
        alpha2 * pi * (-lambda * lambda * t1 * t1 + lambda * lambda * t2 + (1.0 - pi) * delta * spread);
    let sigma_init = alpha2 * pi * (1.0 - pi) * (1.0 - lambda * t1).powi(2);
    let c = delta * (1.0 - pi + params.noise_ratio());
    let mse = alpha2 * (1.0 - pi + pi * delta * (1.0 - pi + params.noise_ratio()) * t1 + (lambda - c) * lambda * pi * t2)
        + sigma2;

    Ok(RiskDecomposition {
        bias2,
        variance,
        noise_floor: sigma2,
        mse,
        ordered: Some(LabelSampleInit {
            sigma_label,
            sigma_sample,
            sigma_init,
        }),
    })
}

/// Assembles `Σᵃ = V_a+V_ab+V_ac+V_abc`, `Σᵇ = V_b+V_bc`, `Σᶜ = V_c`.
pub fn ordered_decomposition(params: &ModelParams, order: Order) -> Result<OrderedDecomposition> {
    let v = variance_components(params)?;
    Ok(ordered_from_components(&v, order))
}

pub fn ordered_from_components(v: &VarianceComponents, order: Order) -> OrderedDecomposition {
    let [a, b, c] = order.0;
    OrderedDecomposition {
        order,
        term_a: v.get(&[a]) + v.get(&[a, b]) + v.get(&[a, c]) + v.get(&[a, b, c]),
        term_b: v.get(&[b]) + v.get(&[b, c]),
        term_c: v.get(&[c]),
    }
}

/// `λ* = δ(1 − π + σ²/α²)`. `params.lambda` is ignored.
pub fn optimal_lambda(params: &ModelParams) -> Result<f64> {
    params.validate_regime()?;
    if params.pi == 1.0 && params.sigma2 == 0.0 {
        return Err(Error::DegenerateOptimum);
    }
    Ok(params.delta * (1.0 - params.pi + params.noise_ratio()))
}

/// `1 − π + λ*πθ₁(γ, λ*)` in closed form; `MSE(λ*) − σ² = α²·m`.
fn optimum_shrinkage(params: &ModelParams) -> f64 {
    let r = params.noise_ratio();
    let delta = params.delta;
    let c = delta * (1.0 + r) + 1.0;
    let s = (c * c - 4.0 * params.gamma()).sqrt();
    (delta * (1.0 - r) - 1.0 + s) / (2.0 * delta)
}

/// Bias, variance and MSE at `λ*` from their closed forms; the ordered terms
/// are evaluated through [`risk_decomposition`] at `λ*`.
pub fn risk_at_optimum(params: &ModelParams) -> Result<RiskDecomposition> {
    let lambda_star = optimal_lambda(params)?;
    let ModelParams {
        alpha2,
        sigma2,
        pi,
        delta,
        ..
    } = *params;
    let r = params.noise_ratio();
    let c = delta * (1.0 + r) + 1.0;
    let s = (c * c - 4.0 * params.gamma()).sqrt();
    let m = optimum_shrinkage(params);
    let bias2 = alpha2 * m * m;
    let variance =
        -sigma2 * pi + (alpha2 + sigma2 * delta) * (delta * (2.0 * pi - 1.0 - r) - 1.0 + s) / (2.0 * delta * delta);
    let mse = alpha2 * m + sigma2;
    let ordered = risk_decomposition(&params.with_lambda(lambda_star))?.ordered;
    Ok(RiskDecomposition {
        bias2,
        variance,
        noise_floor: sigma2,
        mse,
        ordered,
    })
}

/// Extra training-label noise `Δ` under which plain ridge (`π = 1`) matches the
/// optimally tuned two-layer model in bias, variance and MSE.
pub fn added_noise_delta(params: &ModelParams) -> Result<f64> {
    params.validate_regime()?;
    let gamma = params.gamma();
    if gamma <= 0.0 {
        return Err(Error::domain("gamma", "must be positive", gamma));
    }
    let c = params.delta * (1.0 + params.noise_ratio()) + 1.0;
    Ok(params.alpha2 * (1.0 - params.pi) * (c + (c * c - 4.0 * gamma).sqrt()) / (2.0 * gamma))
}

/// Optimally tuned one-layer ridge regression with unit label-noise variance,
/// as a function of `γ = lim p/n`: `λ* = γ/α²`, `Bias² = α²λ*²θ₂`,
/// `Var = γ(θ₁ − λ*θ₂)` and `MSE = γθ₁` (test-noise floor excluded).
pub fn one_layer_risk(alpha2: f64, gamma: f64) -> Result<RiskDecomposition> {
    ensure_positive("alpha2", alpha2)?;
    ensure_positive("gamma", gamma)?;
    let lambda = gamma / alpha2;
    let (t1, t2) = rmt::theta_pair(gamma, lambda);
    let bias2 = alpha2 * lambda * lambda * t2;
    let variance = gamma * (t1 - lambda * t2);
    Ok(RiskDecomposition {
        bias2,
        variance,
        noise_floor: 0.0,
        mse: bias2 + variance,
        ordered: None,
    })
}

/// `MSE = γθ₁(γ, λ*)` directly, for cross-checking [`one_layer_risk`].
pub fn one_layer_mse(alpha2: f64, gamma: f64) -> Result<f64> {
    ensure_positive("alpha2", alpha2)?;
    ensure_positive("gamma", gamma)?;
    Ok(gamma * rmt::theta1(gamma, gamma / alpha2))
}

/// Maximizer of the one-layer variance, `α²/(α²+1)`.
pub fn one_layer_variance_peak(alpha2: f64) -> f64 {
    alpha2 / (alpha2 + 1.0)
}

/// The ridgeless sweep: components at each `λ` of a decreasing sequence.
pub fn ridgeless_sweep(params: &ModelParams, lambdas: &[f64]) -> Result<Vec<(f64, VarianceComponents)>> {
    lambdas
        .iter()
        .map(|&l| variance_components(&params.with_lambda(l)).map(|v| (l, v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1(lambda: f64) -> ModelParams {
        ModelParams::new(1.0, 0.09, 0.8, 1.25, lambda).unwrap()
    }

    #[test]
    fn zero_noise_kills_label_interactions() {
        for &(pi, delta) in &[(0.3, 0.5), (0.8, 1.25), (1.0, 2.0)] {
            let v = variance_components(&ModelParams::new(1.0, 0.0, pi, delta, 0.05).unwrap()).unwrap();
            assert_eq!(v.v_sl, 0.0);
            assert_eq!(v.v_sli, 0.0);
            assert_eq!(v.v_l, 0.0);
            assert_eq!(v.v_li, 0.0);
        }
    }

    #[test]
    fn sample_init_interaction_dominates_at_threshold() {
        let v = variance_components(&fig1(0.01)).unwrap();
        let (name, max) = v
            .named()
            .into_iter()
            .fold(("", f64::MIN), |acc, (n, x)| if x > acc.1 { (n, x) } else { acc });
        assert_eq!(name, "v_si", "{v:?}");
        assert!(max > 0.0);
    }

    #[test]
    fn sample_init_interaction_diverges_like_inverse_sqrt_lambda() {
        let lambdas = [1e-3, 1e-4, 1e-5];
        let comps: Vec<VarianceComponents> = lambdas.iter().map(|&l| variance_components(&fig1(l)).unwrap()).collect();
        let scaled: Vec<f64> = comps.iter().zip(lambdas).map(|(v, l)| v.v_si * l.sqrt()).collect();
        let spread = |xs: &[f64]| {
            let hi = xs.iter().cloned().fold(f64::MIN, f64::max);
            let lo = xs.iter().cloned().fold(f64::MAX, f64::min);
            (hi - lo) / hi
        };
        assert!(scaled[0] > 0.0 && spread(&scaled) < 0.1, "{scaled:?}");
        // successive decades: V_si grows by nearly √10
        let ratio = comps[2].v_si / comps[1].v_si;
        assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.05, "{ratio}");
        // main effects and V_sl settle, with λ^{1/2} corrections
        for get in [|v: &VarianceComponents| v.v_s, |v: &VarianceComponents| v.v_i, |v: &VarianceComponents| v.v_sl] {
            let xs: Vec<f64> = comps.iter().map(get).collect();
            let (d1, d2) = ((xs[1] - xs[0]).abs(), (xs[2] - xs[1]).abs());
            assert!(d2 < 0.5 * d1, "{xs:?}");
        }
    }

    #[test]
    fn lsi_order_matches_components() {
        let p = fig1(0.05);
        let v = variance_components(&p).unwrap();
        let lsi = ordered_decomposition(&p, "lsi".parse().unwrap()).unwrap();
        assert_relative_eq!(lsi.term_a, v.v_sl + v.v_sli, epsilon = 1e-14);
        let lis = ordered_decomposition(&p, "lis".parse().unwrap()).unwrap();
        assert_relative_eq!(lis.term_b, v.v_i + v.v_si, epsilon = 1e-14);
        assert_eq!(lis.term_c, v.v_s);
        let r = risk_decomposition(&p).unwrap();
        let o = r.ordered.unwrap();
        assert_relative_eq!(o.sigma_label, lsi.term_a, epsilon = 1e-12);
        assert_relative_eq!(o.sigma_sample, lsi.term_b, epsilon = 1e-12);
        assert_relative_eq!(o.sigma_init, lsi.term_c, epsilon = 1e-12);
    }

    #[test]
    fn order_parsing() {
        assert_eq!("sli".parse::<Order>().unwrap().to_string(), "sli");
        assert!("ssi".parse::<Order>().is_err());
        assert!("sl".parse::<Order>().is_err());
        assert!("slx".parse::<Order>().is_err());
    }

    #[test]
    fn optimal_lambda_examples() {
        let p = ModelParams::new(1.0, 0.09, 0.8, 1.25, 1.0).unwrap();
        assert_relative_eq!(optimal_lambda(&p).unwrap(), 0.3625, epsilon = 1e-15);
        let q = ModelParams::new(2.0, 0.5, 1.0, 3.0, 1.0).unwrap();
        assert_relative_eq!(optimal_lambda(&q).unwrap(), 3.0 * 0.5 / 2.0, epsilon = 1e-15);
        let r = ModelParams::new(2.0, 0.0, 1.0, 3.0, 1.0).unwrap();
        assert!(matches!(optimal_lambda(&r), Err(Error::DegenerateOptimum)));
    }

    #[test]
    fn optimum_closed_forms() {
        // c = 2.25, √(c² − 4) = √1.0625, m = (−0.25 + √1.0625)/2.
        let p = ModelParams::new(1.0, 0.25, 1.0, 1.0, 1.0).unwrap();
        let r = risk_at_optimum(&p).unwrap();
        let m = (-0.25 + 1.0625f64.sqrt()) / 2.0;
        assert_relative_eq!(r.mse, m + 0.25, epsilon = 1e-14);
        assert_relative_eq!(r.mse, 0.640388, epsilon = 1e-6);
        assert_relative_eq!(r.bias2, 0.152403, epsilon = 1e-6);
        assert_relative_eq!(r.variance, 0.237986, epsilon = 1e-6);
        let bias = r.bias2.sqrt();
        assert!((r.variance - bias * (1.0 - bias)).abs() < 1e-12);
    }

    #[test]
    fn bias_vanishes_ridgeless_underparametrized() {
        let p = ModelParams::new(1.0, 0.0, 1.0, 0.5, 1e-9).unwrap();
        assert!(risk_decomposition(&p).unwrap().bias2 < 1e-15);
    }

    #[test]
    fn added_noise_vanishes_at_full_parametrization() {
        let p = ModelParams::new(1.3, 0.2, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(added_noise_delta(&p).unwrap(), 0.0);
    }

    #[test]
    fn added_noise_equivalence_example() {
        let p = ModelParams::new(1.0, 0.09, 0.8, 1.25, 1.0).unwrap();
        let delta_noise = added_noise_delta(&p).unwrap();
        assert!(delta_noise > 0.0);
        let two = risk_at_optimum(&p).unwrap();
        let one = risk_at_optimum(&p.with_pi(1.0).with_sigma2(p.sigma2 + delta_noise)).unwrap();
        assert!((two.excess_mse() - one.excess_mse()).abs() < 1e-9);
        assert!((two.bias2 - one.bias2).abs() < 1e-9);
        assert!((two.variance - one.variance).abs() < 1e-9);
    }

    #[test]
    fn one_layer_peak() {
        // Var(γ) = −1/2 + ((c+1)γ+1) / (2√((c+1)²γ² + 2(c−1)γ + 1)), c = 1/α².
        let r = one_layer_risk(1.0, 0.5).unwrap();
        let expected = -0.5 + 2.0 / (2.0 * 2f64.sqrt());
        assert_relative_eq!(r.variance, expected, epsilon = 1e-14);
        assert_relative_eq!(r.variance, 0.207107, epsilon = 1e-6);
        assert!((r.bias2 - r.variance).abs() < 1e-10);
        assert_relative_eq!(r.mse, one_layer_mse(1.0, 0.5).unwrap(), epsilon = 1e-14);
        assert!(r.ordered.is_none());
    }

    #[test]
    fn one_layer_vanishing_parametrization() {
        let r = one_layer_risk(1.0, 1e-8).unwrap();
        assert!(r.variance < 1e-7 && r.bias2 < 1e-7);
        assert!(one_layer_risk(1.0, 0.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 0.1, 1.2, 1.0, 0.1).is_err());
        assert!(ModelParams::new(0.0, 0.1, 0.5, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.5, 1.0, 0.1).is_err());
        let p = ModelParams::new(1.0, 0.1, 0.5, 1.0, 0.0).unwrap();
        assert!(variance_components(&p).is_err());
        assert!(risk_decomposition(&p).is_err());
    }
}
