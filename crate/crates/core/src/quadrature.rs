//! Gaussian quadrature rules for expectations under the standard normal law.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const HERMITE_START_NODES: usize = 200;
pub const HERMITE_MAX_NODES: usize = 1600;
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// Half-width of the truncated real line used by the piecewise rule.
/// `φ(40) ≈ 1e-348` underflows, so nothing beyond it is representable.
const TRUNCATION: f64 = 40.0;
const LEGENDRE_ORDER: usize = 20;

/// Orthonormal Hermite values `(pₙ(z), pₙ'(z))` for weight `e^{-z²}`, with
/// the common scale `10^{-100k}` removed; returns `k` as well.
fn hermite_eval(n: usize, z: f64) -> (f64, f64, i32) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut scale = 0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        if p1.abs() > 1e100 {
            p1 *= 1e-100;
            p2 *= 1e-100;
            scale += 1;
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, scale)
}

fn hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Roots of pₙ are bracketed by sign changes on a grid finer than the
    // smallest root gap (≈ π/√(2n+1), at the origin), then polished by
    // Newton steps safeguarded with bisection.
    let nf = n as f64;
    let top = (2.0 * nf + 1.0).sqrt() + 1.0;
    let h = PI / (4.0 * (2.0 * nf + 1.0).sqrt());
    let mut positive = Vec::with_capacity(n / 2);
    let mut weights = Vec::with_capacity(n / 2);
    let sign = |z: f64| hermite_eval(n, z).0;
    let mut a = if n % 2 == 1 { 0.5 * h } else { 0.0 };
    let mut fa = sign(a);
    while a < top && positive.len() < n / 2 {
        let b = a + h;
        let fb = sign(b);
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            let mut z = 0.5 * (a + b);
            for _ in 0..100 {
                let (p, dp, _) = hermite_eval(n, z);
                if (p < 0.0) == (flo < 0.0) {
                    lo = z;
                    flo = p;
                } else {
                    hi = z;
                }
                let step = p / dp;
                let mut next = z - step;
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                let done = (next - z).abs() <= 1e-15 * z.abs().max(1.0);
                z = next;
                if done {
                    break;
                }
            }
            let (_, dp, scale) = hermite_eval(n, z);
            positive.push(z);
            weights.push(2.0 / (dp * dp) * 1e-200f64.powi(scale));
        }
        a = b;
        fa = fb;
    }
    assert_eq!(positive.len(), n / 2, "Hermite root bracketing missed roots");
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for k in (0..positive.len()).rev() {
        x.push(-positive[k]);
        w.push(weights[k]);
    }
    if n % 2 == 1 {
        let (_, dp, scale) = hermite_eval(n, 0.0);
        x.push(0.0);
        w.push(2.0 / (dp * dp) * 1e-200f64.powi(scale));
    }
    for k in 0..positive.len() {
        x.push(positive[k]);
        w.push(weights[k]);
    }
    let nodes = x.iter().map(|v| v * std::f64::consts::SQRT_2).collect();
    let weights = w.iter().map(|v| v / PI.sqrt()).collect();
    (nodes, weights)
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Gauss–Hermite rule for `E f(Z)`, `Z ~ N(0,1)`: returns `(nodes, weights)`
/// with `Σ wᵢ = 1`. Rules are computed once per size and cached.
pub fn gauss_hermite(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(hermite_rule(n));
    cache.lock().unwrap().entry(n).or_insert(rule).clone()
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn hermite_sum<F: Fn(f64) -> f64>(f: &F, n: usize) -> f64 {
    let rule = gauss_hermite(n);
    let (x, w) = &*rule;
    x.iter().zip(w).map(|(&xi, &wi)| wi * f(xi)).sum()
}

/// `E f(Z)` by Gauss–Hermite, doubling from 200 nodes until two successive
/// estimates agree within `1e-10`.
pub fn normal_expectation<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let mut n = HERMITE_START_NODES;
    let mut prev = hermite_sum(&f, n);
    while n < HERMITE_MAX_NODES {
        n *= 2;
        let next = hermite_sum(&f, n);
        if (next - prev).abs() < CONVERGENCE_TOL * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "Gauss-Hermite estimates still moving at {HERMITE_MAX_NODES} nodes"
    )))
}

fn piecewise_sum<F: Fn(f64) -> f64>(f: &F, cuts: &[f64], panel_width: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let (gx, gw) = rule;
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let panels = ((b - a) / panel_width).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + k as f64 * h;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            total += gx
                .iter()
                .zip(gw)
                .map(|(&t, &wt)| {
                    let x = mid + half * t;
                    wt * f(x) * density(x)
                })
                .sum::<f64>()
                * half;
        }
    }
    total
}

/// `E f(Z)` for functions that are smooth except at the given breakpoints
/// (kinks or jumps). Each smooth piece of `[-40, 40]` is integrated with
/// composite Gauss–Legendre panels, halving the panel width until two
/// successive estimates agree within `1e-10`.
pub fn normal_expectation_piecewise<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64]) -> Result<f64> {
    let mut cuts: Vec<f64> = std::iter::once(-TRUNCATION)
        .chain(breakpoints.iter().copied().filter(|b| b.abs() < TRUNCATION))
        .chain(std::iter::once(TRUNCATION))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rule = gauss_legendre(LEGENDRE_ORDER);
    let mut width = 2.0;
    let mut prev = piecewise_sum(&f, &cuts, width, &rule);
    for _ in 0..8 {
        width *= 0.5;
        let next = piecewise_sum(&f, &cuts, width, &rule);
        if (next - prev).abs() < CONVERGENCE_TOL * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature("piecewise Gauss-Legendre estimates did not settle".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_integrates_gaussian_moments() {
        let rule = gauss_hermite(200);
        let (x, w) = &*rule;
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
        let m2: f64 = x.iter().zip(w).map(|(a, b)| b * a * a).sum();
        let m4: f64 = x.iter().zip(w).map(|(a, b)| b * a.powi(4)).sum();
        let m6: f64 = x.iter().zip(w).map(|(a, b)| b * a.powi(6)).sum();
        assert_relative_eq!(m2, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m4, 3.0, epsilon = 1e-11);
        assert_relative_eq!(m6, 15.0, epsilon = 1e-10);
    }

    #[test]
    fn hermite_rules_of_every_size_are_normalized() {
        for n in [1, 2, 7, 201, 400, 1600] {
            let rule = gauss_hermite(n);
            let (x, w) = &*rule;
            assert_eq!(x.len(), n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            if n >= 2 {
                let m2: f64 = x.iter().zip(w).map(|(a, b)| b * a * a).sum();
                assert_relative_eq!(m2, 1.0, epsilon = 1e-11);
            }
        }
        // largest zero of H₂₀₀ is 19.33924866791141 (unit-weight scaling)
        let rule = gauss_hermite(200);
        assert_relative_eq!(rule.0[199] / std::f64::consts::SQRT_2, 19.33924866791141, epsilon = 1e-11);
    }

    #[test]
    fn hermite_handles_smooth_nonpolynomial() {
        // E cos(Z) = e^{-1/2}
        let v = normal_expectation(f64::cos).unwrap();
        assert_relative_eq!(v, (-0.5f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(20);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        let i38: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(38)).sum();
        assert_relative_eq!(i38, 2.0 / 39.0, epsilon = 1e-14);
    }

    #[test]
    fn piecewise_handles_kinks() {
        let relu = |x: f64| x.max(0.0);
        let m1 = normal_expectation_piecewise(relu, &[0.0]).unwrap();
        assert_relative_eq!(m1, 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-13);
        let m2 = normal_expectation_piecewise(|x| relu(x).powi(2), &[0.0]).unwrap();
        assert_relative_eq!(m2, 0.5, epsilon = 1e-13);
        let abs = normal_expectation_piecewise(f64::abs, &[0.0]).unwrap();
        assert_relative_eq!(abs, (2.0 / PI).sqrt(), epsilon = 1e-13);
    }
}
