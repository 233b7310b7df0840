use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::ridge::{features, features_t, linear_slope, ridge_coefficients, ridge_operator};
use super::rng::{stream, Role};
use super::sample::{ar1_covariance, sample_data, sample_orthogonal, sample_vector};
use super::{DataLaw, Estimator, SimConfig, WeightDraw};
use crate::error::{Error, Result};

/// Offset separating the crossed-design draws from the i.i.d. pairs of the same run.
const CROSSED: u64 = 1 << 31;

/// Mean over runs and the sample standard deviation of the per-run values
/// (`0` for a single run).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let k = xs.len();
        if k == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / k as f64;
        let std = if k > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Functional estimates from a single run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RunFunctionals {
    pub mse: f64,
    pub bias2: f64,
    pub variance: f64,
    pub sigma_label: f64,
    pub sigma_sample: f64,
    pub sigma_init: f64,
    pub v_s: f64,
    pub v_i: f64,
    pub v_sl: f64,
    pub v_si: f64,
    pub v_sli: f64,
}

impl RunFunctionals {
    pub fn named(&self) -> [(&'static str, f64); 11] {
        [
            ("mse", self.mse),
            ("bias2", self.bias2),
            ("variance", self.variance),
            ("sigma_label", self.sigma_label),
            ("sigma_sample", self.sigma_sample),
            ("sigma_init", self.sigma_init),
            ("v_s", self.v_s),
            ("v_i", self.v_i),
            ("v_sl", self.v_sl),
            ("v_si", self.v_si),
            ("v_sli", self.v_sli),
        ]
    }
}

/// Estimates aggregated over runs. Quantities listed in `negative` went below
/// zero in at least one run; they are reported as computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalEstimates {
    pub mse: Estimate,
    pub bias2: Estimate,
    pub variance: Estimate,
    pub sigma_label: Estimate,
    pub sigma_sample: Estimate,
    pub sigma_init: Estimate,
    pub v_s: Estimate,
    pub v_i: Estimate,
    pub v_sl: Estimate,
    pub v_si: Estimate,
    pub v_sli: Estimate,
    pub negative: Vec<&'static str>,
    pub per_run: Vec<RunFunctionals>,
    pub k_outer: usize,
    pub k_grid: usize,
    pub runs: usize,
}

impl FunctionalEstimates {
    fn from_runs(per_run: Vec<RunFunctionals>, config: &SimConfig) -> Self {
        let col = |f: fn(&RunFunctionals) -> f64| Estimate::from_samples(&per_run.iter().map(f).collect::<Vec<_>>());
        let mut negative = Vec::new();
        for (name, _) in RunFunctionals::default().named() {
            if name != "bias2" && per_run.iter().any(|r| r.named().iter().any(|&(m, v)| m == name && v < 0.0)) {
                negative.push(name);
            }
        }
        Self {
            mse: col(|r| r.mse),
            bias2: col(|r| r.bias2),
            variance: col(|r| r.variance),
            sigma_label: col(|r| r.sigma_label),
            sigma_sample: col(|r| r.sigma_sample),
            sigma_init: col(|r| r.sigma_init),
            v_s: col(|r| r.v_s),
            v_i: col(|r| r.v_i),
            v_sl: col(|r| r.v_sl),
            v_si: col(|r| r.v_si),
            v_sli: col(|r| r.v_sli),
            negative,
            per_run,
            k_outer: config.k_outer,
            k_grid: config.k_grid,
            runs: config.runs,
        }
    }

    pub fn named(&self) -> [(&'static str, Estimate); 11] {
        [
            ("mse", self.mse),
            ("bias2", self.bias2),
            ("variance", self.variance),
            ("sigma_label", self.sigma_label),
            ("sigma_sample", self.sigma_sample),
            ("sigma_init", self.sigma_init),
            ("v_s", self.v_s),
            ("v_i", self.v_i),
            ("v_sl", self.v_sl),
            ("v_si", self.v_si),
            ("v_sli", self.v_sli),
        ]
    }
}

fn normal_vector<R: rand::Rng>(len: usize, sd: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(len, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        sd * z
    })
}

/// Squared test error `(f̂(x) − xᵀθ)²` of one i.i.d. tuple.
fn tuple_error(c: &SimConfig, run: u64, t: u64) -> Result<f64> {
    let (n, d, p) = (c.n, c.d, c.p);
    let theta = normal_vector(d, (c.alpha2 / d as f64).sqrt(), &mut stream(c.seed, run, Role::Theta, t));
    let eps = normal_vector(n, c.sigma2.sqrt(), &mut stream(c.seed, run, Role::Noise, t));
    let mut data_rng = stream(c.seed, run, Role::Data, t);
    let mut test_rng = stream(c.seed, run, Role::Test, t);
    let act = &c.activation;
    let (z, y, h, target) = match c.weight_draw {
        WeightDraw::Haar => {
            let x = sample_data(&c.data_law, n, d, &mut data_rng)?;
            let w = sample_orthogonal(d, p, &mut stream(c.seed, run, Role::Weights, t))?;
            let xt = sample_vector(&c.data_law, d, &mut test_rng)?;
            let y = &x * &theta + eps;
            let z = features(&x, &w, act);
            let h = (&w * &xt).map(|v| act.apply(v));
            (z, y, h, xt.dot(&theta))
        }
        WeightDraw::Canonical => {
            // W = [I_p 0]: the features only see the first p coordinates, and
            // the remaining ones enter the labels through an independent
            // N(0, ‖θ_tail‖²) term per row.
            let head = theta.rows(0, p);
            let tail = theta.rows(p, d - p).norm();
            let xp = sample_data(&DataLaw::Gaussian, n, p, &mut data_rng)?;
            let g = normal_vector(n, tail, &mut data_rng);
            let y = &xp * head + g + eps;
            let xt = normal_vector(p, 1.0, &mut test_rng);
            let g0: f64 = StandardNormal.sample(&mut test_rng);
            let g0 = tail * g0;
            let z = if act.is_identity() { xp } else { xp.map(|v| act.apply(v)) };
            let h = xt.map(|v| act.apply(v));
            (z, y, h, xt.dot(&head) + g0)
        }
    };
    let beta = ridge_coefficients(&z, &y, c.lambda)?;
    Ok((h.dot(&beta) - target).powi(2))
}

pub(crate) fn mse_direct_in(c: &SimConfig) -> Result<Estimate> {
    if c.k_outer == 0 {
        return Err(Error::Config("k_outer must be at least 1".into()));
    }
    let k = c.k_outer;
    let errors = (0..c.runs * k)
        .into_par_iter()
        .map(|idx| tuple_error(c, (idx / k) as u64, (idx % k) as u64))
        .collect::<Result<Vec<f64>>>()?;
    let run_means: Vec<f64> = errors.chunks(k).map(|e| e.iter().sum::<f64>() / k as f64).collect();
    Ok(Estimate::from_samples(&run_means))
}

/// Direct Monte Carlo MSE: the mean of `(f̂ᵢ(xᵢ) − xᵢᵀθᵢ)²` over `k_outer`
/// i.i.d. tuples `(xᵢ, θᵢ, εᵢ, Xᵢ, Wᵢ)`, repeated `runs` times. The label
/// noise of the test point is not included.
pub fn estimate_mse_direct(config: &SimConfig) -> Result<Estimate> {
    config.validate()?;
    config.pool()?.install(|| mse_direct_in(config))
}

/// `tr(Aᵀ S A G)` with `S`, `G` symmetric; `None` stands for the identity.
fn quad(a: &DMatrix<f64>, s: Option<&DMatrix<f64>>, g: Option<&DMatrix<f64>>) -> f64 {
    match (s, g) {
        (None, None) => a.norm_squared(),
        (Some(s), None) => (s * a).dot(a),
        (None, Some(g)) => (a * g).dot(a),
        (Some(s), Some(g)) => (s * a).dot(&(a * g)),
    }
}

fn population_covariance(law: &DataLaw, d: usize) -> Option<DMatrix<f64>> {
    match *law {
        DataLaw::Ar1(r) if r != 0.0 => Some(ar1_covariance(r, d)),
        _ => None,
    }
}

/// Plug-in `(a, b, e)` of a balanced two-way layout to unbiased
/// random-effects variances `(σ_a², σ_b², σ_e²)`.
fn random_effects(a: f64, b: f64, e: f64, k: usize) -> (f64, f64, f64) {
    let kf = k as f64;
    let se = e * kf * kf / ((kf - 1.0) * (kf - 1.0));
    (a * kf / (kf - 1.0) - se / kf, b * kf / (kf - 1.0) - se / kf, se)
}

fn run_functionals(c: &SimConfig, slope: f64, sigma: Option<&DMatrix<f64>>, run: u64) -> Result<RunFunctionals> {
    let (n, d) = (c.n, c.d);
    let k2 = slope * slope;
    let scale = c.alpha2 / d as f64;
    let unbiased = c.estimator == Estimator::Unbiased;
    let seed = c.seed;
    let weights_metric = |w: &DMatrix<f64>| sigma.map(|s| w * s * w.transpose());

    // i.i.d. (X, W) pairs: bias, variance, MSE, label term
    let t_count = c.k_outer;
    let mut em = DMatrix::<f64>::zeros(d, d);
    let (mut m2, mut mt2) = (0.0, 0.0);
    for t in 0..t_count as u64 {
        let x = sample_data(&c.data_law, n, d, &mut stream(seed, run, Role::Data, t))?;
        let w = sample_orthogonal(d, c.p, &mut stream(seed, run, Role::Weights, t))?;
        let s = weights_metric(&w);
        let cop = ridge_operator(&features(&x, &w, &c.activation), c.lambda)?;
        let cx = &cop * &x;
        m2 += k2 * quad(&cx, s.as_ref(), None);
        mt2 += k2 * quad(&cop, s.as_ref(), None);
        em.gemm(slope, &w.transpose(), &cx, 1.0);
    }
    let tf = t_count as f64;
    em /= tf;
    m2 /= tf;
    mt2 /= tf;
    let trace_em = sigma.map_or_else(|| em.trace(), |s| s.dot(&em));
    let em2 = quad(&em, sigma, None);
    // tr Σ = d for every supported law
    let mut bias2 = scale * (em2 - 2.0 * trace_em + d as f64);
    let spread = scale * (m2 - em2);
    let label = c.sigma2 * mt2;
    let mut variance = spread + label;
    if unbiased {
        variance = spread * tf / (tf - 1.0) + label;
        bias2 -= spread / (tf - 1.0);
    }
    let mse = bias2 + variance;

    // crossed K × K design of independent Xᵢ and Wⱼ
    let kg = c.k_grid;
    let xs = (0..kg as u64)
        .map(|i| {
            let x = sample_data(&c.data_law, n, d, &mut stream(seed, run, Role::Data, CROSSED + i))?;
            let g = &x * x.transpose();
            Ok((x, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let ws = (0..kg as u64)
        .map(|j| {
            let w = sample_orthogonal(d, c.p, &mut stream(seed, run, Role::Weights, CROSSED + j))?;
            let s = weights_metric(&w);
            Ok((w.transpose(), s))
        })
        .collect::<Result<Vec<_>>>()?;
    // ws holds Wⱼᵀ. Accumulate Σⱼ WⱼᵀCᵢⱼ per i, Σᵢ CᵢⱼXᵢ and Σᵢ Cᵢⱼ per j
    let mut a_acc = vec![DMatrix::<f64>::zeros(d, n); kg];
    let mut b_acc = vec![DMatrix::<f64>::zeros(c.p, d); kg];
    let mut bt_acc = vec![DMatrix::<f64>::zeros(c.p, n); kg];
    let (mut mm2, mut mmt2) = (0.0, 0.0);
    for (i, (x, g)) in xs.iter().enumerate() {
        for (j, (wt, s)) in ws.iter().enumerate() {
            let z = features_t(x, wt, &c.activation);
            let cop = ridge_operator(&z, c.lambda)
                .map_err(|e| e.in_cell(format!("run {run}, grid cell ({i}, {j})")))?;
            mm2 += quad(&cop, s.as_ref(), Some(g));
            mmt2 += quad(&cop, s.as_ref(), None);
            a_acc[i].gemm(1.0, wt, &cop, 1.0);
            b_acc[j].gemm(1.0, &cop, x, 1.0);
            bt_acc[j] += &cop;
        }
    }
    let kf = kg as f64;
    let norm = k2 / (kf * kf);
    let mean_m2 = norm * mm2;
    let mean_mt2 = norm * mmt2;
    let mean_a2 = xs.iter().zip(&a_acc).map(|((_, g), a)| quad(a, sigma, Some(g))).sum::<f64>() * norm / kf;
    let mean_at2 = a_acc.iter().map(|a| quad(a, sigma, None)).sum::<f64>() * norm / kf;
    let mean_b2 = ws.iter().zip(&b_acc).map(|((_, s), b)| quad(b, s.as_ref(), None)).sum::<f64>() * norm / kf;
    let mean_bt2 = ws.iter().zip(&bt_acc).map(|((_, s), b)| quad(b, s.as_ref(), None)).sum::<f64>() * norm / kf;
    let mut grand = DMatrix::<f64>::zeros(d, d);
    for ((wt, _), b) in ws.iter().zip(&b_acc) {
        grand.gemm(1.0, wt, b, 1.0);
    }
    let grand2 = quad(&grand, sigma, None) * norm / (kf * kf);
    let mut grand_t = DMatrix::<f64>::zeros(d, n);
    for a in &a_acc {
        grand_t += a;
    }
    let grand_t2 = quad(&grand_t, sigma, None) * norm / (kf * kf);

    let mut parts = (
        mean_a2 - grand2,
        mean_b2 - grand2,
        mean_m2 - mean_a2 - mean_b2 + grand2,
    );
    let mut parts_t = (
        mean_at2 - grand_t2,
        mean_bt2 - grand_t2,
        mean_mt2 - mean_at2 - mean_bt2 + grand_t2,
    );
    if unbiased {
        parts = random_effects(parts.0, parts.1, parts.2, kg);
        parts_t = random_effects(parts_t.0, parts_t.1, parts_t.2, kg);
    }
    let v_s = scale * parts.0;
    let v_i = scale * parts.1;
    let v_si = scale * parts.2;
    let v_sl = c.sigma2 * parts_t.0;
    let v_sli = c.sigma2 * parts_t.2;

    Ok(RunFunctionals {
        mse,
        bias2,
        variance,
        sigma_label: label,
        sigma_sample: v_s + v_si,
        sigma_init: v_i,
        v_s,
        v_i,
        v_sl,
        v_si,
        v_sli,
    })
}

pub(crate) fn functionals_in(c: &SimConfig) -> Result<FunctionalEstimates> {
    if c.k_grid < 2 {
        return Err(Error::Config(format!(
            "k_grid must be at least 2 for the ANOVA terms (got {})",
            c.k_grid
        )));
    }
    if c.k_outer < 2 {
        return Err(Error::Config(format!(
            "k_outer must be at least 2 for bias and variance (got {})",
            c.k_outer
        )));
    }
    if c.weight_draw != WeightDraw::Haar {
        return Err(Error::Config("the functional estimators need Haar weights".into()));
    }
    let slope = linear_slope(&c.activation).ok_or_else(|| {
        Error::Config(format!(
            "functional estimators need a linear activation (got {}); use the direct MSE estimator",
            c.activation.name()
        ))
    })?;
    let sigma = population_covariance(&c.data_law, c.d);
    let per_run = (0..c.runs as u64)
        .into_par_iter()
        .map(|r| run_functionals(c, slope, sigma.as_ref(), r))
        .collect::<Result<Vec<_>>>()?;
    Ok(FunctionalEstimates::from_runs(per_run, c))
}

/// MSE, bias, variance, the label-sample-init terms and the five nonzero
/// ANOVA components of a linear network.
///
/// Bias, variance and MSE use `k_outer` i.i.d. `(X, W)` pairs; the ANOVA
/// components use the `k_grid × k_grid` cross product of independent `Xᵢ`
/// and `Wⱼ`. For AR-1 data every squared norm `‖A‖²` is replaced by
/// `tr(AᵀΣA)`.
pub fn estimate_functionals(config: &SimConfig) -> Result<FunctionalEstimates> {
    config.validate()?;
    config.pool()?.install(|| functionals_in(config))
}
