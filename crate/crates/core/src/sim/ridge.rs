use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::activation::{ActivationKind, ActivationSpec};
use crate::error::{ensure_positive, Error, Result};

/// `σ(XWᵀ)`, `n×p`.
pub(crate) fn features(x: &DMatrix<f64>, w: &DMatrix<f64>, act: &ActivationSpec) -> DMatrix<f64> {
    features_t(x, &w.transpose(), act)
}

/// [`features`] from a stored `Wᵀ`.
pub(crate) fn features_t(x: &DMatrix<f64>, wt: &DMatrix<f64>, act: &ActivationSpec) -> DMatrix<f64> {
    let mut z = x * wt;
    if !act.is_identity() {
        z.apply(|v| *v = act.apply(*v));
    }
    z
}

/// Slope `k` of a linear activation `σ(x) = kx`.
pub(crate) fn linear_slope(act: &ActivationSpec) -> Option<f64> {
    match act.kind {
        ActivationKind::Identity => Some(1.0),
        ActivationKind::ScaledLinear(k) => Some(k),
        _ => None,
    }
}

fn spd_factor(mut a: DMatrix<f64>, lambda: f64, what: &str) -> Result<Cholesky<f64, Dyn>> {
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    Cholesky::new(a).ok_or_else(|| Error::Factorization(format!("{what} is not numerically positive definite")))
}

/// `C = (ZᵀZ/n + λI_p)⁻¹Zᵀ/n`, `p×n`, so that `β̂ = CY`. Solves the `p×p`
/// system when `p ≤ n` and the equivalent `n×n` system `Zᵀ(ZZᵀ/n + λI_n)⁻¹/n`
/// otherwise.
pub(crate) fn ridge_operator(z: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let (n, p) = z.shape();
    let nf = n as f64;
    let zt = z.transpose();
    if p <= n {
        let chol = spd_factor(&zt * z / nf, lambda, "feature Gram matrix")?;
        let mut c = zt / nf;
        chol.solve_mut(&mut c);
        Ok(c)
    } else {
        let chol = spd_factor(z * &zt / nf, lambda, "kernel matrix")?;
        let mut s = z / nf;
        chol.solve_mut(&mut s);
        Ok(s.transpose())
    }
}

/// `β̂ = (ZᵀZ/n + λI)⁻¹ZᵀY/n` without forming the full operator.
pub(crate) fn ridge_coefficients(z: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let (n, p) = z.shape();
    let nf = n as f64;
    let zt = z.transpose();
    if p <= n {
        let chol = spd_factor(&zt * z / nf, lambda, "feature Gram matrix")?;
        let mut b = &zt * y / nf;
        chol.solve_mut(&mut b);
        Ok(b)
    } else {
        let chol = spd_factor(z * &zt / nf, lambda, "kernel matrix")?;
        let mut a = y / nf;
        chol.solve_mut(&mut a);
        Ok(zt * a)
    }
}

fn check_shapes(x: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<()> {
    if x.ncols() != w.ncols() {
        return Err(Error::Dimension(format!(
            "X has {} columns but W has {}",
            x.ncols(),
            w.ncols()
        )));
    }
    if w.nrows() > w.ncols() {
        return Err(Error::Dimension(format!("W is {}x{}: need p <= d", w.nrows(), w.ncols())));
    }
    Ok(())
}

/// Second-layer ridge coefficients `β̂ = (σ(WXᵀ)σ(XWᵀ)/n + λI_p)⁻¹σ(WXᵀ)Y/n`.
pub fn ridge_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    w: &DMatrix<f64>,
    lambda: f64,
    act: &ActivationSpec,
) -> Result<DVector<f64>> {
    ensure_positive("lambda", lambda)?;
    check_shapes(x, w)?;
    if y.len() != x.nrows() {
        return Err(Error::Dimension(format!("Y has {} entries but X has {} rows", y.len(), x.nrows())));
    }
    ridge_coefficients(&features(x, w, act), y, lambda)
}

/// The linear maps of a fitted linear network: `f̂(x) = xᵀ(Mθ + M̃ε)`.
#[derive(Debug, Clone)]
pub struct RidgeSnapshot {
    /// `M = M̃X`, `d×d`.
    pub m: DMatrix<f64>,
    /// `M̃ = WᵀRσ(WXᵀ)/n` scaled by the activation slope, `d×n`.
    pub m_tilde: DMatrix<f64>,
    /// `R = (σ(WXᵀ)σ(XWᵀ)/n + λI_p)⁻¹`, `p×p`.
    pub resolvent: DMatrix<f64>,
    pub n: usize,
    pub d: usize,
    pub p: usize,
}

/// Snapshot for a linear activation `σ(x) = kx`.
pub fn ridge_snapshot(x: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64, act: &ActivationSpec) -> Result<RidgeSnapshot> {
    ensure_positive("lambda", lambda)?;
    check_shapes(x, w)?;
    let k = linear_slope(act)
        .ok_or_else(|| Error::Config("M and M~ are defined only for linear activations".into()))?;
    let z = features(x, w, act);
    let (n, p) = z.shape();
    let c = ridge_operator(&z, lambda)? * k;
    let m_tilde = w.transpose() * c;
    let m = &m_tilde * x;
    let resolvent = spd_factor(z.transpose() * &z / n as f64, lambda, "feature Gram matrix")?.inverse();
    Ok(RidgeSnapshot {
        m,
        m_tilde,
        resolvent,
        n,
        d: x.ncols(),
        p,
    })
}
