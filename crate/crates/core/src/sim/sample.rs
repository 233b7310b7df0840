use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DataLaw, IidLaw};
use crate::error::{Error, Result};

/// Haar-distributed `p×d` matrix with orthonormal rows.
///
/// QR of a `d×p` standard Gaussian matrix, with the signs of `R`'s diagonal
/// moved into `Q` so the factorization is unique (otherwise `Q` is not Haar),
/// then transposed.
pub fn sample_orthogonal<R: Rng + ?Sized>(d: usize, p: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if p == 0 || p > d {
        return Err(Error::Dimension(format!("need 1 <= p <= d, got p = {p}, d = {d}")));
    }
    let g = DMatrix::from_fn(d, p, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        if r_diag[k] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(q.transpose())
}

fn draw<R: Rng + ?Sized>(law: &DataLaw, rng: &mut R) -> f64 {
    match law {
        DataLaw::Iid(IidLaw::Rademacher) => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        DataLaw::Iid(IidLaw::Uniform) => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
        DataLaw::Gaussian | DataLaw::Ar1(_) => StandardNormal.sample(rng),
    }
}

fn check_law(law: &DataLaw) -> Result<()> {
    if let DataLaw::Ar1(r) = law {
        if !(r.abs() < 1.0) {
            return Err(Error::Factorization(format!(
                "AR-1 covariance is not positive definite for r = {r} (need |r| < 1)"
            )));
        }
    }
    Ok(())
}

/// `n×d` design with i.i.d. rows from `law`.
///
/// AR-1 rows are `L z` with `L` the Cholesky factor of the Toeplitz matrix
/// `Σ(r)`; for this matrix `L z` is the recursion
/// `x₁ = z₁`, `xₖ = r xₖ₋₁ + √(1−r²) zₖ`, applied here in `O(nd)`.
pub fn sample_data<R: Rng + ?Sized>(law: &DataLaw, n: usize, d: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    check_law(law)?;
    let mut x = DMatrix::from_fn(n, d, |_, _| draw(law, rng));
    if let DataLaw::Ar1(r) = *law {
        let s = (1.0 - r * r).sqrt();
        for k in 1..d {
            let (prev, mut cur) = x.columns_range_pair_mut(k - 1, k);
            cur.zip_apply(&prev, |c, p| *c = r * p + s * *c);
        }
    }
    Ok(x)
}

/// A single test point from `law`.
pub fn sample_vector<R: Rng + ?Sized>(law: &DataLaw, d: usize, rng: &mut R) -> Result<DVector<f64>> {
    let row = sample_data(law, 1, d, rng)?;
    Ok(DVector::from_iterator(d, row.iter().copied()))
}

/// `Σ(r)ᵢⱼ = r^{|i−j|}`.
pub fn ar1_covariance(r: f64, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| r.powi((i as i32 - j as i32).abs()))
}
