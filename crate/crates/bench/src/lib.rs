//! Shared inputs for the benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ridge_anova::sim::{sample_data, sample_orthogonal, DataLaw};

/// Gaussian design `X` (`n×d`), responses and Haar weights (`p×d`).
pub fn ridge_problem(n: usize, d: usize, p: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = sample_data(&DataLaw::Gaussian, n, d, &mut rng).expect("valid sizes");
    let w = sample_orthogonal(d, p, &mut rng).expect("p <= d");
    let theta = DVector::from_fn(d, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 } / (d as f64).sqrt());
    let y = &x * theta;
    (x, y, w)
}
