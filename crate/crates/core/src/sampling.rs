//! Seeded sampling helpers shared by the validation machinery and tests.
//!
//! All randomness in the crate flows through [`rand_chacha::ChaCha8Rng`] so
//! that every report is reproducible from a single `u64` seed.

use crate::linalg::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Deterministic generator for the given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random unit vector, uniform on the sphere.
pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Uniform sample from the open ball of the given radius around `center`.
pub fn point_in_ball(rng: &mut ChaCha8Rng, center: &Vector, radius: f64) -> Vector {
    let dim = center.len();
    let dir = unit_vector(rng, dim);
    let u: f64 = rng.random_range(0.0..1.0);
    let r = radius * u.powf(1.0 / dim as f64);
    center + dir * r
}

/// Matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random m x n matrix (m >= n) with singular values drawn uniformly from
/// `[sigma_min, sigma_max]`, built as Q1 * S * Q2^T from QR factors of
/// Gaussian matrices. Gives full control over conditioning.
pub fn matrix_with_conditioning(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    sigma_min: f64,
    sigma_max: f64,
) -> Matrix {
    assert!(rows >= cols && cols >= 1);
    let q1 = gaussian_matrix(rng, rows, rows).qr().q();
    let q2 = gaussian_matrix(rng, cols, cols).qr().q();
    let mut s = Matrix::zeros(rows, cols);
    for i in 0..cols {
        s[(i, i)] = if i == 0 {
            sigma_max
        } else if i == cols - 1 {
            sigma_min
        } else {
            rng.random_range(sigma_min..sigma_max)
        };
    }
    q1 * s * q2.transpose()
}

/// Random full-rank `A` plus perturbation `E` scaled so that
/// `||A^+|| ||E|| < max_product`. Used for the perturbation-lemma trials.
pub fn perturbation_pair(rng: &mut ChaCha8Rng, max_product: f64) -> (Matrix, Matrix) {
    let m = rng.random_range(2..8usize);
    let n = rng.random_range(1..=m);
    let a = matrix_with_conditioning(rng, m, n, 0.5, 5.0);
    let a_pinv_norm = 1.0 / crate::linalg::min_singular_value(&a);
    let e_raw = gaussian_matrix(rng, m, n);
    let e_norm = crate::linalg::spectral_norm(&e_raw);
    let target: f64 = rng.random_range(0.0..max_product);
    let scale = if e_norm > 0.0 {
        target / (a_pinv_norm * e_norm)
    } else {
        0.0
    };
    (a, e_raw * scale)
}
