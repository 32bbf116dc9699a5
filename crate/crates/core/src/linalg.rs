//! Dense real linear algebra: spectral norms, singular values, the full-rank
//! Moore-Penrose pseudo-inverse, and numeric verification of the classical
//! pseudo-inverse perturbation bounds.
//!
//! Everything here is a pure function of its inputs and safe to call
//! concurrently. Sizes are desk scale (a few hundred rows at most), so all
//! storage is dense and all factorizations are direct.

use thiserror::Error;

/// Dense real matrix. Row-major construction via `Matrix::from_row_slice`.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real vector.
pub type Vector = nalgebra::DVector<f64>;

/// Relative slack applied when checking analytic inequalities in floating
/// point: `lhs <= rhs` passes iff `lhs <= rhs * (1 + slack) + ABS_SLACK`.
pub const BOUND_REL_SLACK: f64 = 1e-9;
const ABS_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    /// The smallest singular value fell at or below the numerical rank
    /// tolerance; for Jacobians this signals that `F'` lost full column rank.
    #[error(
        "matrix is numerically rank deficient (sigma_min = {sigma_min:.6e} <= tol = {tol:.6e})"
    )]
    RankDeficient { sigma_min: f64, tol: f64 },
}

/// Numerical rank tolerance `max(m, n) * eps * sigma_max`.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// All singular values of `a`, sorted in decreasing order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let svd = a.clone().svd(false, false);
    svd.singular_values.iter().copied().collect()
}

/// Largest singular value of `a` (the operator 2-norm).
pub fn spectral_norm(a: &Matrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of `a`. Requires `a.nrows() >= a.ncols()` so that
/// full rank means full column rank.
pub fn min_singular_value(a: &Matrix) -> f64 {
    assert!(a.nrows() >= a.ncols(), "min_singular_value expects m >= n");
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Moore-Penrose pseudo-inverse of a full-column-rank `a` (m >= n), computed
/// from the SVD rather than the normal equations.
///
/// Returns [`LinalgError::RankDeficient`] when the smallest singular value is
/// at or below [`rank_tolerance`].
pub fn pseudoinverse(a: &Matrix) -> Result<Matrix, LinalgError> {
    assert!(a.nrows() >= a.ncols(), "pseudoinverse expects m >= n");
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let tol = rank_tolerance(a.nrows(), a.ncols(), smax);
    if smin.is_nan() || smin <= tol {
        return Err(LinalgError::RankDeficient {
            sigma_min: smin,
            tol,
        });
    }
    let u = svd.u.expect("svd with u requested");
    let v_t = svd.v_t.expect("svd with v_t requested");
    // A^+ = V S^{-1} U^T, assembled by scaling the rows of U^T.
    let mut ut = u.transpose();
    for (i, s) in svd.singular_values.iter().enumerate() {
        for v in ut.row_mut(i).iter_mut() {
            *v /= s;
        }
    }
    Ok(v_t.transpose() * ut)
}

/// Outcome of a single inequality check: `lhs <= rhs` up to roundoff slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        BoundCheck {
            lhs,
            rhs,
            satisfied: lhs <= rhs * (1.0 + BOUND_REL_SLACK) + ABS_SLACK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    /// The smallness condition `||A^+|| ||E|| < 1` held and both bounds were
    /// evaluated.
    Checked,
    /// `||A^+|| ||E|| >= 1`; the perturbation bounds say nothing.
    NotApplicable,
}

/// Report from [`check_perturbation_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `||A^+|| * ||E||`, the smallness product gating both bounds.
    pub product: f64,
    pub status: BoundStatus,
    /// `||B^+|| <= ||A^+|| / (1 - ||A^+|| ||E||)` with `B = A + E`.
    pub norm_bound: Option<BoundCheck>,
    /// `||B^+ - A^+|| <= sqrt(2) ||A^+||^2 ||E|| / (1 - ||A^+|| ||E||)`.
    pub diff_bound: Option<BoundCheck>,
}

/// Numerically checks the two pseudo-inverse perturbation inequalities for
/// `B = A + E` when `A` has full column rank and `||A^+|| ||E|| < 1`.
///
/// When the smallness product is >= 1 the report carries
/// [`BoundStatus::NotApplicable`] instead of an error. A rank-deficient `B`
/// despite the satisfied precondition is reported as
/// [`LinalgError::RankDeficient`] since it signals a tolerance breach.
pub fn check_perturbation_bounds(a: &Matrix, e: &Matrix) -> Result<BoundReport, LinalgError> {
    assert_eq!(a.shape(), e.shape(), "A and E must have the same shape");
    let a_pinv = pseudoinverse(a)?;
    let a_pinv_norm = spectral_norm(&a_pinv);
    let e_norm = spectral_norm(e);
    let product = a_pinv_norm * e_norm;
    if product >= 1.0 {
        return Ok(BoundReport {
            product,
            status: BoundStatus::NotApplicable,
            norm_bound: None,
            diff_bound: None,
        });
    }
    let b = a + e;
    let b_pinv = pseudoinverse(&b)?;
    let b_pinv_norm = spectral_norm(&b_pinv);
    let denom = 1.0 - product;
    let norm_bound = BoundCheck::new(b_pinv_norm, a_pinv_norm / denom);
    let diff_norm = spectral_norm(&(&b_pinv - &a_pinv));
    let diff_bound = BoundCheck::new(
        diff_norm,
        std::f64::consts::SQRT_2 * a_pinv_norm * a_pinv_norm * e_norm / denom,
    );
    Ok(BoundReport {
        product,
        status: BoundStatus::Checked,
        norm_bound: Some(norm_bound),
        diff_bound: Some(diff_bound),
    })
}
