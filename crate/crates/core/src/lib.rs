//! Gauss-Newton for nonlinear least squares, paired with a certification
//! engine that turns a scalar majorant function into guaranteed convergence
//! and uniqueness radii and then cross-checks every bound numerically.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`] — dense spectral norms, singular values and the full-rank
//!   Moore-Penrose pseudo-inverse, plus numeric checks of the classical
//!   pseudo-inverse perturbation inequalities.
//! * [`majorant`] — scalar majorant functions and all radius/coefficient
//!   computations (nu, rho, sigma, the per-iteration error coefficients),
//!   with closed-form Lipschitz and Smale instantiations.
//! * [`solver`] — the pure Gauss-Newton iteration with full traces.
//! * [`problems`] — a small suite of residual problems with known solutions
//!   spanning the zero-, small- and large-residual regimes.
//! * [`certify`] — end-to-end certificates for concrete problems and the
//!   empirical validation machinery (radius probing, uniqueness probe,
//!   worst-case cycle construction, convergence-order fitting).
//! * [`suite`] — the registry-wide validation battery used by the CLI and
//!   the acceptance tests.
//!
//! All operator norms are spectral (2-)norms; certificates are norm-dependent
//! and record that convention.

pub mod certify;
pub mod linalg;
pub mod majorant;
pub mod problems;
pub mod sampling;
pub mod solver;
pub mod suite;

pub use linalg::{Matrix, Vector};
