//! The Gauss-Newton iteration: residual problems, the step map, full solve
//! runs with traces, linearization error and a finite-difference Jacobian
//! check.
//!
//! The step is the pure Gauss-Newton step — the exact least-squares solution
//! of the linearized problem, computed by orthogonal factorization of the
//! Jacobian (never by forming `J^T J`). No damping, line search or
//! regularization.

use std::io::{self, Write};

use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, Vector};

/// Stationarity tolerance for declared solutions: `||F'(x*)^T F(x*)||` must
/// not exceed this at construction time.
pub const STATIONARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProblemError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("residual/Jacobian evaluation returned a non-finite value at the domain center")]
    NonFinite,
    #[error("declared solution is outside the problem domain")]
    SolutionOutsideDomain,
    #[error("declared solution is not stationary: ||J^T F|| = {grad_norm:.6e} > {tol:.6e}")]
    NotStationary { grad_norm: f64, tol: f64 },
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("missing or invalid parameter: {0}")]
    BadParameter(String),
    #[error("offline refinement of the solution failed: {0}")]
    RefinementFailed(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type ResidualFn = Box<dyn Fn(&Vector) -> Vector + Send + Sync>;
type JacobianFn = Box<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// An evaluatable residual map `F : Omega in R^n -> R^m` (m >= n) with its
/// Jacobian, an optional known solution, and a ball-shaped domain.
pub struct ResidualProblem {
    name: String,
    n: usize,
    m: usize,
    f: ResidualFn,
    jac: JacobianFn,
    x_star: Option<Vector>,
    domain_center: Vector,
    domain_radius: f64,
}

impl std::fmt::Debug for ResidualProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResidualProblem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("domain_radius", &self.domain_radius)
            .field("has_solution", &self.x_star.is_some())
            .finish()
    }
}

impl ResidualProblem {
    /// Builds a problem and validates shapes by evaluating at the domain
    /// center. `domain_radius` may be `f64::INFINITY`.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        f: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
        domain_center: Vector,
        domain_radius: f64,
    ) -> Result<Self, ProblemError> {
        if n < 1 || m < n {
            return Err(ProblemError::InvalidDimensions(format!(
                "need 1 <= n <= m, got n = {n}, m = {m}"
            )));
        }
        if domain_center.len() != n {
            return Err(ProblemError::InvalidDimensions(format!(
                "domain center has dimension {}, expected {n}",
                domain_center.len()
            )));
        }
        let problem = ResidualProblem {
            name: name.into(),
            n,
            m,
            f: Box::new(f),
            jac: Box::new(jac),
            x_star: None,
            domain_center,
            domain_radius,
        };
        let fval = problem.residual(&problem.domain_center);
        let jval = problem.jacobian(&problem.domain_center);
        if fval.len() != m {
            return Err(ProblemError::InvalidDimensions(format!(
                "residual has length {}, expected {m}",
                fval.len()
            )));
        }
        if jval.shape() != (m, n) {
            return Err(ProblemError::InvalidDimensions(format!(
                "Jacobian has shape {:?}, expected ({m}, {n})",
                jval.shape()
            )));
        }
        if fval.iter().any(|v| !v.is_finite()) || jval.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite);
        }
        Ok(problem)
    }

    /// Attaches a known solution, validating that it lies in the domain and
    /// is stationary: `||F'(x*)^T F(x*)|| <= STATIONARITY_TOL`.
    pub fn with_solution(mut self, x_star: Vector) -> Result<Self, ProblemError> {
        if x_star.len() != self.n {
            return Err(ProblemError::InvalidDimensions(format!(
                "solution has dimension {}, expected {}",
                x_star.len(),
                self.n
            )));
        }
        if !self.in_domain(&x_star) {
            return Err(ProblemError::SolutionOutsideDomain);
        }
        let grad_norm = self.gradient(&x_star).norm();
        if grad_norm > STATIONARITY_TOL {
            return Err(ProblemError::NotStationary {
                grad_norm,
                tol: STATIONARITY_TOL,
            });
        }
        self.x_star = Some(x_star);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn residual_dim(&self) -> usize {
        self.m
    }

    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }

    pub fn domain_center(&self) -> &Vector {
        &self.domain_center
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn residual(&self, x: &Vector) -> Vector {
        (self.f)(x)
    }

    pub fn jacobian(&self, x: &Vector) -> Matrix {
        (self.jac)(x)
    }

    /// `F'(x)^T F(x)`, the gradient of the half squared residual norm.
    pub fn gradient(&self, x: &Vector) -> Vector {
        self.jacobian(x).transpose() * self.residual(x)
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        (x - &self.domain_center).norm() < self.domain_radius
    }

    /// Radius of the largest ball around the solution contained in the
    /// domain; `None` when no solution is attached.
    pub fn radius_around_solution(&self) -> Option<f64> {
        let x_star = self.x_star.as_ref()?;
        if self.domain_radius.is_finite() {
            Some(self.domain_radius - (x_star - &self.domain_center).norm())
        } else {
            Some(f64::INFINITY)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Gradient norm reached the stopping tolerance.
    Converged,
    /// Iteration budget exhausted (also how cycles surface; cycle detection
    /// is performed downstream).
    MaxIters,
    /// An iterate left the divergence ball `||x - center|| > divergence_radius`.
    Diverged,
    /// The Jacobian lost full column rank at an iterate.
    RankDeficient,
    /// An iterate left the problem domain.
    LeftDomain,
}

/// Options for [`solve`]. `None` tolerances select the defaults:
/// `grad_tol = 1e-12 * (1 + ||F(x0)||)` and
/// `divergence_radius = 1e3 * max(1, ||x0||)`.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub grad_tol: Option<f64>,
    pub divergence_radius: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 100,
            grad_tol: None,
            divergence_radius: None,
        }
    }
}

/// Full record of a Gauss-Newton run: iterates, per-iterate errors (when the
/// solution is known), residual and gradient norms, and the final status.
#[derive(Debug, Clone)]
pub struct IterateTrace {
    pub iterates: Vec<Vector>,
    pub errors: Option<Vec<f64>>,
    pub residual_norms: Vec<f64>,
    pub gradient_norms: Vec<f64>,
    pub status: SolveStatus,
}

impl IterateTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// Number of Gauss-Newton steps actually taken.
    pub fn steps(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.errors.as_ref().and_then(|e| e.last().copied())
    }

    pub fn final_gradient_norm(&self) -> f64 {
        *self.gradient_norms.last().expect("trace is never empty")
    }

    /// Writes the trace as CSV: `iter,x0..x{n-1},error,residual_norm,gradient_norm`.
    /// The error column is empty when no solution is known.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.iterates.first().map_or(0, |x| x.len());
        write!(w, "iter")?;
        for i in 0..n {
            write!(w, ",x{i}")?;
        }
        writeln!(w, ",error,residual_norm,gradient_norm")?;
        for (k, x) in self.iterates.iter().enumerate() {
            write!(w, "{k}")?;
            for v in x.iter() {
                write!(w, ",{v}")?;
            }
            match &self.errors {
                Some(errs) => write!(w, ",{}", errs[k])?,
                None => write!(w, ",")?,
            }
            writeln!(w, ",{},{}", self.residual_norms[k], self.gradient_norms[k])?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("CSV is valid UTF-8")
    }
}

/// Exact least-squares solve `min ||J s - f||` via SVD, with a rank check.
fn least_squares_solve(j: &Matrix, f: &Vector) -> Result<Vector, LinalgError> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let tol = linalg::rank_tolerance(j.nrows(), j.ncols(), smax);
    if smin.is_nan() || smin <= tol {
        return Err(LinalgError::RankDeficient {
            sigma_min: smin,
            tol,
        });
    }
    let sol = svd.solve(f, 0.0).expect("svd computed with u and v_t");
    Ok(Vector::from_column_slice(sol.as_slice()))
}

/// One Gauss-Newton step: `x - [F'(x)^T F'(x)]^{-1} F'(x)^T F(x)`, computed
/// as the exact least-squares step from the factorized Jacobian.
pub fn gn_step(problem: &ResidualProblem, x: &Vector) -> Result<Vector, LinalgError> {
    let j = problem.jacobian(x);
    let f = problem.residual(x);
    let step = least_squares_solve(&j, &f)?;
    Ok(x - step)
}

/// Runs Gauss-Newton from `x0` until the gradient stopping rule fires, the
/// iteration budget is exhausted, an iterate leaves the domain or divergence
/// ball, or the Jacobian loses rank. All failure modes are trace statuses,
/// not errors.
pub fn solve(problem: &ResidualProblem, x0: &Vector, opts: &SolveOptions) -> IterateTrace {
    let grad_tol = opts
        .grad_tol
        .unwrap_or_else(|| 1e-12 * (1.0 + problem.residual(x0).norm()));
    let divergence_radius = opts
        .divergence_radius
        .unwrap_or_else(|| 1e3 * x0.norm().max(1.0));

    let mut iterates = Vec::new();
    let mut errors = problem.x_star().map(|_| Vec::new());
    let mut residual_norms = Vec::new();
    let mut gradient_norms = Vec::new();

    let mut x = x0.clone();
    let status = loop {
        let f = problem.residual(&x);
        let j = problem.jacobian(&x);
        let g = j.transpose() * &f;
        iterates.push(x.clone());
        residual_norms.push(f.norm());
        gradient_norms.push(g.norm());
        if let (Some(errs), Some(x_star)) = (errors.as_mut(), problem.x_star()) {
            errs.push((&x - x_star).norm());
        }

        if g.norm() <= grad_tol {
            break SolveStatus::Converged;
        }
        if iterates.len() > opts.max_iters {
            break SolveStatus::MaxIters;
        }
        let step = match least_squares_solve(&j, &f) {
            Ok(s) => s,
            Err(LinalgError::RankDeficient { .. }) => break SolveStatus::RankDeficient,
        };
        let x_next = &x - step;
        if !problem.in_domain(&x_next) {
            break SolveStatus::LeftDomain;
        }
        if (&x_next - problem.domain_center()).norm() > divergence_radius {
            break SolveStatus::Diverged;
        }
        x = x_next;
    };

    IterateTrace {
        iterates,
        errors,
        residual_norms,
        gradient_norms,
        status,
    }
}

/// `||E_F(x, y)|| = ||F(y) - F(x) - F'(x)(y - x)||`, the norm of the
/// linearization error of `F` at `x` evaluated at `y`.
pub fn linearization_error(problem: &ResidualProblem, x: &Vector, y: &Vector) -> f64 {
    let fx = problem.residual(x);
    let fy = problem.residual(y);
    let jx = problem.jacobian(x);
    (fy - fx - jx * (y - x)).norm()
}

/// Central finite-difference check of the analytic Jacobian at `x` with step
/// `h`; returns the maximum componentwise deviation.
pub fn check_jacobian(problem: &ResidualProblem, x: &Vector, h: f64) -> f64 {
    let j = problem.jacobian(x);
    let mut worst = 0.0_f64;
    for col in 0..problem.dim() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[col] += h;
        xm[col] -= h;
        let d = (problem.residual(&xp) - problem.residual(&xm)) / (2.0 * h);
        for row in 0..problem.residual_dim() {
            worst = worst.max((d[row] - j[(row, col)]).abs());
        }
    }
    worst
}
