//! End-to-end certification: compute the problem constants at a known
//! solution, derive the guaranteed radii from a majorant, and cross-validate
//! everything numerically — the majorant condition by sampling, the
//! per-iteration error bound along real traces, the empirical convergence
//! radius by bisection, the worst-case cycle construction, and a multistart
//! uniqueness probe.

pub mod report;

use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, Vector};
use crate::majorant::{
    self, lipschitz_majorant, MajorantError, MajorantFunction, ProblemConstants, Q2Coefficients,
    RadiusSet,
};
use crate::problems::KnownConstants;
use crate::sampling;
use crate::solver::{
    linearization_error, solve, IterateTrace, ProblemError, ResidualProblem, SolveOptions,
    SolveStatus,
};

use rand::Rng;

/// A run "converges back to the solution" when it reports `Converged` and
/// the final error is below this.
pub const CONVERGED_ERROR_TOL: f64 = 1e-8;
/// Margin tolerance for the sampled majorant-condition check.
pub const MAJORANT_MARGIN_TOL: f64 = 1e-10;
/// Converged stationary points closer than this are one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Relative slack for sampled operator/Taylor bound checks.
pub const OPERATOR_BOUND_SLACK: f64 = 1e-9;
/// Inflation applied to sampled Lipschitz estimates.
pub const LIPSCHITZ_INFLATION: f64 = 1.05;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CertifyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

/// Where the certified majorant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorantSource {
    /// Supplied explicitly by the caller.
    Supplied,
    /// Taken from the problem registry's exact constants.
    Registry,
    /// Lipschitz constant estimated by sampling Jacobian differences.
    Estimated,
}

impl MajorantSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            MajorantSource::Supplied => "supplied",
            MajorantSource::Registry => "registry",
            MajorantSource::Estimated => "estimated",
        }
    }
}

/// All constants of the convergence certificate for one problem. Norms are
/// spectral throughout. `majorant` is `None` only for the affine
/// special case, which is certified unconditionally (one exact step from
/// anywhere in the domain, globally unique stationary point).
#[derive(Debug, Clone)]
pub struct Certificate {
    pub problem: String,
    pub constants: ProblemConstants,
    pub radii: RadiusSet,
    pub majorant: Option<MajorantFunction>,
    pub majorant_source: MajorantSource,
}

impl Certificate {
    pub fn is_unconditional(&self) -> bool {
        self.majorant.is_none()
    }

    /// Error-bound coefficients anchored at `t0 in (0, rho)`. Unconditional
    /// (affine) certificates return exact zeros: one step lands on the
    /// solution.
    pub fn q2_at(&self, t0: f64) -> Result<Q2Coefficients, MajorantError> {
        match &self.majorant {
            None => Ok(Q2Coefficients {
                quad: 0.0,
                lin: 0.0,
            }),
            Some(f) => majorant::q2_coefficients(f, self.constants.beta, self.constants.c, t0),
        }
    }

    /// Tabulates the coefficients at `rows` anchors evenly spaced in `(0, r)`.
    pub fn q2_table(&self, rows: usize) -> Vec<(f64, Q2Coefficients)> {
        let mut table = Vec::with_capacity(rows);
        for j in 1..=rows {
            let t0 = self.radii.r * j as f64 / (rows + 1) as f64;
            if let Ok(q) = self.q2_at(t0) {
                table.push((t0, q));
            }
        }
        table
    }
}

fn require_solution(problem: &ResidualProblem) -> Result<&Vector, CertifyError> {
    problem.x_star().ok_or_else(|| {
        CertifyError::PreconditionViolated(format!(
            "problem '{}' has no known solution",
            problem.name()
        ))
    })
}

fn constants_at_solution(
    problem: &ResidualProblem,
    kappa: f64,
) -> Result<ProblemConstants, CertifyError> {
    let x_star = require_solution(problem)?;
    let c = problem.residual(x_star).norm();
    let j_star = problem.jacobian(x_star);
    let svals = linalg::singular_values(&j_star);
    let smax = svals[0];
    let smin = *svals.last().expect("jacobian is nonempty");
    let tol = linalg::rank_tolerance(j_star.nrows(), j_star.ncols(), smax);
    if smin.is_nan() || smin <= tol {
        return Err(LinalgError::RankDeficient {
            sigma_min: smin,
            tol,
        }
        .into());
    }
    let beta = 1.0 / smin;
    Ok(ProblemConstants::from_beta(c, beta, kappa))
}

/// Builds the full certificate: `c`, `beta`, `beta0` at the solution,
/// `kappa = min(domain radius around x*, R)`, and the radii from the
/// bisection pipeline. Fails with `H3Violated` in the large-residual regime
/// and `RankDeficient` when `F'(x*)` loses full rank.
pub fn build_certificate(
    problem: &ResidualProblem,
    majorant: MajorantFunction,
    source: MajorantSource,
) -> Result<Certificate, CertifyError> {
    let kappa_dom = problem
        .radius_around_solution()
        .ok_or_else(|| CertifyError::PreconditionViolated("no known solution".into()))?;
    let kappa = kappa_dom.min(majorant.r_sup());
    let constants = constants_at_solution(problem, kappa)?;
    let radii = majorant::radius_set(&majorant, &constants)?;
    Ok(Certificate {
        problem: problem.name().to_string(),
        constants,
        radii,
        majorant: Some(majorant),
        majorant_source: source,
    })
}

/// Certificate for affine residuals (Jacobian Lipschitz constant 0): the
/// Gauss-Newton step is exact everywhere, so every radius equals the domain
/// radius and uniqueness is global in the domain.
pub fn build_certificate_unconditional(
    problem: &ResidualProblem,
) -> Result<Certificate, CertifyError> {
    let kappa = problem
        .radius_around_solution()
        .ok_or_else(|| CertifyError::PreconditionViolated("no known solution".into()))?;
    let constants = constants_at_solution(problem, kappa)?;
    Ok(Certificate {
        problem: problem.name().to_string(),
        constants,
        radii: RadiusSet {
            nu: kappa,
            rho: kappa,
            r: kappa,
            sigma: Some(kappa),
            h3_satisfied: true,
            h4_satisfied: true,
        },
        majorant: None,
        majorant_source: MajorantSource::Registry,
    })
}

/// How a certificate should be built for a registry problem.
#[derive(Debug)]
pub enum CertificationPlan {
    /// Affine residuals: no majorant needed.
    Unconditional,
    Majorant(MajorantFunction, MajorantSource),
}

/// Picks a certification plan from the registry's known constants: exact
/// `K = 0` goes unconditional, an exact `K > 0` becomes a Lipschitz majorant,
/// and an unknown `K` is estimated by sampling (inflated 5%).
pub fn plan_for(
    problem: &ResidualProblem,
    known: &KnownConstants,
    seed: u64,
) -> Result<CertificationPlan, CertifyError> {
    match known.lipschitz_k {
        Some(k) if k > 0.0 => Ok(CertificationPlan::Majorant(
            lipschitz_majorant(k, f64::INFINITY),
            MajorantSource::Registry,
        )),
        // Exact zero: affine residuals, certified unconditionally.
        Some(_) => Ok(CertificationPlan::Unconditional),
        None => {
            let radius = problem
                .radius_around_solution()
                .ok_or_else(|| CertifyError::PreconditionViolated("no known solution".into()))?
                .min(majorant::UNBOUNDED_CAP);
            let k = estimate_lipschitz(problem, radius, 2000, seed)?;
            Ok(CertificationPlan::Majorant(
                lipschitz_majorant(k, f64::INFINITY),
                MajorantSource::Estimated,
            ))
        }
    }
}

/// Builds a certificate according to a plan.
pub fn certify_with_plan(
    problem: &ResidualProblem,
    plan: CertificationPlan,
) -> Result<Certificate, CertifyError> {
    match plan {
        CertificationPlan::Unconditional => build_certificate_unconditional(problem),
        CertificationPlan::Majorant(f, source) => build_certificate(problem, f, source),
    }
}

/// Registry-driven certification: plan plus build in one call.
pub fn certify_auto(
    problem: &ResidualProblem,
    known: &KnownConstants,
    seed: u64,
) -> Result<Certificate, CertifyError> {
    let plan = plan_for(problem, known, seed)?;
    certify_with_plan(problem, plan)
}

/// Sampled Lipschitz estimate of the Jacobian over the ball of the given
/// radius around the solution, inflated by 5%.
///
/// Long-range pairs alone dilute the constant badly when the Jacobian's
/// variation concentrates near the ball boundary, so the estimate combines
/// `||J(x) - J(y)|| / ||x - y||` over random/radial/axis-aligned pairs with
/// short-range directional slopes at interior and boundary points (the sup
/// of the local slope is the Lipschitz constant on a convex set).
pub fn estimate_lipschitz(
    problem: &ResidualProblem,
    radius: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64, CertifyError> {
    fn pair_ratio(problem: &ResidualProblem, x: &Vector, y: &Vector) -> f64 {
        let d = (x - y).norm();
        if d > 1e-12 {
            linalg::spectral_norm(&(problem.jacobian(x) - problem.jacobian(y))) / d
        } else {
            0.0
        }
    }

    let x_star = require_solution(problem)?.clone();
    let r = radius * (1.0 - 1e-6);
    let mut rng = sampling::rng(seed);
    let mut max_ratio = 0.0_f64;
    let step = r * 1e-4;
    for i in 0..pairs / 2 {
        let x = sampling::point_in_ball(&mut rng, &x_star, r);
        let y = sampling::point_in_ball(&mut rng, &x_star, r);
        max_ratio = max_ratio.max(pair_ratio(problem, &x, &y));
        // Short probes alternate between interior points and the boundary
        // sphere, where the slope of a convex variation peaks.
        let probe = if i % 2 == 0 {
            x
        } else {
            let dir = sampling::unit_vector(&mut rng, problem.dim());
            &x_star + dir * (r * (1.0 - 2e-4))
        };
        for _ in 0..4 {
            let dir = sampling::unit_vector(&mut rng, problem.dim());
            let y = &probe + dir * step;
            if (&y - &x_star).norm() < radius {
                max_ratio = max_ratio.max(pair_ratio(problem, &probe, &y));
            }
        }
    }
    // Radial pairs through the solution and axis-aligned extremes; these
    // realize the constant for Jacobians affine in x.
    for _ in 0..pairs / 4 {
        let dir = sampling::unit_vector(&mut rng, problem.dim());
        let u: f64 = rng.random_range(0.1..1.0);
        let x = &x_star + &dir * (u * r);
        let y = &x_star - &dir * (u * r);
        max_ratio = max_ratio.max(pair_ratio(problem, &x, &y));
    }
    for dim in 0..problem.dim() {
        let mut x = x_star.clone();
        let mut y = x_star.clone();
        x[dim] += r * 0.999;
        y[dim] -= r * 0.999;
        max_ratio = max_ratio.max(pair_ratio(problem, &x, &y));
    }
    if max_ratio <= 0.0 {
        return Err(CertifyError::PreconditionViolated(
            "sampled Jacobian variation is zero; use the unconditional path".into(),
        ));
    }
    Ok(max_ratio * LIPSCHITZ_INFLATION)
}

/// Result of the sampled majorant-condition check.
#[derive(Debug, Clone, Copy)]
pub struct MajorantConditionCheck {
    pub pass: bool,
    /// Min over samples of `rhs - lhs`; negative means a violation.
    pub worst_margin: f64,
    pub samples: usize,
}

/// Samples `(x, tau)` with `x` uniform in the certified ball and `tau` in
/// `[0, 1]`, and checks
/// `||F'(x) - F'(x* + tau (x - x*))|| <= f'(||x - x*||) - f'(tau ||x - x*||)`.
pub fn verify_majorant_condition(
    problem: &ResidualProblem,
    majorant: &MajorantFunction,
    samples: usize,
    seed: u64,
) -> Result<MajorantConditionCheck, CertifyError> {
    let x_star = require_solution(problem)?.clone();
    let kappa_dom = problem.radius_around_solution().expect("solution present");
    let radius = kappa_dom.min(majorant.r_sup()).min(majorant::UNBOUNDED_CAP) * (1.0 - 1e-9);
    let mut rng = sampling::rng(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let x = sampling::point_in_ball(&mut rng, &x_star, radius);
        let t = (&x - &x_star).norm();
        if t == 0.0 {
            continue;
        }
        let tau: f64 = rng.random_range(0.0..=1.0);
        let mid = &x_star + (&x - &x_star) * tau;
        let lhs = linalg::spectral_norm(&(problem.jacobian(&x) - problem.jacobian(&mid)));
        let rhs = majorant.deriv(t) - majorant.deriv(tau * t);
        worst = worst.min(rhs - lhs);
    }
    Ok(MajorantConditionCheck {
        pass: worst >= -MAJORANT_MARGIN_TOL,
        worst_margin: worst,
        samples,
    })
}

/// Result of checking the per-iteration error bound along a trace.
#[derive(Debug, Clone)]
pub struct Q2Check {
    pub pass: bool,
    pub t0: f64,
    pub quad: f64,
    pub lin: f64,
    /// `rhs - e_{k+1}` per iteration; all must be nonnegative.
    pub margins: Vec<f64>,
}

/// Checks `e_{k+1} <= quad(t0) e_k^2 + lin(t0) e_k` along a trace started at
/// distance `t0 in (0, r)`, with multiplicative slack `1 + 1e-8` plus an
/// absolute floor of `1e-14 (1 + t0)` for errors at roundoff level.
pub fn verify_q2(trace: &IterateTrace, cert: &Certificate) -> Result<Q2Check, CertifyError> {
    let errors = trace.errors.as_ref().ok_or_else(|| {
        CertifyError::PreconditionViolated("trace has no error data (unknown solution)".into())
    })?;
    if errors.is_empty() {
        return Err(CertifyError::InsufficientData { needed: 1, got: 0 });
    }
    let t0 = errors[0];
    if t0 == 0.0 && errors.len() == 1 {
        // Started at the solution: nothing to check.
        return Ok(Q2Check {
            pass: true,
            t0,
            quad: 0.0,
            lin: 0.0,
            margins: Vec::new(),
        });
    }
    if !(t0 > 0.0 && t0 < cert.radii.r) {
        return Err(CertifyError::PreconditionViolated(format!(
            "x0 at distance {t0:.6e} is outside the certified ball of radius {:.6e}",
            cert.radii.r
        )));
    }
    let q = cert.q2_at(t0)?;
    let floor = 1e-14 * (1.0 + t0);
    let mut margins = Vec::with_capacity(errors.len().saturating_sub(1));
    for k in 0..errors.len() - 1 {
        let e = errors[k];
        let rhs = (q.quad * e * e + q.lin * e) * (1.0 + 1e-8) + floor;
        margins.push(rhs - errors[k + 1]);
    }
    Ok(Q2Check {
        pass: margins.iter().all(|m| *m >= 0.0),
        t0,
        quad: q.quad,
        lin: q.lin,
        margins,
    })
}

/// Per-direction empirical convergence radii.
#[derive(Debug, Clone)]
pub struct EmpiricalRadius {
    pub per_direction: Vec<f64>,
    pub min: f64,
}

/// For each seeded unit direction, bisects the largest `delta <= t_max` such
/// that a solve from `x* + delta d` converges back to `x*` (final error
/// below 1e-8). Returns `t_max` for a direction when even the endpoint
/// converges.
pub fn empirical_radius(
    problem: &ResidualProblem,
    directions: usize,
    t_max: f64,
    bisect_tol: f64,
    seed: u64,
) -> Result<EmpiricalRadius, CertifyError> {
    let x_star = require_solution(problem)?.clone();
    let opts = SolveOptions {
        max_iters: 200,
        ..SolveOptions::default()
    };
    let mut rng = sampling::rng(seed);
    let mut per_direction = Vec::with_capacity(directions);
    for _ in 0..directions {
        let dir = sampling::unit_vector(&mut rng, problem.dim());
        let converges = |delta: f64| -> bool {
            let x0 = &x_star + &dir * delta;
            if !problem.in_domain(&x0) {
                return false;
            }
            let trace = solve(problem, &x0, &opts);
            trace.status == SolveStatus::Converged
                && trace.final_error().expect("errors recorded") <= CONVERGED_ERROR_TOL
        };
        let radius = if converges(t_max) {
            t_max
        } else {
            let mut lo = 0.0_f64;
            let mut hi = t_max;
            while hi - lo > bisect_tol * hi {
                let mid = 0.5 * (lo + hi);
                if converges(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        per_direction.push(radius);
    }
    let min = per_direction.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EmpiricalRadius { per_direction, min })
}

/// The scalar worst-case problem induced by a majorant and `beta`:
///
/// `h(t) = -t/beta + t + f(t)` for `t >= 0` and `-t/beta + t - f(-t)` for
/// `t < 0`, with `x* = 0` and zero residual. Its Gauss-Newton iteration
/// started at `rho` alternates between `+rho` and `-rho`, which is what makes
/// `rho` the best possible convergence radius.
pub fn worst_case_problem(majorant: &MajorantFunction, beta: f64, kappa: f64) -> ResidualProblem {
    assert!(beta > 0.0, "beta must be > 0");
    let kappa_eff = kappa
        .min(majorant.r_sup() * (1.0 - 1e-9))
        .min(majorant::UNBOUNDED_CAP);
    let mf = majorant.clone();
    let mj = majorant.clone();
    ResidualProblem::new(
        "worst_case",
        1,
        1,
        move |x: &Vector| {
            let t = x[0];
            let v = if t >= 0.0 {
                -t / beta + t + mf.eval(t)
            } else {
                -t / beta + t - mf.eval(-t)
            };
            Vector::from_vec(vec![v])
        },
        move |x: &Vector| Matrix::from_row_slice(1, 1, &[-1.0 / beta + 1.0 + mj.deriv(x[0].abs())]),
        Vector::zeros(1),
        kappa_eff,
    )
    .expect("worst-case problem builds")
    .with_solution(Vector::zeros(1))
    .expect("h(0) = 0 with h'(0) = -1/beta is stationary")
}

/// Outcome of the worst-case cycle demonstration.
#[derive(Debug, Clone)]
pub struct CycleDemo {
    pub rho: f64,
    pub x0: f64,
    pub iterates: Vec<f64>,
    /// Period-2 cycle detected: `|x_{k+2} - x_k| < 1e-10` while
    /// `|x_{k+1} - x_k| > rho` for three consecutive k.
    pub cycle_detected: bool,
    /// Observed cycle amplitude `|x_1|`.
    pub amplitude: f64,
    /// Max `|x_{k+2} - x_k|` over the detection window.
    pub period2_residual: f64,
}

/// Runs Gauss-Newton on the worst-case problem from `x0` (default: `rho`,
/// taken from the closed form for Lipschitz/Smale majorants so the start
/// sits on the cycle to machine precision) and reports the iterate list and
/// cycle diagnostics.
pub fn worst_case_cycle_demo(
    majorant: &MajorantFunction,
    beta: f64,
    kappa: f64,
    x0_override: Option<f64>,
    iters: usize,
) -> Result<CycleDemo, CertifyError> {
    let constants = ProblemConstants::from_beta(0.0, beta, kappa);
    let rho = match majorant::closed_form_radii(majorant.kind(), &constants) {
        Ok(radii) => radii.rho,
        Err(MajorantError::UnsupportedKind) => majorant::compute_rho(majorant, beta, 0.0)?,
        Err(e) => return Err(e.into()),
    };
    let problem = worst_case_problem(majorant, beta, kappa);
    let x0 = x0_override.unwrap_or(rho);
    let trace = solve(
        &problem,
        &Vector::from_vec(vec![x0]),
        &SolveOptions {
            max_iters: iters,
            grad_tol: Some(0.0),
            divergence_radius: Some(f64::INFINITY),
        },
    );
    let xs: Vec<f64> = trace.iterates.iter().map(|x| x[0]).collect();
    let mut cycle_detected = xs.len() >= 5;
    let mut period2_residual = 0.0_f64;
    for k in 0..3 {
        if k + 2 >= xs.len() {
            cycle_detected = false;
            break;
        }
        let ret = (xs[k + 2] - xs[k]).abs();
        period2_residual = period2_residual.max(ret);
        if !(ret < 1e-10 && (xs[k + 1] - xs[k]).abs() > rho) {
            cycle_detected = false;
        }
    }
    let amplitude = xs.get(1).map_or(0.0, |v| v.abs());
    Ok(CycleDemo {
        rho,
        x0,
        iterates: xs,
        cycle_detected,
        amplitude,
        period2_residual,
    })
}

/// Outcome of the multistart uniqueness probe.
#[derive(Debug, Clone)]
pub struct UniquenessProbe {
    /// Clusters of converged stationary points lying inside the ball.
    pub clusters_in_ball: usize,
    /// All clusters found, including points that escaped the ball.
    pub clusters_total: usize,
    pub converged_runs: usize,
    pub failed_runs: usize,
    /// One representative per cluster.
    pub representatives: Vec<Vector>,
}

/// Multistart Gauss-Newton from `starts` uniform points in `B(x*, sigma)`;
/// converged stationary points are clustered with tolerance 1e-6. A
/// certificate with h4 satisfied predicts exactly one in-ball cluster.
pub fn uniqueness_probe(
    problem: &ResidualProblem,
    sigma: f64,
    starts: usize,
    seed: u64,
) -> Result<UniquenessProbe, CertifyError> {
    let x_star = require_solution(problem)?.clone();
    let mut rng = sampling::rng(seed);
    let opts = SolveOptions {
        max_iters: 300,
        ..SolveOptions::default()
    };
    let mut reps: Vec<Vector> = Vec::new();
    let mut converged_runs = 0usize;
    let mut failed_runs = 0usize;
    for _ in 0..starts {
        let x0 = sampling::point_in_ball(&mut rng, &x_star, sigma);
        let trace = solve(problem, &x0, &opts);
        if trace.status != SolveStatus::Converged {
            failed_runs += 1;
            continue;
        }
        converged_runs += 1;
        let point = trace.iterates.last().expect("trace nonempty").clone();
        if !reps.iter().any(|r| (r - &point).norm() <= CLUSTER_TOL) {
            reps.push(point);
        }
    }
    let clusters_in_ball = reps
        .iter()
        .filter(|r| (*r - &x_star).norm() <= sigma * (1.0 + 1e-9))
        .count();
    Ok(UniquenessProbe {
        clusters_in_ball,
        clusters_total: reps.len(),
        converged_runs,
        failed_runs,
        representatives: reps,
    })
}

/// Convergence-order diagnostics fitted from a trace tail.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceOrder {
    /// Least-squares slope of `log e_{k+1}` against `log e_k`.
    pub order_estimate: f64,
    /// Last tail ratio `e_{k+1} / e_k`.
    pub linear_factor_estimate: f64,
}

/// Error entries at or below this are roundoff, not convergence data.
const PAIR_FLOOR: f64 = 1e-13;

/// Fits the convergence order from a converged trace with at least 4
/// positive error entries.
pub fn fit_convergence_order(trace: &IterateTrace) -> Result<ConvergenceOrder, CertifyError> {
    if trace.status != SolveStatus::Converged {
        return Err(CertifyError::PreconditionViolated(
            "order fit requires a converged trace".into(),
        ));
    }
    let errors = trace
        .errors
        .as_ref()
        .ok_or_else(|| CertifyError::PreconditionViolated("trace has no error data".into()))?;
    let positive = errors.iter().filter(|e| **e > 0.0).count();
    if positive < 4 {
        return Err(CertifyError::InsufficientData {
            needed: 4,
            got: positive,
        });
    }
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for k in 0..errors.len() - 1 {
        if errors[k] > PAIR_FLOOR && errors[k + 1] > PAIR_FLOOR {
            pairs.push((errors[k].ln(), errors[k + 1].ln()));
        }
    }
    if pairs.len() < 2 {
        return Err(CertifyError::InsufficientData {
            needed: 2,
            got: pairs.len(),
        });
    }
    // Keep the asymptotic tail.
    let tail: Vec<(f64, f64)> = pairs.iter().rev().take(8).rev().copied().collect();
    let n = tail.len() as f64;
    let mean_x = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in &tail {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    let (last_x, last_y) = *tail.last().expect("tail nonempty");
    Ok(ConvergenceOrder {
        order_estimate: sxy / sxx,
        linear_factor_estimate: (last_y - last_x).exp(),
    })
}

/// Sampled checks of the pseudo-inverse bounds inside `min(nu, kappa)` and
/// the Taylor bound `||E_F(x, x*)|| <= e_f(||x - x*||, 0)` inside `kappa`.
#[derive(Debug, Clone, Copy)]
pub struct OperatorBoundsCheck {
    pub pinv_norm_pass: bool,
    pub pinv_norm_worst_margin: f64,
    pub pinv_diff_pass: bool,
    pub pinv_diff_worst_margin: f64,
    pub taylor_pass: bool,
    pub taylor_worst_margin: f64,
    pub samples: usize,
}

pub fn verify_operator_bounds(
    problem: &ResidualProblem,
    cert: &Certificate,
    samples: usize,
    seed: u64,
) -> Result<OperatorBoundsCheck, CertifyError> {
    let majorant = cert.majorant.as_ref().ok_or_else(|| {
        CertifyError::PreconditionViolated(
            "unconditional certificates carry no majorant bounds".into(),
        )
    })?;
    let x_star = require_solution(problem)?.clone();
    let beta = cert.constants.beta;
    let pinv_star = linalg::pseudoinverse(&problem.jacobian(&x_star))?;
    let r_wdns = cert.radii.nu.min(cert.constants.kappa) * (1.0 - 1e-9);
    let r_taylor = cert.constants.kappa.min(majorant::UNBOUNDED_CAP) * (1.0 - 1e-9);
    let mut rng = sampling::rng(seed);
    let slack = |rhs: f64| rhs * (1.0 + OPERATOR_BOUND_SLACK) + 1e-12;

    let mut norm_worst = f64::INFINITY;
    let mut diff_worst = f64::INFINITY;
    let mut taylor_worst = f64::INFINITY;
    let mut norm_pass = true;
    let mut diff_pass = true;
    let mut taylor_pass = true;
    for _ in 0..samples {
        let x = sampling::point_in_ball(&mut rng, &x_star, r_wdns);
        let t = (&x - &x_star).norm();
        if t > 0.0 {
            let pinv = linalg::pseudoinverse(&problem.jacobian(&x))?;
            let den = 1.0 - beta * (majorant.deriv(t) + 1.0);
            let rhs_norm = beta / den;
            let lhs_norm = linalg::spectral_norm(&pinv);
            norm_worst = norm_worst.min(rhs_norm - lhs_norm);
            norm_pass &= lhs_norm <= slack(rhs_norm);
            let rhs_diff = std::f64::consts::SQRT_2 * beta * beta * (majorant.deriv(t) + 1.0) / den;
            let lhs_diff = linalg::spectral_norm(&(&pinv - &pinv_star));
            diff_worst = diff_worst.min(rhs_diff - lhs_diff);
            diff_pass &= lhs_diff <= slack(rhs_diff);
        }

        let y = sampling::point_in_ball(&mut rng, &x_star, r_taylor);
        let ty = (&y - &x_star).norm();
        let lhs_taylor = linearization_error(problem, &y, &x_star);
        let rhs_taylor = majorant::e_f(majorant, ty, 0.0);
        taylor_worst = taylor_worst.min(rhs_taylor - lhs_taylor);
        taylor_pass &= lhs_taylor <= slack(rhs_taylor);
    }
    Ok(OperatorBoundsCheck {
        pinv_norm_pass: norm_pass,
        pinv_norm_worst_margin: norm_worst,
        pinv_diff_pass: diff_pass,
        pinv_diff_worst_margin: diff_worst,
        taylor_pass,
        taylor_worst_margin: taylor_worst,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorant::smale_majorant;
    use crate::problems;

    fn lip(k: f64) -> MajorantFunction {
        lipschitz_majorant(k, f64::INFINITY)
    }

    #[test]
    fn certificate_scalar_quadratic_lipschitz() {
        let p = problems::make_scalar_quadratic();
        let cert = build_certificate(&p, lip(2.0), MajorantSource::Registry).unwrap();
        assert_eq!(cert.constants.c, 0.0);
        assert!((cert.constants.beta - 1.0).abs() < 1e-12);
        assert!((cert.constants.beta0 - 1.0).abs() < 1e-12);
        assert!((cert.radii.r - 1.0 / 3.0).abs() <= 1e-10);
        assert!(cert.radii.h3_satisfied && cert.radii.h4_satisfied);
        // sigma = min(2/(beta K), kappa) = 1
        assert!((cert.radii.sigma.unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn certificate_scalar_quadratic_smale() {
        // gamma = ||F''(x*)/2|| = 1: all derivatives beyond the second vanish.
        let p = problems::make_scalar_quadratic();
        let cert = build_certificate(&p, smale_majorant(1.0), MajorantSource::Registry).unwrap();
        let expected = (5.0 - 17.0_f64.sqrt()) / 4.0;
        assert!((cert.radii.r - expected).abs() <= 1e-10);
        // kappa = min(domain, R = 1/gamma) = 1
        assert!((cert.constants.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn certificate_linear_unconditional_and_tiny_k() {
        let p = problems::suite()
            .into_iter()
            .find(|s| s.label() == "linear")
            .unwrap()
            .build();
        let cert = build_certificate_unconditional(&p).unwrap();
        assert!(cert.is_unconditional());
        assert_eq!(cert.radii.r, cert.constants.kappa);
        assert_eq!(cert.q2_at(cert.radii.r * 0.5).unwrap().quad, 0.0);
        // The generic path with a tiny K certifies r = kappa as well.
        let cert2 = build_certificate(&p, lip(1e-12), MajorantSource::Supplied).unwrap();
        assert_eq!(cert2.radii.r, cert2.constants.kappa);
    }

    #[test]
    fn certificate_rejects_rank_deficient_solution() {
        // F = (x^2, x^2) is stationary at 0 but its Jacobian vanishes there.
        let p = crate::solver::ResidualProblem::new(
            "flat_at_solution",
            1,
            2,
            |x: &Vector| Vector::from_vec(vec![x[0] * x[0], x[0] * x[0]]),
            |x: &Vector| Matrix::from_column_slice(2, 1, &[2.0 * x[0], 2.0 * x[0]]),
            Vector::zeros(1),
            10.0,
        )
        .unwrap()
        .with_solution(Vector::zeros(1))
        .unwrap();
        assert!(matches!(
            build_certificate(&p, lip(1.0), MajorantSource::Supplied),
            Err(CertifyError::Linalg(LinalgError::RankDeficient { .. }))
        ));
    }

    #[test]
    fn certificate_constants_are_spectral_consistent() {
        let p = problems::make_rosenbrock();
        let cert = build_certificate(&p, lip(20.0), MajorantSource::Registry).unwrap();
        assert!(cert.constants.beta0_consistent(1e-10));
    }

    #[test]
    fn certificate_rejects_h3_violation() {
        // Large-residual family: K = 2 lambda, h3 product = 2 |lambda|.
        let p = problems::make_ds_family(2.0);
        let err = build_certificate(&p, lip(4.0), MajorantSource::Registry).unwrap_err();
        assert!(matches!(
            err,
            CertifyError::Majorant(MajorantError::H3Violated { .. })
        ));
    }

    #[test]
    fn majorant_condition_equality_case() {
        // For F = (x-1, (x-1)^2) the condition holds with equality at K = 2
        // and fails for any smaller constant.
        let p = problems::make_scalar_quadratic();
        let ok = verify_majorant_condition(&p, &lip(2.0), 500, 7).unwrap();
        assert!(ok.pass, "margin {}", ok.worst_margin);
        assert!(ok.worst_margin.abs() < 1e-9);
        let bad = verify_majorant_condition(&p, &lip(1.9), 500, 7).unwrap();
        assert!(!bad.pass);
        assert!(bad.worst_margin < -1e-4);
    }

    #[test]
    fn majorant_condition_linear_problem_trivial() {
        let p = problems::make_ds_family(0.0);
        let check = verify_majorant_condition(&p, &lip(1e-9), 200, 3).unwrap();
        assert!(check.pass);
    }

    #[test]
    fn q2_holds_along_traces() {
        let p = problems::make_scalar_quadratic();
        let cert = build_certificate(&p, lip(2.0), MajorantSource::Registry).unwrap();
        let trace = solve(&p, &Vector::from_vec(vec![1.3]), &SolveOptions::default());
        let check = verify_q2(&trace, &cert).unwrap();
        assert!(check.pass, "margins {:?}", check.margins);
        assert!((check.t0 - 0.3).abs() < 1e-12);

        // Vacuous pass when started at the solution.
        let trace0 = solve(&p, &Vector::from_vec(vec![1.0]), &SolveOptions::default());
        let check0 = verify_q2(&trace0, &cert).unwrap();
        assert!(check0.pass && check0.margins.is_empty());
    }

    #[test]
    fn q2_rejects_starts_outside_certified_ball() {
        let p = problems::make_scalar_quadratic();
        let cert = build_certificate(&p, lip(2.0), MajorantSource::Registry).unwrap();
        let trace = solve(&p, &Vector::from_vec(vec![1.5]), &SolveOptions::default());
        assert!(matches!(
            verify_q2(&trace, &cert),
            Err(CertifyError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn worst_case_cycle_at_rho() {
        let demo = worst_case_cycle_demo(&lip(1.0), 1.0, 10.0, None, 10).unwrap();
        assert!((demo.rho - 2.0 / 3.0).abs() < 1e-15);
        assert!(demo.cycle_detected);
        assert!((demo.iterates[1] + 2.0 / 3.0).abs() < 1e-12);
        assert!((demo.iterates[2] - demo.iterates[0]).abs() < 1e-12);
        assert!((demo.amplitude - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn worst_case_cycle_scaled_parameters() {
        // K = 2, beta = 0.5: rho = 2/(3*2*0.5) = 2/3 again.
        let demo = worst_case_cycle_demo(&lip(2.0), 0.5, 10.0, None, 10).unwrap();
        assert!((demo.rho - 2.0 / 3.0).abs() < 1e-15);
        assert!(demo.cycle_detected);
    }

    #[test]
    fn worst_case_smale_cycles_too() {
        let demo = worst_case_cycle_demo(&smale_majorant(1.0), 1.0, 0.9, None, 10).unwrap();
        let expected = (5.0 - 17.0_f64.sqrt()) / 4.0;
        assert!((demo.rho - expected).abs() < 1e-14);
        assert!(demo.cycle_detected, "residual {}", demo.period2_residual);
    }

    #[test]
    fn worst_case_inside_radius_converges_monotonically() {
        let demo = worst_case_cycle_demo(&lip(1.0), 1.0, 10.0, Some(0.6), 30).unwrap();
        assert!(!demo.cycle_detected);
        let mut prev = f64::INFINITY;
        for x in &demo.iterates {
            assert!(x.abs() < prev || x.abs() == 0.0);
            prev = x.abs();
        }
        assert!(demo.iterates.last().unwrap().abs() < 1e-10);

        let fixed = worst_case_cycle_demo(&lip(1.0), 1.0, 10.0, Some(0.0), 5).unwrap();
        assert!(fixed.iterates.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn empirical_radius_tight_on_worst_case() {
        let h = worst_case_problem(&lip(1.0), 1.0, 10.0);
        let emp = empirical_radius(&h, 2, 2.0, 1e-8, 11).unwrap();
        let rho = 2.0 / 3.0;
        assert!(
            (emp.min - rho).abs() <= 1e-6 * rho,
            "empirical {} vs rho {rho}",
            emp.min
        );
    }

    #[test]
    fn empirical_radius_hits_t_max_on_globally_convergent_problems() {
        let p = problems::make_scalar_quadratic();
        let emp = empirical_radius(&p, 2, 50.0, 1e-6, 13).unwrap();
        assert_eq!(emp.min, 50.0);
    }

    #[test]
    fn uniqueness_probe_finds_one_cluster() {
        let p = problems::make_scalar_quadratic();
        let probe = uniqueness_probe(&p, 1.0, 60, 17).unwrap();
        assert_eq!(probe.clusters_in_ball, 1);
        assert_eq!(probe.clusters_total, 1);
        assert_eq!(probe.failed_runs, 0);

        let lin = problems::suite()
            .into_iter()
            .find(|s| s.label() == "linear")
            .unwrap()
            .build();
        let probe2 = uniqueness_probe(&lin, 100.0, 40, 19).unwrap();
        assert_eq!(probe2.clusters_in_ball, 1);
    }

    #[test]
    fn uniqueness_probe_informational_beyond_certificate() {
        // lambda = 2: stationary points at 0, 1/4 and -1; probing a ball far
        // beyond any certified sigma finds several clusters.
        let p = problems::make_ds_family(2.0);
        let probe = uniqueness_probe(&p, 2.0, 80, 23).unwrap();
        assert!(probe.clusters_total >= 2, "found {}", probe.clusters_total);
    }

    #[test]
    fn convergence_order_quadratic_and_insufficient() {
        let p = problems::make_scalar_quadratic();
        let trace = solve(&p, &Vector::from_vec(vec![1.3]), &SolveOptions::default());
        let fit = fit_convergence_order(&trace).unwrap();
        assert!(fit.order_estimate >= 1.9, "order {}", fit.order_estimate);

        let lin = problems::suite()
            .into_iter()
            .find(|s| s.label() == "linear")
            .unwrap()
            .build();
        let t2 = solve(
            &lin,
            &Vector::from_vec(vec![3.0, 4.0]),
            &SolveOptions::default(),
        );
        assert!(matches!(
            fit_convergence_order(&t2),
            Err(CertifyError::InsufficientData { .. })
        ));
    }

    #[test]
    fn lipschitz_estimate_brackets_the_exact_constant() {
        let p = problems::make_rosenbrock();
        let k = estimate_lipschitz(&p, 1.0, 500, 29).unwrap();
        // max ratio is 20 exactly (axis pairs realize it), inflated by 5%.
        assert!((20.9..21.1).contains(&k), "estimate {k}");
    }

    #[test]
    fn operator_bounds_hold_on_scalar_quadratic() {
        let p = problems::make_scalar_quadratic();
        let cert = build_certificate(&p, lip(2.0), MajorantSource::Registry).unwrap();
        let check = verify_operator_bounds(&p, &cert, 300, 31).unwrap();
        assert!(
            check.pinv_norm_pass,
            "margin {}",
            check.pinv_norm_worst_margin
        );
        assert!(
            check.pinv_diff_pass,
            "margin {}",
            check.pinv_diff_worst_margin
        );
        assert!(check.taylor_pass, "margin {}", check.taylor_worst_margin);
    }

    #[test]
    fn shared_types_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MajorantFunction>();
        assert_send_sync::<crate::solver::ResidualProblem>();
        assert_send_sync::<Certificate>();
    }

    #[test]
    fn plan_selection_matches_known_constants() {
        let specs = problems::suite();
        for spec in &specs {
            let p = spec.build();
            let plan = plan_for(&p, &spec.known, 1).unwrap();
            match (spec.label(), plan) {
                ("linear", CertificationPlan::Unconditional) => {}
                ("linear", _) => panic!("linear should be unconditional"),
                (_, CertificationPlan::Majorant(_, source)) => {
                    if spec.known.lipschitz_k.is_some() {
                        assert_eq!(source, MajorantSource::Registry);
                    } else {
                        assert_eq!(source, MajorantSource::Estimated);
                    }
                }
                (label, CertificationPlan::Unconditional) => {
                    panic!("{label} should not be unconditional")
                }
            }
        }
    }
}
