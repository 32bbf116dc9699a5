//! Scalar majorant functions and the radius/coefficient computations they
//! induce.
//!
//! A majorant is a continuously differentiable `f : [0, R) -> R` with
//! `f(0) = 0`, `f'(0) = -1` (h1) and `f'` convex and strictly increasing
//! (h2). Its derivative differences dominate the variation of a problem
//! Jacobian around the solution, which yields three radii:
//!
//! * `nu`  — where the perturbed pseudo-inverse stays controlled,
//! * `rho` — where the combined per-step contraction factor stays below 1,
//! * `sigma` — where the solution is certifiably unique,
//!
//! plus the quadratic/linear error coefficients of the per-iteration bound.
//! Monotonicity of every map involved is guaranteed, so plain bisection is
//! exact up to tolerance; closed forms for the Lipschitz and Smale
//! instantiations are kept alongside as cross-checks.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Relative tolerance for all radius bisections.
pub const BISECT_REL_TOL: f64 = 1e-12;
/// Iteration cap for bisections (generous; 60-ish suffices at f64 precision).
pub const BISECT_MAX_ITERS: usize = 200;
/// Bracket cap substituted for an unbounded majorant domain.
pub const UNBOUNDED_CAP: f64 = 1e6;

const H1_TOL: f64 = 1e-14;
const VALIDATION_GRID: usize = 1000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MajorantError {
    #[error("invalid majorant: {reason}")]
    InvalidMajorant { reason: String },
    /// `sqrt(2) c beta^2 D+f'(0) >= 1`: the large-residual regime where no
    /// convergence radius is certified.
    #[error("h3 violated: sqrt(2)*c*beta^2*D+f'(0) = {product:.6e} >= 1")]
    H3Violated { product: f64 },
    /// `2 c beta0 D+f'(0) >= 1`: uniqueness is not certified.
    #[error("h4 violated: 2*c*beta0*D+f'(0) = {product:.6e} >= 1")]
    H4Violated { product: f64 },
    #[error("argument t = {t:.6e} outside valid range: {detail}")]
    DomainError { t: f64, detail: &'static str },
    #[error("no closed-form radii for custom majorants")]
    UnsupportedKind,
}

/// Which analytic family a majorant belongs to, with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MajorantKind {
    /// `f(t) = K t^2 / 2 - t` for a Lipschitz constant `K` of the Jacobian.
    Lipschitz {
        k: f64,
    },
    /// `f(t) = t / (1 - gamma t) - 2 t` from the analytic point estimate.
    Smale {
        gamma: f64,
    },
    Custom,
}

impl MajorantKind {
    pub fn name(&self) -> &'static str {
        match self {
            MajorantKind::Lipschitz { .. } => "lipschitz",
            MajorantKind::Smale { .. } => "smale",
            MajorantKind::Custom => "custom",
        }
    }

    pub fn params(&self) -> std::collections::BTreeMap<String, f64> {
        let mut m = std::collections::BTreeMap::new();
        match self {
            MajorantKind::Lipschitz { k } => {
                m.insert("K".to_string(), *k);
            }
            MajorantKind::Smale { gamma } => {
                m.insert("gamma".to_string(), *gamma);
            }
            MajorantKind::Custom => {}
        }
        m
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A validated majorant function: `f`, `f'`, the right derivative of `f'`
/// at 0, and the domain supremum `R` (`f64::INFINITY` when unbounded).
///
/// Evaluation closures must be pure; the struct is cheap to clone and safe
/// to share across threads.
#[derive(Clone)]
pub struct MajorantFunction {
    f: ScalarFn,
    fprime: ScalarFn,
    // f'(t) + 1 and f(t)/t + 1 in cancellation-free form. The radius maps
    // are built from these "deviation from -1" quantities; evaluating them
    // as f'(t) + 1 loses all relative accuracy once f'(t) sits on the -1
    // shoulder (t of order machine epsilon), which matters when the h3
    // product is close to 1.
    fprime_plus_one: ScalarFn,
    ratio_plus_one: ScalarFn,
    d_plus_fprime_0: f64,
    r_sup: f64,
    kind: MajorantKind,
}

impl fmt::Debug for MajorantFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MajorantFunction")
            .field("kind", &self.kind)
            .field("r_sup", &self.r_sup)
            .field("d_plus_fprime_0", &self.d_plus_fprime_0)
            .finish()
    }
}

impl MajorantFunction {
    /// Builds a custom majorant from callables plus an explicit `D+f'(0)`.
    /// h1 and h2 are validated numerically on a 1000-point grid.
    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fprime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d_plus_fprime_0: f64,
        r_sup: f64,
    ) -> Result<Self, MajorantError> {
        let f: ScalarFn = Arc::new(f);
        let fprime: ScalarFn = Arc::new(fprime);
        let (fp, ff) = (fprime.clone(), f.clone());
        MajorantFunction {
            f,
            fprime,
            fprime_plus_one: Arc::new(move |t| fp(t) + 1.0),
            ratio_plus_one: Arc::new(move |t| ff(t) / t + 1.0),
            d_plus_fprime_0,
            r_sup,
            kind: MajorantKind::Custom,
        }
        .validated()
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        (self.fprime)(t)
    }

    /// `f'(t) + 1`, evaluated without the cancellation at the `-1` shoulder.
    pub fn deriv_plus_one(&self, t: f64) -> f64 {
        (self.fprime_plus_one)(t)
    }

    /// `f(t)/t + 1` for `t > 0`, likewise cancellation-free.
    pub fn ratio_plus_one(&self, t: f64) -> f64 {
        (self.ratio_plus_one)(t)
    }

    /// Right derivative of `f'` at 0 (equals `f''(0)` when it exists).
    pub fn d_plus_deriv0(&self) -> f64 {
        self.d_plus_fprime_0
    }

    /// Domain supremum `R`; `f64::INFINITY` for an unbounded domain.
    pub fn r_sup(&self) -> f64 {
        self.r_sup
    }

    pub fn kind(&self) -> &MajorantKind {
        &self.kind
    }

    /// Largest usable bracket endpoint strictly inside the domain.
    fn bracket_hi(&self) -> f64 {
        if self.r_sup.is_finite() {
            self.r_sup * (1.0 - 1e-12)
        } else {
            UNBOUNDED_CAP
        }
    }

    fn validated(self) -> Result<Self, MajorantError> {
        if self.r_sup.is_nan() || self.r_sup <= 0.0 {
            return Err(MajorantError::InvalidMajorant {
                reason: format!("domain supremum R = {} must be positive", self.r_sup),
            });
        }
        if !self.d_plus_fprime_0.is_finite() || self.d_plus_fprime_0 < 0.0 {
            return Err(MajorantError::InvalidMajorant {
                reason: format!("D+f'(0) = {} must be finite and >= 0", self.d_plus_fprime_0),
            });
        }
        // h1: f(0) = 0 and f'(0) = -1.
        if self.eval(0.0).abs() > H1_TOL {
            return Err(MajorantError::InvalidMajorant {
                reason: format!("h1 fails: f(0) = {:.3e}", self.eval(0.0)),
            });
        }
        if (self.deriv(0.0) + 1.0).abs() > H1_TOL {
            return Err(MajorantError::InvalidMajorant {
                reason: format!("h1 fails: f'(0) = {:.16}", self.deriv(0.0)),
            });
        }
        // h2 on a sampled grid: f' strictly increasing and midpoint-convex.
        let hi = self.bracket_hi();
        let step = hi / VALIDATION_GRID as f64;
        let mut prev = self.deriv(0.0);
        for i in 1..=VALIDATION_GRID {
            let t = step * i as f64;
            let v = self.deriv(t);
            if !v.is_finite() {
                return Err(MajorantError::InvalidMajorant {
                    reason: format!("f'({t}) is not finite"),
                });
            }
            if v <= prev {
                return Err(MajorantError::InvalidMajorant {
                    reason: format!("h2 fails: f' not strictly increasing near t = {t}"),
                });
            }
            prev = v;
        }
        for i in 0..VALIDATION_GRID {
            let a = step * i as f64;
            let b = a + step;
            let fa = self.deriv(a);
            let fb = self.deriv(b);
            let mid = self.deriv(0.5 * (a + b));
            let slack = 1e-9 * (1.0 + fa.abs() + fb.abs());
            if mid > 0.5 * (fa + fb) + slack {
                return Err(MajorantError::InvalidMajorant {
                    reason: format!("h2 fails: f' not convex near t = {a}"),
                });
            }
        }
        Ok(self)
    }
}

/// Majorant for a Jacobian with Lipschitz constant `k` on a domain of
/// supremum `r_sup` (pass `f64::INFINITY` for the natural unbounded domain):
/// `f(t) = k t^2 / 2 - t`.
pub fn lipschitz_majorant(k: f64, r_sup: f64) -> MajorantFunction {
    assert!(k > 0.0 && k.is_finite(), "Lipschitz constant must be > 0");
    assert!(r_sup > 0.0, "domain supremum must be > 0");
    MajorantFunction {
        f: Arc::new(move |t| 0.5 * k * t * t - t),
        fprime: Arc::new(move |t| k * t - 1.0),
        fprime_plus_one: Arc::new(move |t| k * t),
        ratio_plus_one: Arc::new(move |t| 0.5 * k * t),
        d_plus_fprime_0: k,
        r_sup,
        kind: MajorantKind::Lipschitz { k },
    }
    .validated()
    .expect("Lipschitz majorant satisfies h1/h2 by construction")
}

/// Majorant for an analytic problem with point estimate `gamma`:
/// `f(t) = t / (1 - gamma t) - 2 t` on `[0, 1/gamma)`.
pub fn smale_majorant(gamma: f64) -> MajorantFunction {
    assert!(gamma > 0.0 && gamma.is_finite(), "gamma must be > 0");
    MajorantFunction {
        f: Arc::new(move |t| t / (1.0 - gamma * t) - 2.0 * t),
        fprime: Arc::new(move |t| {
            let d = 1.0 - gamma * t;
            1.0 / (d * d) - 2.0
        }),
        fprime_plus_one: Arc::new(move |t| {
            let d = 1.0 - gamma * t;
            gamma * t * (2.0 - gamma * t) / (d * d)
        }),
        ratio_plus_one: Arc::new(move |t| gamma * t / (1.0 - gamma * t)),
        d_plus_fprime_0: 2.0 * gamma,
        r_sup: 1.0 / gamma,
        kind: MajorantKind::Smale { gamma },
    }
    .validated()
    .expect("Smale majorant satisfies h1/h2 by construction")
}

/// Bisection for a nondecreasing `g` with `g(lo) < 0 <= g(hi)`.
fn bisect_root(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= BISECT_REL_TOL * mid {
            return mid;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `nu = sup { t in [0, R) : beta (f'(t) + 1) < 1 }`.
///
/// The map is strictly increasing under h2, so the sup is either the domain
/// endpoint (returned as `R`, capped at [`UNBOUNDED_CAP`] when unbounded) or
/// the unique root of `beta (f'(t) + 1) = 1`, found by bisection.
pub fn compute_nu(f: &MajorantFunction, beta: f64) -> f64 {
    compute_nu_capped(f, beta, UNBOUNDED_CAP)
}

/// [`compute_nu`] with an explicit bracket cap substituted for an unbounded
/// majorant domain.
pub fn compute_nu_capped(f: &MajorantFunction, beta: f64, t_max: f64) -> f64 {
    assert!(beta > 0.0, "beta must be > 0");
    assert!(t_max > 0.0, "t_max must be > 0");
    let hi = if f.r_sup().is_finite() {
        f.bracket_hi()
    } else {
        t_max
    };
    let g = |t: f64| beta * f.deriv_plus_one(t) - 1.0;
    if g(hi) < 0.0 {
        return if f.r_sup().is_finite() { f.r_sup() } else { t_max };
    }
    bisect_root(g, 0.0, hi)
}

/// Raw contraction-factor ratio; assumes `0 < t` and a positive denominator.
fn psi_raw(f: &MajorantFunction, beta: f64, c: f64, t: f64) -> f64 {
    let dp1 = f.deriv_plus_one(t);
    let num = beta * (t * f.deriv(t) - f.eval(t)) + SQRT_2 * c * beta * beta * dp1;
    let den = t * (1.0 - beta * dp1);
    num / den
}

/// The combined contraction factor
/// `psi(t) = [beta (t f'(t) - f(t)) + sqrt(2) c beta^2 (f'(t) + 1)]
///           / [t (1 - beta (f'(t) + 1))]`,
/// continuous and increasing on `(0, nu)` with `psi(0+) = sqrt(2) c beta^2 D+f'(0)`.
pub fn psi(f: &MajorantFunction, beta: f64, c: f64, t: f64) -> Result<f64, MajorantError> {
    if t <= 0.0 || t >= f.r_sup() {
        return Err(MajorantError::DomainError {
            t,
            detail: "t must lie in (0, R)",
        });
    }
    if 1.0 - beta * f.deriv_plus_one(t) <= 0.0 {
        return Err(MajorantError::DomainError {
            t,
            detail: "denominator nonpositive (t >= nu)",
        });
    }
    Ok(psi_raw(f, beta, c, t))
}

/// `rho = sup { t in (0, nu) : psi(t) < 1 }`, requiring h3.
///
/// Returns `nu` (sup-at-boundary convention) when `psi < 1` over the whole
/// interval; otherwise bisects `psi(t) = 1` to [`BISECT_REL_TOL`].
pub fn compute_rho(f: &MajorantFunction, beta: f64, c: f64) -> Result<f64, MajorantError> {
    let h3 = SQRT_2 * c * beta * beta * f.d_plus_deriv0();
    if h3 >= 1.0 {
        return Err(MajorantError::H3Violated { product: h3 });
    }
    let nu = compute_nu(f, beta);
    // Stay strictly below nu: its bisected value is only 1e-12-accurate.
    let hi = nu * (1.0 - 1e-9);
    let g = |t: f64| psi_raw(f, beta, c, t) - 1.0;
    if g(hi) < 0.0 {
        return Ok(nu);
    }
    let lo = 1e-15 * nu;
    if g(lo) >= 0.0 {
        // psi(0+) = h3 < 1, so this can only be roundoff at an absurd scale.
        return Ok(lo);
    }
    Ok(bisect_root(g, lo, hi))
}

/// `sigma = sup { t in (0, kappa) : beta (f(t)/t + 1) + c beta0 (f'(t)+1)/t < 1 }`,
/// requiring h4. The bracket is additionally capped by the majorant domain.
pub fn compute_sigma(
    f: &MajorantFunction,
    beta: f64,
    beta0: f64,
    c: f64,
    kappa: f64,
) -> Result<f64, MajorantError> {
    assert!(kappa > 0.0, "kappa must be > 0");
    let h4 = 2.0 * c * beta0 * f.d_plus_deriv0();
    if h4 >= 1.0 {
        return Err(MajorantError::H4Violated { product: h4 });
    }
    let endpoint = kappa.min(if f.r_sup().is_finite() {
        f.r_sup()
    } else {
        UNBOUNDED_CAP
    });
    let hi = endpoint.min(f.bracket_hi());
    let g = |t: f64| beta * f.ratio_plus_one(t) + c * beta0 * f.deriv_plus_one(t) / t - 1.0;
    if g(hi) < 0.0 {
        return Ok(endpoint);
    }
    let lo = 1e-15 * hi;
    if g(lo) >= 0.0 {
        return Ok(lo);
    }
    Ok(bisect_root(g, lo, hi))
}

/// Quadratic and linear coefficients of the per-iteration error bound at a
/// fixed anchor `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q2Coefficients {
    /// Coefficient of `||x_k - x*||^2`.
    pub quad: f64,
    /// Coefficient of `||x_k - x*||`; exactly 0 in the zero-residual case.
    pub lin: f64,
}

impl Q2Coefficients {
    /// The contraction factor `quad * t0 + lin` this pair certifies at `t0`.
    pub fn contraction_at(&self, t0: f64) -> f64 {
        self.quad * t0 + self.lin
    }
}

/// Error-bound coefficients at anchor `t0 in (0, rho)`:
///
/// `quad = beta (t0 f'(t0) - f(t0)) / (t0^2 (1 - beta (f'(t0)+1)))`,
/// `lin  = sqrt(2) c beta^2 (f'(t0)+1) / (t0 (1 - beta (f'(t0)+1)))`,
///
/// with `quad * t0 + lin = psi(t0) < 1` guaranteed.
pub fn q2_coefficients(
    f: &MajorantFunction,
    beta: f64,
    c: f64,
    t0: f64,
) -> Result<Q2Coefficients, MajorantError> {
    let rho = compute_rho(f, beta, c)?;
    if t0 <= 0.0 || t0 >= rho {
        return Err(MajorantError::DomainError {
            t: t0,
            detail: "t0 must lie in (0, rho)",
        });
    }
    let den = 1.0 - beta * f.deriv_plus_one(t0);
    let quad = beta * (t0 * f.deriv(t0) - f.eval(t0)) / (t0 * t0 * den);
    let lin = if c == 0.0 {
        0.0
    } else {
        SQRT_2 * c * beta * beta * f.deriv_plus_one(t0) / (t0 * den)
    };
    Ok(Q2Coefficients { quad, lin })
}

/// Linearization error of the majorant itself:
/// `e_f(t, u) = f(u) - [f(t) + f'(t)(u - t)]`, nonnegative by convexity.
pub fn e_f(f: &MajorantFunction, t: f64, u: f64) -> f64 {
    f.eval(u) - (f.eval(t) + f.deriv(t) * (u - t))
}

/// The problem constants the radii are computed from: residual norm at the
/// solution, pseudo-inverse norms at the solution, and the domain radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    /// `c = ||F(x*)||`.
    pub c: f64,
    /// `beta = ||[F'(x*)^T F'(x*)]^{-1} F'(x*)^T||`; `1/sigma_min` in spectral norm.
    pub beta: f64,
    /// `beta0 = ||[F'(x*)^T F'(x*)]^{-1}||`; equals `beta^2` in spectral norm.
    pub beta0: f64,
    /// Domain radius around the solution (possibly infinite).
    pub kappa: f64,
}

impl ProblemConstants {
    /// Builds constants with the spectral-norm identity `beta0 = beta^2`.
    pub fn from_beta(c: f64, beta: f64, kappa: f64) -> Self {
        ProblemConstants {
            c,
            beta,
            beta0: beta * beta,
            kappa,
        }
    }

    /// Whether `beta0` is consistent with `beta^2` up to a relative tolerance.
    pub fn beta0_consistent(&self, rel_tol: f64) -> bool {
        let b2 = self.beta * self.beta;
        self.beta0 <= b2 * (1.0 + rel_tol) && self.beta0 >= b2 * (1.0 - rel_tol)
    }
}

/// The certified radii: `0 < rho <= nu`, `r = min(kappa, rho)`, and the
/// uniqueness radius `sigma <= kappa` (absent when h4 fails).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSet {
    pub nu: f64,
    pub rho: f64,
    pub r: f64,
    pub sigma: Option<f64>,
    pub h3_satisfied: bool,
    pub h4_satisfied: bool,
}

/// Full radius pipeline via bisection: `nu`, `rho`, `r = min(kappa, rho)`,
/// and `sigma` when h4 holds. Fails with `H3Violated` when h3 does not hold.
pub fn radius_set(f: &MajorantFunction, k: &ProblemConstants) -> Result<RadiusSet, MajorantError> {
    let nu = compute_nu(f, k.beta);
    let rho = compute_rho(f, k.beta, k.c)?;
    let r = rho.min(k.kappa);
    let h4 = 2.0 * k.c * k.beta0 * f.d_plus_deriv0();
    let (sigma, h4_satisfied) = if h4 < 1.0 {
        (Some(compute_sigma(f, k.beta, k.beta0, k.c, k.kappa)?), true)
    } else {
        (None, false)
    };
    Ok(RadiusSet {
        nu,
        rho,
        r,
        sigma,
        h3_satisfied: true,
        h4_satisfied,
    })
}

/// Closed-form radii for the Lipschitz and Smale instantiations.
///
/// These must agree with [`radius_set`] to 1e-9 relative, with one known
/// exception: the published Smale uniqueness constant `omega_1 = 2 + beta -
/// c beta0` is missing a `gamma` factor on the `c` term, so for `c > 0` the
/// closed-form `sigma` disagrees with the defining inequality and the
/// bisection pipeline is authoritative. `sigma` is `None` when h4 fails or
/// when the closed form's discriminant is negative.
pub fn closed_form_radii(
    kind: &MajorantKind,
    k: &ProblemConstants,
) -> Result<RadiusSet, MajorantError> {
    match *kind {
        MajorantKind::Lipschitz { k: lip } => {
            let h3 = SQRT_2 * k.c * k.beta * k.beta * lip;
            if h3 >= 1.0 {
                return Err(MajorantError::H3Violated { product: h3 });
            }
            let nu = 1.0 / (k.beta * lip);
            let rho =
                ((2.0 - 2.0 * SQRT_2 * lip * k.beta * k.beta * k.c) / (3.0 * lip * k.beta)).min(nu);
            let h4 = 2.0 * k.c * k.beta0 * lip;
            let sigma = if h4 < 1.0 {
                Some(((2.0 - 2.0 * k.c * k.beta0 * lip) / (k.beta * lip)).min(k.kappa))
            } else {
                None
            };
            Ok(RadiusSet {
                nu,
                rho,
                r: rho.min(k.kappa),
                sigma,
                h3_satisfied: true,
                h4_satisfied: h4 < 1.0,
            })
        }
        MajorantKind::Smale { gamma } => {
            let h3 = 2.0 * SQRT_2 * k.c * k.beta * k.beta * gamma;
            if h3 >= 1.0 {
                return Err(MajorantError::H3Violated { product: h3 });
            }
            let beta = k.beta;
            let nu = ((1.0 + beta) - (beta * (1.0 + beta)).sqrt()) / (gamma * (1.0 + beta));
            let a = 2.0 + 3.0 * beta - SQRT_2 * k.c * beta * beta * gamma;
            let b = 4.0 * (1.0 + beta) * (1.0 - 2.0 * SQRT_2 * k.c * beta * beta * gamma);
            let rho = ((a - (a * a - b).sqrt()) / (2.0 * gamma * (1.0 + beta))).min(nu);
            let h4 = 4.0 * k.c * k.beta0 * gamma;
            let sigma = if h4 < 1.0 {
                // Published constant, kept as printed; see the doc comment.
                let w1 = 2.0 + beta - k.c * k.beta0;
                let w2 = 4.0 * (1.0 + beta) * (1.0 - 2.0 * k.c * k.beta0 * gamma);
                let disc = w1 * w1 - w2;
                if disc >= 0.0 {
                    Some(((w1 - disc.sqrt()) / (2.0 * gamma * (1.0 + beta))).min(k.kappa))
                } else {
                    None
                }
            } else {
                None
            };
            Ok(RadiusSet {
                nu,
                rho,
                r: rho.min(k.kappa),
                sigma,
                h3_satisfied: true,
                h4_satisfied: h4 < 1.0,
            })
        }
        MajorantKind::Custom => Err(MajorantError::UnsupportedKind),
    }
}

/// Instantiates the majorant matching `kind` on the given domain supremum
/// (ignored for Smale, whose natural domain is `[0, 1/gamma)`).
pub fn majorant_for_kind(
    kind: &MajorantKind,
    r_sup: f64,
) -> Result<MajorantFunction, MajorantError> {
    match *kind {
        MajorantKind::Lipschitz { k } => Ok(lipschitz_majorant(k, r_sup)),
        MajorantKind::Smale { gamma } => Ok(smale_majorant(gamma)),
        MajorantKind::Custom => Err(MajorantError::UnsupportedKind),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn lip(k: f64) -> MajorantFunction {
        lipschitz_majorant(k, f64::INFINITY)
    }

    #[test]
    fn lipschitz_values() {
        let f = lip(1.0);
        assert!((f.eval(1.0) + 0.5).abs() < 1e-15);
        assert!((f.deriv(1.0) - 0.0).abs() < 1e-15);
        let f2 = lip(2.0);
        assert!(f2.deriv(0.5).abs() < 1e-15);
        for k in [0.1, 1.0, 7.5] {
            let _ = lip(k); // construction invariant check must pass
        }
    }

    #[test]
    fn smale_values() {
        let f = smale_majorant(1.0);
        assert!((f.eval(0.5) - 0.0).abs() < 1e-15);
        assert!((f.deriv(0.5) - 2.0).abs() < 1e-15);
        let f2 = smale_majorant(2.0);
        assert_eq!(f2.d_plus_deriv0(), 4.0);
    }

    #[test]
    fn custom_majorant_validation() {
        // A valid custom majorant: the Lipschitz one in disguise.
        let ok = MajorantFunction::custom(|t| 1.5 * t * t - t, |t| 3.0 * t - 1.0, 3.0, 10.0);
        assert!(ok.is_ok());
        // h1 violation: f(0) != 0.
        let bad = MajorantFunction::custom(|t| t * t + 0.1, |t| 2.0 * t - 1.0, 2.0, 10.0);
        assert!(matches!(bad, Err(MajorantError::InvalidMajorant { .. })));
        // h2 violation: f' decreasing.
        let bad2 = MajorantFunction::custom(|t| -t - t * t, |t| -1.0 - 2.0 * t, 0.0, 10.0);
        assert!(matches!(bad2, Err(MajorantError::InvalidMajorant { .. })));
        // h2 violation: f' concave (but increasing).
        let bad3 = MajorantFunction::custom(
            |t| -t + t * t - t * t * t / 30.0,
            |t| -1.0 + 2.0 * t - t * t / 10.0,
            2.0,
            5.0,
        );
        assert!(matches!(bad3, Err(MajorantError::InvalidMajorant { .. })));
    }

    #[test]
    fn nu_lipschitz_closed_form() {
        for (k, beta) in [(1.0, 1.0), (2.0, 0.5), (0.3, 4.0)] {
            let f = lip(k);
            let nu = compute_nu(&f, beta);
            assert!(
                (nu - 1.0 / (beta * k)).abs() <= 1e-10 * nu,
                "nu mismatch for K={k}, beta={beta}: {nu}"
            );
        }
    }

    #[test]
    fn nu_smale_closed_form() {
        let f = smale_majorant(1.0);
        let nu = compute_nu(&f, 1.0);
        let expected = (2.0 - SQRT_2) / 2.0;
        assert!((nu - expected).abs() <= 1e-10);
    }

    #[test]
    fn nu_returns_domain_sup_when_unconstrained() {
        // Bounded f' on [0, 0.5) and tiny beta: the inequality never binds.
        let f = lipschitz_majorant(1.0, 0.5);
        let nu = compute_nu(&f, 1e-9);
        assert_eq!(nu, 0.5);
    }

    #[test]
    fn psi_hand_value_and_limit() {
        let f = lip(1.0);
        let v = psi(&f, 1.0, 0.0, 0.5).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        // limit psi(0+) = sqrt(2) c beta^2 D+f'(0), checked at t = 1e-8
        for (maj, c, beta) in [
            (lip(1.0), 0.1, 1.0),
            (lip(3.0), 0.05, 0.7),
            (smale_majorant(1.0), 0.05, 1.0),
        ] {
            let lim = SQRT_2 * c * beta * beta * maj.d_plus_deriv0();
            let v = psi(&maj, beta, c, 1e-8).unwrap();
            assert!(
                (v - lim).abs() <= 1e-6,
                "psi(1e-8) = {v} vs limit {lim} for {:?}",
                maj.kind()
            );
        }
    }

    #[test]
    fn psi_zero_residual_drops_second_term() {
        let f = smale_majorant(2.0);
        let t = 0.1;
        let expected = 1.0 * (t * f.deriv(t) - f.eval(t)) / (t * (1.0 - 1.0 * (f.deriv(t) + 1.0)));
        assert!((psi(&f, 1.0, 0.0, t).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn psi_domain_error_beyond_nu() {
        let f = lip(1.0);
        // nu = 1 for beta = 1; psi undefined at t >= 1.
        assert!(matches!(
            psi(&f, 1.0, 0.0, 1.5),
            Err(MajorantError::DomainError { .. })
        ));
    }

    #[test]
    fn rho_lipschitz_closed_forms() {
        let f = lip(1.0);
        let rho = compute_rho(&f, 1.0, 0.0).unwrap();
        assert!((rho - 2.0 / 3.0).abs() <= 1e-10);

        let rho_c = compute_rho(&f, 1.0, 0.1).unwrap();
        let expected = (2.0 - 2.0 * SQRT_2 * 0.1) / 3.0;
        assert!((rho_c - expected).abs() <= 1e-10);
        assert!((expected - 0.572_385_7).abs() < 1e-7);
    }

    #[test]
    fn rho_smale_closed_form() {
        let f = smale_majorant(1.0);
        let rho = compute_rho(&f, 1.0, 0.0).unwrap();
        let expected = (5.0 - 17.0_f64.sqrt()) / 4.0;
        assert!((rho - expected).abs() <= 1e-10);
        assert!((expected - 0.219_223_5).abs() < 1e-7);
    }

    #[test]
    fn rho_rejects_h3_violation() {
        let f = lip(2.0);
        match compute_rho(&f, 1.0, 1.0) {
            Err(MajorantError::H3Violated { product }) => {
                assert!((product - 2.0 * SQRT_2).abs() < 1e-12)
            }
            other => panic!("expected H3Violated, got {other:?}"),
        }
    }

    #[test]
    fn sigma_closed_forms() {
        let f = lip(1.0);
        // c = 0, kappa large: sigma = 2 / (beta K).
        let s = compute_sigma(&f, 1.0, 1.0, 0.0, 1e5).unwrap();
        assert!((s - 2.0).abs() <= 1e-9 * 2.0);
        // K=1, beta=1, beta0=1, c=0.25: root of t/2 + 0.25 = 1.
        let s2 = compute_sigma(&f, 1.0, 1.0, 0.25, 10.0).unwrap();
        assert!((s2 - 1.5).abs() <= 1e-10);
        // Smale c = 0: sigma = 1 / (gamma (1 + beta)).
        let fs = smale_majorant(1.0);
        let s3 = compute_sigma(&fs, 1.0, 1.0, 0.0, 10.0).unwrap();
        assert!((s3 - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn sigma_rejects_h4_violation() {
        let f = lip(1.0);
        assert!(matches!(
            compute_sigma(&f, 1.0, 1.0, 0.6, 10.0),
            Err(MajorantError::H4Violated { .. })
        ));
    }

    #[test]
    fn q2_lipschitz_closed_forms() {
        let (k, beta, c, t0) = (2.0, 0.8, 0.05, 0.1);
        let f = lip(k);
        let q = q2_coefficients(&f, beta, c, t0).unwrap();
        let den = 1.0 - beta * k * t0;
        assert!((q.quad - beta * k / (2.0 * den)).abs() < 1e-12);
        assert!((q.lin - SQRT_2 * c * beta * beta * k / den).abs() < 1e-12);
        // psi consistency
        let p = psi(&f, beta, c, t0).unwrap();
        assert!((q.contraction_at(t0) - p).abs() < 1e-12);
        assert!(p < 1.0);
    }

    #[test]
    fn q2_zero_residual_has_zero_linear_term() {
        let f = smale_majorant(0.5);
        let q = q2_coefficients(&f, 1.0, 0.0, 0.1).unwrap();
        assert_eq!(q.lin, 0.0);
    }

    #[test]
    fn q2_smale_displayed_coefficient() {
        // quad = beta gamma / ((1 - gamma t0)^2 - beta gamma (2 t0 - gamma t0^2))
        let f = smale_majorant(1.0);
        let q = q2_coefficients(&f, 1.0, 0.0, 0.1).unwrap();
        let expected = 1.0 / (0.81 - 0.19);
        assert!((q.quad - expected).abs() < 1e-12);
        assert!((expected - 1.612_903_2).abs() < 1e-7);
    }

    #[test]
    fn q2_domain_check() {
        let f = lip(1.0);
        assert!(matches!(
            q2_coefficients(&f, 1.0, 0.0, 0.7),
            Err(MajorantError::DomainError { .. })
        ));
    }

    #[test]
    fn e_f_values() {
        let f = lip(3.0);
        assert_eq!(e_f(&f, 0.4, 0.4), 0.0);
        for t in [0.1, 0.5, 2.0] {
            assert!((e_f(&f, t, 0.0) - 3.0 * t * t / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_radii_spec_cases() {
        let k = ProblemConstants::from_beta(0.0, 1.0, 10.0);
        let r1 = closed_form_radii(&MajorantKind::Lipschitz { k: 1.0 }, &k).unwrap();
        assert!((r1.r - 2.0 / 3.0).abs() < 1e-12);
        let r2 = closed_form_radii(&MajorantKind::Smale { gamma: 1.0 }, &k).unwrap();
        assert!((r2.r - (5.0 - 17.0_f64.sqrt()) / 4.0).abs() < 1e-12);
        // Domain-limited: r = kappa.
        let kk = ProblemConstants::from_beta(0.1, 1.0, 0.3);
        let r3 = closed_form_radii(&MajorantKind::Lipschitz { k: 1.0 }, &kk).unwrap();
        assert_eq!(r3.r, 0.3);
    }

    #[test]
    fn bisection_matches_closed_forms_on_random_tuples() {
        let mut rng = crate::sampling::rng(99);
        for _ in 0..100 {
            let k: f64 = rng.random_range(0.05..5.0);
            let beta: f64 = rng.random_range(0.05..5.0);
            let c = rng.random_range(0.0..0.99) / (SQRT_2 * beta * beta * k);
            let f = lip(k);
            let consts = ProblemConstants::from_beta(c, beta, f64::INFINITY);
            let bisected = radius_set(&f, &consts).unwrap();
            let closed = closed_form_radii(&MajorantKind::Lipschitz { k }, &consts).unwrap();
            assert!((bisected.rho - closed.rho).abs() <= 1e-10 * closed.rho);
            if let (Some(sb), Some(sc)) = (bisected.sigma, closed.sigma) {
                assert!((sb - sc).abs() <= 1e-10 * sc);
            }
        }
        // Same agreement for the Smale rho.
        for _ in 0..100 {
            let gamma: f64 = rng.random_range(0.05..5.0);
            let beta: f64 = rng.random_range(0.05..5.0);
            let c = rng.random_range(0.0..0.9) / (2.0 * SQRT_2 * beta * beta * gamma);
            let f = smale_majorant(gamma);
            let consts = ProblemConstants::from_beta(c, beta, f64::INFINITY);
            let bisected = radius_set(&f, &consts).unwrap();
            let closed = closed_form_radii(&MajorantKind::Smale { gamma }, &consts).unwrap();
            assert!((bisected.rho - closed.rho).abs() <= 1e-10 * closed.rho);
        }
    }

    #[test]
    fn smale_sigma_closed_form_disagrees_for_positive_residual() {
        // The printed uniqueness constant omega_1 lacks a gamma factor on the
        // c term; bisection of the defining inequality is authoritative.
        let gamma = 3.0;
        let consts = ProblemConstants::from_beta(0.05, 1.0, 10.0);
        let f = smale_majorant(gamma);
        let bisected = radius_set(&f, &consts).unwrap().sigma.unwrap();
        let closed = closed_form_radii(&MajorantKind::Smale { gamma }, &consts)
            .unwrap()
            .sigma
            .unwrap();
        // The defining inequality holds strictly below the bisected sigma...
        let g =
            |t: f64| 1.0 * (f.eval(t) / t + 1.0) + consts.c * consts.beta0 * (f.deriv(t) + 1.0) / t;
        assert!(g(bisected * (1.0 - 1e-6)) < 1.0);
        assert!(g(bisected * (1.0 + 1e-6)) > 1.0);
        // ...while the printed closed form misses the root for c > 0.
        let rel = (closed - bisected).abs() / bisected;
        assert!(
            rel > 1e-6,
            "expected the printed Smale sigma to disagree, rel diff {rel:.3e}"
        );
        // Corrected constant (gamma restored) does match the bisection.
        let w1 = 2.0 + consts.beta - consts.c * consts.beta0 * gamma;
        let w2 = 4.0 * (1.0 + consts.beta) * (1.0 - 2.0 * consts.c * consts.beta0 * gamma);
        let corrected = (w1 - (w1 * w1 - w2).sqrt()) / (2.0 * gamma * (1.0 + consts.beta));
        assert!((corrected - bisected).abs() <= 1e-9 * bisected);
    }

    #[test]
    fn radius_set_invariants() {
        let f = smale_majorant(2.0);
        let consts = ProblemConstants::from_beta(0.01, 1.5, 0.2);
        let rs = radius_set(&f, &consts).unwrap();
        assert!(rs.rho > 0.0 && rs.rho <= rs.nu * (1.0 + 1e-12));
        assert!((rs.r - rs.rho.min(consts.kappa)).abs() == 0.0);
        assert!(rs.sigma.unwrap() <= consts.kappa);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn e_f_nonnegative_by_convexity(t in 0.0..3.0f64, u in 0.0..3.0f64, k in 0.1..5.0f64) {
            let f = lip(k);
            prop_assert!(e_f(&f, t, u) >= -1e-12);
        }

        // Monotone-bisection soundness: psi at the returned rho is 1 to
        // 1e-10 whenever the root is interior.
        #[test]
        fn psi_at_returned_rho_is_one(seed in 0u64..u64::MAX) {
            let mut rng = crate::sampling::rng(seed);
            let smale_case = seed % 2 == 0;
            let (f, admissible) = if smale_case {
                let gamma: f64 = rng.random_range(0.1..4.0);
                (smale_majorant(gamma), 0.95 / (2.0 * SQRT_2 * gamma))
            } else {
                let k: f64 = rng.random_range(0.1..4.0);
                (lip(k), 0.95 / (SQRT_2 * k))
            };
            let beta: f64 = rng.random_range(0.1..4.0);
            let c = rng.random_range(0.0..1.0) * admissible / (beta * beta);
            let nu = compute_nu(&f, beta);
            let rho = compute_rho(&f, beta, c).unwrap();
            if rho < nu {
                let v = psi(&f, beta, c, rho).unwrap();
                prop_assert!((v - 1.0).abs() <= 1e-10, "psi(rho) = {}", v);
            }
        }
    }
}
