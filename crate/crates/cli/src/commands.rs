//! Command implementations. Each returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use gncert::certify::{self, report::CertificateJson, Certificate, CertifyError, MajorantSource};
use gncert::majorant::{self, MajorantError, MajorantFunction, MajorantKind};
use gncert::problems::{self, KnownConstants};
use gncert::sampling;
use gncert::solver::{solve, ResidualProblem, SolveOptions, SolveStatus};
use gncert::suite;
use gncert::Vector;

use crate::args::{self, Cli, Command, CommonArgs, SolveArgs, StartSpec, SuiteArgs, WorstCaseArgs};

pub fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Radius(args) => cmd_radius(args),
        Command::WorstCase(args) => cmd_worst_case(args),
        Command::Suite(args) => cmd_suite(args),
    }
}

/// A resolved problem: the instance plus registry constants when it came
/// from the registry.
struct Resolved {
    problem: ResidualProblem,
    known: Option<KnownConstants>,
    /// Majorant forced by the command line (or required by worst_case).
    majorant: Option<(MajorantFunction, MajorantSource)>,
}

fn resolve(common: &CommonArgs) -> Result<Resolved, String> {
    let params = args::parse_params(&common.params)?;
    let supplied = common
        .majorant
        .as_deref()
        .map(args::parse_majorant)
        .transpose()?;
    if common.problem == "worst_case" {
        let kind = supplied.ok_or("worst_case needs --majorant")?;
        let beta = common.beta.ok_or("worst_case needs --beta")?;
        if beta.is_nan() || beta <= 0.0 {
            return Err("--beta must be > 0".into());
        }
        let kappa = params.get("kappa").copied().unwrap_or(1e3);
        let majorant = instantiate(&kind)?;
        let problem = certify::worst_case_problem(&majorant, beta, kappa);
        return Ok(Resolved {
            problem,
            known: None,
            majorant: Some((majorant, MajorantSource::Supplied)),
        });
    }
    let spec = problems::find(&common.problem, &params).map_err(|e| e.to_string())?;
    let problem = spec.build();
    let majorant = supplied
        .map(|kind| Ok::<_, String>((instantiate(&kind)?, MajorantSource::Supplied)))
        .transpose()?;
    Ok(Resolved {
        problem,
        known: Some(spec.known),
        majorant,
    })
}

fn instantiate(kind: &MajorantKind) -> Result<MajorantFunction, String> {
    majorant::majorant_for_kind(kind, f64::INFINITY).map_err(|e| e.to_string())
}

/// Builds the certificate for a resolved problem, honoring a supplied
/// majorant and falling back to the registry plan.
fn certificate_for(resolved: &Resolved, seed: u64) -> Result<Certificate, CertifyError> {
    if let Some((majorant, source)) = &resolved.majorant {
        return certify::build_certificate(&resolved.problem, majorant.clone(), *source);
    }
    let known = resolved
        .known
        .as_ref()
        .expect("registry problems have constants");
    certify::certify_auto(&resolved.problem, known, seed)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match out {
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

// --- solve -----------------------------------------------------------------

#[derive(Serialize)]
struct SolveSummary {
    problem: String,
    status: SolveStatus,
    iters: usize,
    final_error: Option<f64>,
    final_gradient_norm: f64,
    fitted_order: Option<f64>,
}

fn cmd_solve(args: SolveArgs) -> Result<i32, String> {
    let resolved = resolve(&args.common)?;
    let problem = &resolved.problem;
    let x0 = match args::parse_x0(&args.x0)? {
        StartSpec::Explicit(values) => {
            if values.len() != problem.dim() {
                return Err(format!(
                    "x0 has dimension {}, problem needs {}",
                    values.len(),
                    problem.dim()
                ));
            }
            Vector::from_vec(values)
        }
        StartSpec::Auto { delta, dir_seed } => {
            let x_star = problem
                .x_star()
                .ok_or("auto start needs a problem with a known solution")?;
            let mut rng = sampling::rng(dir_seed);
            let dir = sampling::unit_vector(&mut rng, problem.dim());
            x_star + dir * delta
        }
    };
    let opts = SolveOptions {
        max_iters: args.max_iters.unwrap_or(100),
        grad_tol: args.tol_grad,
        divergence_radius: None,
    };
    let trace = solve(problem, &x0, &opts);
    let fitted_order = certify::fit_convergence_order(&trace)
        .ok()
        .map(|f| f.order_estimate);
    let summary = SolveSummary {
        problem: problem.name().to_string(),
        status: trace.status,
        iters: trace.steps(),
        final_error: trace.final_error(),
        final_gradient_norm: trace.final_gradient_norm(),
        fitted_order,
    };
    if let Some(out) = &args.common.out {
        let csv = csv_path(out);
        fs::write(&csv, trace.to_csv_string())
            .map_err(|e| format!("cannot write {}: {e}", csv.display()))?;
        write_json(&summary, Some(out.with_extension("json").as_path()))?;
        eprintln!(
            "trace -> {}, summary -> {}",
            csv.display(),
            out.with_extension("json").display()
        );
    }
    // Machine-readable summary always lands on stdout.
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    let converged_to_solution = trace.status == SolveStatus::Converged
        && trace
            .final_error()
            .is_none_or(|e| e <= certify::CONVERGED_ERROR_TOL);
    Ok(if converged_to_solution { 0 } else { 2 })
}

// --- certify -----------------------------------------------------------------

fn cmd_certify(args: CommonArgs) -> Result<i32, String> {
    let seed = args::resolve_seed(args.seed);
    let resolved = resolve(&args)?;
    let cert = match certificate_for(&resolved, seed) {
        Ok(cert) => cert,
        Err(CertifyError::Majorant(MajorantError::H3Violated { product })) => {
            eprintln!(
                "h3 violated: sqrt(2)*c*beta^2*D+f'(0) = {product} >= 1; \
                 no convergence radius is certified in the large-residual regime"
            );
            return Ok(3);
        }
        Err(e) => return Err(e.to_string()),
    };
    print_certificate_table(&cert);
    let json = CertificateJson::new(&cert, 9, None);
    write_json(&json, args.out.as_deref())?;
    Ok(0)
}

fn print_certificate_table(cert: &Certificate) {
    let radii = &cert.radii;
    eprintln!("certificate for '{}' (spectral norm)", cert.problem);
    eprintln!("  c      = {:.12e}", cert.constants.c);
    eprintln!("  beta   = {:.12e}", cert.constants.beta);
    eprintln!("  beta0  = {:.12e}", cert.constants.beta0);
    eprintln!("  kappa  = {:.12e}", cert.constants.kappa);
    eprintln!("  nu     = {:.12e}", radii.nu);
    eprintln!("  rho    = {:.12e}", radii.rho);
    eprintln!("  r      = {:.12e}", radii.r);
    match radii.sigma {
        Some(s) => eprintln!("  sigma  = {:.12e}", s),
        None => eprintln!("  sigma  = (h4 violated; uniqueness not certified)"),
    }
}

// --- radius -----------------------------------------------------------------

#[derive(Serialize)]
struct RadiusComparison {
    problem: String,
    theoretical_r: f64,
    probe_t_max: f64,
    empirical_per_direction: Vec<f64>,
    empirical_radius: f64,
    ratio: f64,
    sound: bool,
}

fn cmd_radius(args: CommonArgs) -> Result<i32, String> {
    let seed = args::resolve_seed(args.seed);
    let resolved = resolve(&args)?;
    let cert = match certificate_for(&resolved, seed) {
        Ok(cert) => cert,
        Err(CertifyError::Majorant(MajorantError::H3Violated { product })) => {
            eprintln!("h3 violated (product {product}); no certified radius to compare");
            return Ok(3);
        }
        Err(e) => return Err(e.to_string()),
    };
    let problem = &resolved.problem;
    let kappa_dom = problem
        .radius_around_solution()
        .expect("certified problems have solutions");
    let t_max = (kappa_dom * 0.99).min(4.0 * cert.radii.r.max(0.25));
    let emp =
        certify::empirical_radius(problem, 8, t_max, 1e-8, seed).map_err(|e| e.to_string())?;
    let theoretical_capped = cert.radii.r.min(t_max);
    let sound = suite::radius_soundness_ok(emp.min, theoretical_capped);
    let comparison = RadiusComparison {
        problem: problem.name().to_string(),
        theoretical_r: cert.radii.r,
        probe_t_max: t_max,
        empirical_per_direction: emp.per_direction.clone(),
        empirical_radius: emp.min,
        ratio: emp.min / theoretical_capped,
        sound,
    };
    write_json(&comparison, args.out.as_deref())?;
    if !sound {
        eprintln!(
            "soundness violated: empirical radius {} < certified {}",
            emp.min, theoretical_capped
        );
        return Ok(4);
    }
    Ok(0)
}

// --- worst-case ---------------------------------------------------------------

fn cmd_worst_case(args: WorstCaseArgs) -> Result<i32, String> {
    let kind = args::parse_majorant(&args.majorant)?;
    let majorant = instantiate(&kind)?;
    if args.beta.is_nan() || args.beta <= 0.0 {
        return Err("--beta must be > 0".into());
    }
    let demo =
        certify::worst_case_cycle_demo(&majorant, args.beta, args.kappa, args.x0, args.max_iters)
            .map_err(|e| e.to_string())?;
    let json = gncert::certify::report::CycleDemoJson::from(&demo);
    write_json(&json, args.out.as_deref())?;
    if args.x0.is_none() && !demo.cycle_detected {
        eprintln!(
            "no period-2 cycle detected from rho = {} (residual {})",
            demo.rho, demo.period2_residual
        );
        return Ok(5);
    }
    Ok(0)
}

// --- suite -----------------------------------------------------------------

#[derive(Serialize)]
struct SuiteOutput {
    #[serde(flatten)]
    report: suite::SuiteReport,
    determinism: suite::CriterionResult,
}

fn cmd_suite(args: SuiteArgs) -> Result<i32, String> {
    let seed = args::resolve_seed(args.seed);
    let report = suite::run_core(seed);
    // Criterion 11: a second run must render byte-identically.
    let second = suite::run_core(seed);
    let identical = suite::render_report(&report) == suite::render_report(&second);
    let determinism = suite::CriterionResult {
        id: 11,
        name: "Byte-identical reports under a fixed seed",
        passed: identical,
        detail: if identical {
            "two runs rendered identically".to_string()
        } else {
            "renders differ".to_string()
        },
    };
    let mut all = report.all_passed && determinism.passed;
    for c in report.criteria.iter().chain(std::iter::once(&determinism)) {
        eprintln!(
            "criterion {:>2} {}: {} — {}",
            c.id,
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        all &= c.passed;
    }
    let output = SuiteOutput {
        report,
        determinism,
    };
    write_json(&output, args.out.as_deref())?;
    Ok(if all { 0 } else { 2 })
}
