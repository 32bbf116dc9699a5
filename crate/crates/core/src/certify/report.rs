//! Stable JSON schema for certificates and validation reports:
//!
//! `{problem, norm: "spectral", constants: {c, beta, beta0, kappa},
//!   majorant: {kind, params, source}, radii: {nu, rho, r, sigma, h3, h4},
//!   q2: [{t0, quad, lin}], validation: {...}}`
//!
//! Field names are fixed; an absent `sigma` serializes as `null`, and an
//! unbounded `kappa` serializes as `null`. Serialization is deterministic
//! for identical inputs (ordered maps, fixed field order).

use serde::{Serialize, Serializer};

use super::{
    Certificate, CycleDemo, EmpiricalRadius, MajorantConditionCheck, Q2Check, UniquenessProbe,
};

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsJson {
    pub c: f64,
    pub beta: f64,
    pub beta0: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MajorantJson {
    pub kind: String,
    pub params: std::collections::BTreeMap<String, f64>,
    pub source: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiiJson {
    pub nu: f64,
    pub rho: f64,
    pub r: f64,
    pub sigma: Option<f64>,
    pub h3: bool,
    pub h4: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Q2RowJson {
    pub t0: f64,
    pub quad: f64,
    pub lin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MajorantConditionJson {
    pub pass: bool,
    pub worst_margin: f64,
    pub samples: usize,
}

impl From<&MajorantConditionCheck> for MajorantConditionJson {
    fn from(c: &MajorantConditionCheck) -> Self {
        MajorantConditionJson {
            pass: c.pass,
            worst_margin: c.worst_margin,
            samples: c.samples,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Q2SweepJson {
    pub pass: bool,
    pub starts: usize,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalRadiusJson {
    pub per_direction: Vec<f64>,
    pub min: f64,
    pub theoretical_r: f64,
    pub ratio: f64,
}

impl EmpiricalRadiusJson {
    pub fn new(emp: &EmpiricalRadius, theoretical_r: f64) -> Self {
        EmpiricalRadiusJson {
            per_direction: emp.per_direction.clone(),
            min: emp.min,
            theoretical_r,
            ratio: emp.min / theoretical_r,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessJson {
    pub sigma: f64,
    pub starts: usize,
    pub clusters_in_ball: usize,
    pub clusters_total: usize,
}

impl UniquenessJson {
    pub fn new(probe: &UniquenessProbe, sigma: f64, starts: usize) -> Self {
        UniquenessJson {
            sigma,
            starts,
            clusters_in_ball: probe.clusters_in_ball,
            clusters_total: probe.clusters_total,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleDemoJson {
    pub rho: f64,
    pub x0: f64,
    pub iterates: Vec<f64>,
    pub cycle: bool,
    pub amplitude: f64,
    pub period2_residual: f64,
}

impl From<&CycleDemo> for CycleDemoJson {
    fn from(d: &CycleDemo) -> Self {
        CycleDemoJson {
            rho: d.rho,
            x0: d.x0,
            iterates: d.iterates.clone(),
            cycle: d.cycle_detected,
            amplitude: d.amplitude,
            period2_residual: d.period2_residual,
        }
    }
}

/// Per-problem validation block.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationJson {
    pub majorant_condition: Option<MajorantConditionJson>,
    pub q2: Option<Q2SweepJson>,
    pub empirical_radius: Option<EmpiricalRadiusJson>,
    pub uniqueness: Option<UniquenessJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateJson {
    pub problem: String,
    pub norm: &'static str,
    pub constants: ConstantsJson,
    pub majorant: MajorantJson,
    pub radii: RadiiJson,
    pub q2: Vec<Q2RowJson>,
    pub validation: Option<ValidationJson>,
}

impl CertificateJson {
    /// Serializable snapshot of a certificate with `rows` tabulated
    /// error-coefficient anchors.
    pub fn new(cert: &Certificate, rows: usize, validation: Option<ValidationJson>) -> Self {
        let majorant = match &cert.majorant {
            Some(f) => MajorantJson {
                kind: f.kind().name().to_string(),
                params: f.kind().params(),
                source: cert.majorant_source.as_str().to_string(),
            },
            None => MajorantJson {
                kind: "unconditional".to_string(),
                params: Default::default(),
                source: cert.majorant_source.as_str().to_string(),
            },
        };
        CertificateJson {
            problem: cert.problem.clone(),
            norm: "spectral",
            constants: ConstantsJson {
                c: cert.constants.c,
                beta: cert.constants.beta,
                beta0: cert.constants.beta0,
                kappa: cert.constants.kappa,
            },
            majorant,
            radii: RadiiJson {
                nu: cert.radii.nu,
                rho: cert.radii.rho,
                r: cert.radii.r,
                sigma: cert.radii.sigma,
                h3: cert.radii.h3_satisfied,
                h4: cert.radii.h4_satisfied,
            },
            q2: cert
                .q2_table(rows)
                .into_iter()
                .map(|(t0, q)| Q2RowJson {
                    t0,
                    quad: q.quad,
                    lin: q.lin,
                })
                .collect(),
            validation,
        }
    }
}

/// Summary of the `Q2Check` sweep over many starts.
pub fn q2_sweep_json(checks: &[Q2Check]) -> Q2SweepJson {
    let worst = checks
        .iter()
        .flat_map(|c| c.margins.iter().copied())
        .fold(f64::INFINITY, f64::min);
    Q2SweepJson {
        pass: checks.iter().all(|c| c.pass),
        starts: checks.len(),
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{build_certificate, MajorantSource};
    use crate::majorant::lipschitz_majorant;
    use crate::problems;

    #[test]
    fn schema_field_names_are_stable() {
        let p = problems::make_scalar_quadratic();
        let cert = build_certificate(
            &p,
            lipschitz_majorant(2.0, f64::INFINITY),
            MajorantSource::Registry,
        )
        .unwrap();
        let json = serde_json::to_value(CertificateJson::new(&cert, 3, None)).unwrap();
        assert_eq!(json["norm"], "spectral");
        for key in ["c", "beta", "beta0", "kappa"] {
            assert!(json["constants"].get(key).is_some(), "missing {key}");
        }
        for key in ["nu", "rho", "r", "sigma", "h3", "h4"] {
            assert!(json["radii"].get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["majorant"]["kind"], "lipschitz");
        assert_eq!(json["majorant"]["params"]["K"], 2.0);
        assert_eq!(json["q2"].as_array().unwrap().len(), 3);
        assert!(json["validation"].is_null());
        // sigma present for this certificate; row fields fixed
        assert!(json["radii"]["sigma"].is_number());
        for key in ["t0", "quad", "lin"] {
            assert!(json["q2"][0].get(key).is_some());
        }
    }

    #[test]
    fn absent_sigma_serializes_as_null() {
        let p = problems::make_ds_family(0.45);
        // c = sqrt(2), beta0 = 1/2, K = 0.9 -> h4 = 2*sqrt(2)*0.5*0.9 = 1.27 >= 1
        let cert = build_certificate(
            &p,
            lipschitz_majorant(0.9, f64::INFINITY),
            MajorantSource::Registry,
        )
        .unwrap();
        assert!(!cert.radii.h4_satisfied);
        let json = serde_json::to_value(CertificateJson::new(&cert, 2, None)).unwrap();
        assert!(json["radii"]["sigma"].is_null());
        assert_eq!(json["radii"]["h4"], false);
    }

    #[test]
    fn unbounded_kappa_serializes_as_null() {
        use crate::solver::ResidualProblem;
        use crate::{Matrix, Vector};
        // Unbounded domain and an unbounded Lipschitz majorant: kappa = inf.
        let p = ResidualProblem::new(
            "unbounded",
            1,
            2,
            |x: &Vector| Vector::from_vec(vec![x[0] - 1.0, (x[0] - 1.0) * (x[0] - 1.0)]),
            |x: &Vector| Matrix::from_column_slice(2, 1, &[1.0, 2.0 * (x[0] - 1.0)]),
            Vector::from_vec(vec![1.0]),
            f64::INFINITY,
        )
        .unwrap()
        .with_solution(Vector::from_vec(vec![1.0]))
        .unwrap();
        let cert = build_certificate(
            &p,
            lipschitz_majorant(2.0, f64::INFINITY),
            MajorantSource::Supplied,
        )
        .unwrap();
        assert!(cert.constants.kappa.is_infinite());
        let json = serde_json::to_value(CertificateJson::new(&cert, 2, None)).unwrap();
        assert!(json["constants"]["kappa"].is_null());
        assert!(json["radii"]["sigma"].is_number());
    }
}
