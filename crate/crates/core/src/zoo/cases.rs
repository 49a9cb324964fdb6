//! Built-in certification cases, addressable by id.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::{
    CertificationCase, Expectation, HomotopyRun, MembershipPredicate, Tolerances,
};
use crate::curvature::deformed_metric;
use crate::error::{Error, Result};
use crate::geometry::chart::{ChartDomain, ManifoldSpec};
use crate::geometry::fields::DynAction;
use crate::geometry::forms::ConstantForm;
use crate::kernels::{
    conformal_kernel, contact_kernel, product_kernel, psh_kernel, wcs_kernel, SharedKernel,
};
use crate::loopspace::ReparametrizedAction;
use crate::quadrature::QuadratureSpec;
use crate::zoo::sphere::{HopfAction, SasakianStructure};
use crate::zoo::torus::{
    t3_contact_form, CoordinateRotation, Perturbation, ProfileOneForm, TrigPoly,
};

/// Grid nodes per axis for torus cases.
pub const TORUS_NODES: usize = 64;
/// Monte Carlo samples for cheap sphere kernels.
pub const SPHERE_SAMPLES: usize = 1_000_000;
/// Monte Carlo samples for curvature-ladder kernels on S⁵.
pub const LADDER_SAMPLES: usize = 200_000;
pub const DEFAULT_SEED: u64 = 42;
/// Reparametrization strength of the built-in homotopy.
pub const HOMOTOPY_EPSILON: f64 = 0.3;
/// Strength of the `u¹`-dependent perturbation in the negative control.
pub const PERTURBATION: f64 = 0.3;
/// ρ values with built-in S⁵ curvature cases.
pub const RHO_VALUES: [f64; 3] = [0.0, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Contact,
    Psh,
    Wcs,
    Conformal,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Contact => "contact",
            KernelKind::Psh => "psh",
            KernelKind::Wcs => "wcs",
            KernelKind::Conformal => "conformal",
        }
    }
}

fn grid_case(id: &str, section: &str, manifold: ManifoldSpec) -> CaseBuilder {
    CaseBuilder {
        id: id.into(),
        section: section.into(),
        manifold,
        quadrature: QuadratureSpec::trapezoid(TORUS_NODES),
        tolerances: Tolerances::GRID,
        probe: (64, 8),
    }
}

fn mc_case(id: &str, section: &str, manifold: ManifoldSpec, samples: usize) -> CaseBuilder {
    CaseBuilder {
        id: id.into(),
        section: section.into(),
        manifold,
        quadrature: QuadratureSpec::monte_carlo(samples, DEFAULT_SEED),
        tolerances: Tolerances::MONTE_CARLO,
        probe: (32, 6),
    }
}

struct CaseBuilder {
    id: String,
    section: String,
    manifold: ManifoldSpec,
    quadrature: QuadratureSpec,
    tolerances: Tolerances,
    probe: (usize, usize),
}

impl CaseBuilder {
    fn finish(
        self,
        kernel: (&str, SharedKernel),
        action: (&str, Arc<dyn DynAction>),
        membership: MembershipPredicate,
        expected: Expectation,
    ) -> CertificationCase {
        CertificationCase {
            id: self.id,
            section: self.section,
            kernel_name: kernel.0.into(),
            action_name: action.0.into(),
            manifold: self.manifold,
            kernel: kernel.1,
            action: action.1,
            membership,
            quadrature: self.quadrature,
            tolerances: self.tolerances,
            expected,
            homotopy: None,
            probe_points: self.probe.0,
            probe_thetas: self.probe.1,
        }
    }
}

fn torus(n: usize) -> ManifoldSpec {
    ManifoldSpec::new(format!("T{n}"), ChartDomain::torus(n))
}

fn rotation(dim: usize, speed: f64) -> Arc<dyn DynAction> {
    Arc::new(CoordinateRotation {
        dim,
        axis: 0,
        speed,
    })
}

/// `η = η₁(u²) du¹` with `μ = du¹ ∧ du²`, rotated in `u¹`.
pub fn torus2_case(eta1: TrigPoly) -> Result<CertificationCase> {
    eta1.require_positive()?;
    let eta = Arc::new(ProfileOneForm::new(1, vec![eta1, TrigPoly::constant(0.0)]));
    let mu = Arc::new(ConstantForm::volume(2));
    let kernel: SharedKernel = Arc::new(product_kernel(eta.clone(), mu.clone())?);
    Ok(grid_case("t2", "§4.2", torus(2)).finish(
        ("eta⊗du1∧du2", kernel),
        ("rotation u1", rotation(2, 1.0)),
        MembershipPredicate::FormPair { eta, mu },
        Expectation::Certified,
    ))
}

/// `η = cos u² du¹ + sin 2u² du³` with the contact kernel, rotated in `u¹`.
pub fn torus3_case() -> Result<CertificationCase> {
    t3_variant("t3", 1.0, None)
}

fn t3_variant(
    id: &str,
    speed: f64,
    perturbation: Option<Perturbation>,
) -> Result<CertificationCase> {
    let eta = t3_contact_form();
    let kernel_form = match perturbation {
        Some(p) => eta.clone().perturbed(p),
        None => eta.clone(),
    };
    let kernel: SharedKernel = Arc::new(contact_kernel(kernel_form, 1)?);
    let expected = if perturbation.is_some() {
        Expectation::NotCertified
    } else {
        Expectation::Certified
    };
    let action_name = if speed == 1.0 {
        "rotation u1"
    } else {
        "rescaled rotation u1"
    };
    Ok(grid_case(id, "§4.2", torus(3)).finish(
        ("eta⊗eta∧deta", kernel),
        (action_name, rotation(3, speed)),
        MembershipPredicate::StrictContact(Arc::new(eta)),
        expected,
    ))
}

/// S^{2m+1} with `g_ρ = g + ρ² η⊗η`, the Hopf action and the chosen kernel.
pub fn sphere_case(dim: usize, rho: f64, kind: KernelKind) -> Result<CertificationCase> {
    if dim != 3 && dim != 5 {
        return Err(Error::Incompatible(format!(
            "sphere cases exist for S3 and S5, not S{dim}"
        )));
    }
    if matches!(kind, KernelKind::Wcs | KernelKind::Conformal) && dim != 5 {
        return Err(Error::Incompatible(format!(
            "{} kernel needs S5, got S{dim}",
            kind.name()
        )));
    }
    let s = SasakianStructure::new((dim - 1) / 2);
    let manifold = s.chart.manifold();
    let g = deformed_metric(s.g, s.eta, rho)?;
    let action: Arc<dyn DynAction> = Arc::new(HopfAction(s.chart));
    let rho_tag = format_rho(rho);
    let (id, section, kernel, membership, samples): (String, &str, (&str, SharedKernel), _, usize) =
        match kind {
            KernelKind::Contact => (
                format!("s{dim}-contact"),
                "§4.1",
                (
                    "eta⊗eta∧(deta)^k",
                    Arc::new(contact_kernel(s.eta, (dim - 1) / 2)?),
                ),
                MembershipPredicate::StrictContact(Arc::new(s.eta)),
                SPHERE_SAMPLES,
            ),
            KernelKind::Psh => (
                format!("s{dim}-psh"),
                "§4.3",
                ("eta⊗dvol", Arc::new(psh_kernel(s.eta, g.clone())?)),
                MembershipPredicate::Psh {
                    eta: Arc::new(s.eta),
                    g: Arc::new(g),
                    phi: Arc::new(s.phi),
                },
                SPHERE_SAMPLES,
            ),
            KernelKind::Wcs => (
                format!("s5-wcs-rho{rho_tag}"),
                "§3",
                ("Riemann ladder", Arc::new(wcs_kernel(g.clone())?)),
                MembershipPredicate::Isometry(Arc::new(g)),
                LADDER_SAMPLES,
            ),
            KernelKind::Conformal => (
                format!("s5-conf-rho{rho_tag}"),
                "§3",
                ("Weyl ladder", Arc::new(conformal_kernel(g.clone())?)),
                MembershipPredicate::Conformal(Arc::new(g)),
                LADDER_SAMPLES,
            ),
        };
    let curvature = matches!(kind, KernelKind::Wcs | KernelKind::Conformal);
    let expected = if curvature && rho == 0.0 {
        Expectation::NotCertified
    } else {
        Expectation::Certified
    };
    Ok(mc_case(&id, section, manifold, samples).finish(
        kernel,
        ("Hopf rotation", action),
        membership,
        expected,
    ))
}

fn format_rho(rho: f64) -> String {
    format!("{rho}")
}

/// All built-in ids in listing order.
pub fn case_ids() -> Vec<String> {
    let mut ids: Vec<String> = [
        "t2",
        "t3",
        "t3-perturbed",
        "t3-reparam-homotopy",
        "t3-rescaled-C",
        "s3-contact",
        "s3-psh",
        "s5-contact",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for kind in ["wcs", "conf"] {
        for rho in RHO_VALUES {
            ids.push(format!("s5-{kind}-rho{}", format_rho(rho)));
        }
    }
    ids
}

/// Builds a case by id; `s5-wcs-rho{R}` and `s5-conf-rho{R}` accept any `R ≥ 0`.
pub fn case_by_id(id: &str) -> Result<CertificationCase> {
    match id {
        "t2" => torus2_case(TrigPoly::cos_mode(1, 1.0).plus_constant(2.0)),
        "t3" => torus3_case(),
        "t3-perturbed" => t3_variant(
            id,
            1.0,
            Some(Perturbation {
                component: 0,
                axis: 0,
                amplitude: PERTURBATION,
            }),
        ),
        "t3-rescaled-C" => {
            let mut case = t3_variant(id, 2.0, None)?;
            case.section = "§4.1".into();
            Ok(case)
        }
        "t3-reparam-homotopy" => {
            let mut case = t3_variant(id, 1.0, None)?;
            case.section = "§2".into();
            case.homotopy = Some(HomotopyRun {
                map: Arc::new(ReparametrizedAction {
                    inner: CoordinateRotation {
                        dim: 3,
                        axis: 0,
                        speed: 1.0,
                    },
                    epsilon: HOMOTOPY_EPSILON,
                }),
                quadrature: QuadratureSpec::trapezoid(16),
            });
            Ok(case)
        }
        "s3-contact" => sphere_case(3, 0.0, KernelKind::Contact),
        "s3-psh" => sphere_case(3, 0.0, KernelKind::Psh),
        "s5-contact" => sphere_case(5, 0.0, KernelKind::Contact),
        _ => {
            let parsed = id
                .strip_prefix("s5-wcs-rho")
                .map(|r| (KernelKind::Wcs, r))
                .or_else(|| {
                    id.strip_prefix("s5-conf-rho")
                        .map(|r| (KernelKind::Conformal, r))
                });
            match parsed {
                Some((kind, r)) => {
                    let rho: f64 = r.parse().map_err(|_| Error::UnknownCase(id.into()))?;
                    if !(rho >= 0.0 && rho.is_finite()) {
                        return Err(Error::UnknownCase(id.into()));
                    }
                    sphere_case(5, rho, kind)
                }
                None => Err(Error::UnknownCase(id.into())),
            }
        }
    }
}

/// Validates an id without building the case.
pub fn is_known(id: &str) -> bool {
    case_ids().iter().any(|k| k == id) || {
        let rest = id
            .strip_prefix("s5-wcs-rho")
            .or_else(|| id.strip_prefix("s5-conf-rho"));
        rest.and_then(|r| r.parse::<f64>().ok())
            .is_some_and(|r| r >= 0.0 && r.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in case_ids() {
            let case = case_by_id(&id).unwrap();
            assert_eq!(case.id, id);
            assert!(is_known(&id));
        }
        assert!(case_ids().len() >= 9);
        assert!(matches!(case_by_id("t4"), Err(Error::UnknownCase(_))));
        assert!(!is_known("s5-conf-rho-1"));
        assert!(is_known("s5-conf-rho2.5"));
    }

    #[test]
    fn incompatible_sphere_kernels_rejected() {
        assert!(matches!(
            sphere_case(3, 1.0, KernelKind::Wcs),
            Err(Error::Incompatible(_))
        ));
        assert!(matches!(
            sphere_case(7, 0.0, KernelKind::Contact),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn nonpositive_profile_rejected() {
        assert!(matches!(
            torus2_case(TrigPoly::cos_mode(1, 1.0)),
            Err(Error::NonPositiveProfile { .. })
        ));
    }
}
