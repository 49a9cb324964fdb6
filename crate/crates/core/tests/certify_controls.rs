//! Negative controls and the signed-constant path of the invariance fit.

use std::sync::Arc;

use pi1_core::certify::{
    certify, check_invariance, check_membership, Condition, MembershipPredicate, Verdict,
};
use pi1_core::geometry::chart::{ChartDomain, ManifoldSpec};
use pi1_core::geometry::forms::ConstantForm;
use pi1_core::kernels::product_kernel;
use pi1_core::zoo::cases::case_by_id;
use pi1_core::zoo::sphere::{HopfAction, HopfChart, SasakianStructure};
use pi1_core::zoo::torus::{
    ConjugatedAction, CoordinateRotation, ProfileOneForm, ReflectedRotation, SineShear, TrigPoly,
};

#[test]
fn sheared_rotation_is_not_a_strict_contactomorphism() {
    let mut case = case_by_id("t3").unwrap();
    case.action = Arc::new(ConjugatedAction {
        inner: CoordinateRotation {
            dim: 3,
            axis: 0,
            speed: 1.0,
        },
        shear: SineShear {
            dim: 3,
            target: 1,
            source: 0,
            epsilon: 0.4,
        },
    });
    let stats = check_membership(
        &case.membership,
        case.action.as_ref(),
        &case.probe(),
        &case.thetas(),
    )
    .unwrap();
    assert!(stats.max_residual > 1e-2, "{}", stats.max_residual);
    let report = certify(&case).unwrap();
    assert_eq!(report.verdict, Verdict::Failed(Condition::Membership));
    assert!(!report.expectation_met);
}

#[test]
fn only_the_hopf_rotation_preserves_the_deformed_metric() {
    // g_ρ is Hopf-invariant, but rotating the bounded angle alone is not an isometry.
    let chart = HopfChart::new(1);
    let s = SasakianStructure::new(1);
    let pred = MembershipPredicate::Isometry(Arc::new(
        pi1_core::curvature::deformed_metric(s.g, s.eta, 0.7).unwrap(),
    ));
    let points = pi1_core::certify::probe_points(&chart.manifold(), 16);
    let ok = check_membership(&pred, &HopfAction(chart), &points, &[0.5, 2.0]).unwrap();
    assert!(ok.max_residual < 1e-10);
    let rot = CoordinateRotation {
        dim: 3,
        axis: 1,
        speed: 1.0,
    };
    let bad = check_membership(&pred, &rot, &points, &[0.5, 2.0]).unwrap();
    assert!(bad.max_residual > 1e-2, "{}", bad.max_residual);
}

#[test]
fn reflected_rotation_fits_minus_one() {
    let eta = Arc::new(ProfileOneForm::new(
        1,
        vec![TrigPoly::constant(2.0), TrigPoly::constant(0.0)],
    ));
    let kernel = product_kernel(eta, Arc::new(ConstantForm::volume(2))).unwrap();
    let m = ManifoldSpec::new("T2", ChartDomain::torus(2));
    let points = pi1_core::certify::probe_points(&m, 32);
    let fit = check_invariance(
        &kernel,
        &ReflectedRotation { epsilon: 0.0 },
        &points,
        &[0.3, 1.9, 4.4],
    )
    .unwrap();
    assert!((fit.c + 1.0).abs() < 1e-12, "{}", fit.c);
    assert!(fit.max_residual < 1e-12);
}
