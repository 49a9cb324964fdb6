//! Zoo cases against closed forms computed independently of the engine.

use std::f64::consts::{PI, TAU};

use pi1_core::certify::{certify, check_invariance, Condition, Verdict};
use pi1_core::zoo::cases::{case_by_id, case_ids, is_known, torus2_case};
use pi1_core::zoo::torus::TrigPoly;

/// Mean of a 2π-periodic function by a plain midpoint sum.
fn periodic_mean(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    (0..n)
        .map(|i| f(TAU * (i as f64 + 0.5) / n as f64))
        .sum::<f64>()
        / n as f64
}

#[test]
fn t2_kernel_integral_matches_one_dimensional_oracle() {
    // ∫_{T²} η(∂₁) du¹du² = 2π ∫ η₁(u²) du².
    let oracle = TAU * TAU * periodic_mean(|u| 2.0 + u.cos(), 4096);
    let report = certify(&case_by_id("t2").unwrap()).unwrap();
    assert_eq!(report.verdict, Verdict::Certified);
    let k = report.obstruction.kernel_integral.value;
    assert!((k - oracle).abs() / oracle < 1e-8, "{k} vs {oracle}");
    assert!((oracle - 8.0 * PI * PI).abs() < 1e-10);
    assert!((report.obstruction.value - TAU * oracle).abs() / oracle < 1e-8);
}

#[test]
fn t2_family_tracks_profile_mean() {
    for (c, a) in [(1.5, 0.5), (3.0, 2.0), (1.1, -1.0)] {
        let profile = TrigPoly::cos_mode(2, a).plus_constant(c);
        let report = certify(&torus2_case(profile).unwrap()).unwrap();
        let oracle = TAU * TAU * c;
        assert!((report.obstruction.kernel_integral.value - oracle).abs() / oracle < 1e-10);
    }
}

#[test]
fn t3_value_matches_hand_expansion() {
    // η = cos u² du¹ + sin 2u² du³, ξ = ∂₁:
    // η(ξ) η∧dη = cos u (2 cos u cos 2u + sin u sin 2u) du¹du²du³.
    let mean = periodic_mean(
        |u| u.cos() * (2.0 * u.cos() * (2.0 * u).cos() + u.sin() * (2.0 * u).sin()),
        4096,
    );
    let oracle = TAU.powi(3) * mean;
    assert!((oracle - 6.0 * PI.powi(3)).abs() < 1e-9);
    let report = certify(&case_by_id("t3").unwrap()).unwrap();
    assert_eq!(report.verdict, Verdict::Certified);
    let k = report.obstruction.kernel_integral.value;
    assert!((k - oracle).abs() / oracle < 1e-8, "{k} vs {oracle}");
}

#[test]
fn perturbed_t3_fails_invariance() {
    let report = certify(&case_by_id("t3-perturbed").unwrap()).unwrap();
    assert_eq!(report.verdict, Verdict::Failed(Condition::Invariance));
    assert!(report.expectation_met);
    assert!(report.invariance.unwrap().max_residual > 1e-2);
}

#[test]
fn rescaled_rotation_doubles_the_obstruction() {
    let base = certify(&case_by_id("t3").unwrap()).unwrap();
    let fast = certify(&case_by_id("t3-rescaled-C").unwrap()).unwrap();
    assert_eq!(fast.verdict, Verdict::Certified);
    let ratio = fast.obstruction.value / base.obstruction.value;
    assert!((ratio - 2.0).abs() < 1e-10, "{ratio}");
}

#[test]
fn reparametrization_homotopy_keeps_endpoint_integrals() {
    let report = certify(&case_by_id("t3-reparam-homotopy").unwrap()).unwrap();
    let h = report.homotopy.expect("homotopy run");
    assert!(h.difference < 1e-6);
    assert!((h.start.value - 12.0 * PI.powi(4)).abs() < 1e-6);
}

#[test]
fn s3_contact_and_psh_match_closed_forms() {
    let contact = certify(&case_by_id("s3-contact").unwrap()).unwrap();
    let psh = certify(&case_by_id("s3-psh").unwrap()).unwrap();
    for (r, truth) in [(&contact, 8.0 * PI.powi(3)), (&psh, 4.0 * PI.powi(3))] {
        assert_eq!(r.verdict, Verdict::Certified, "{}", r.case);
        let o = &r.obstruction;
        assert!(
            (o.value - truth).abs() < 5.0 * o.error,
            "{}: {} ± {}",
            r.case,
            o.value,
            o.error
        );
    }
}

#[test]
fn every_listed_id_builds_and_has_a_section() {
    let ids = case_ids();
    assert!(ids.len() >= 9);
    for id in &ids {
        assert!(is_known(id));
        let case = case_by_id(id).unwrap();
        assert_eq!(&case.id, id);
        assert!(case.section.starts_with('§'));
    }
    assert!(!is_known("s7-contact"));
    assert!(case_by_id("s5-wcs-rho-1").is_err());
}

#[test]
fn round_sphere_curvature_kernels_vanish_identically() {
    for id in ["s5-wcs-rho0", "s5-conf-rho0"] {
        let case = case_by_id(id).unwrap();
        let points = case.probe();
        let err = check_invariance(
            case.kernel.as_ref(),
            case.action.as_ref(),
            &points,
            &case.thetas(),
        )
        .unwrap_err();
        assert_eq!(err, pi1_core::Error::ZeroKernel, "{id}");
    }
}
