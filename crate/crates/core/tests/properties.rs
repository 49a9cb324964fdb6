use std::f64::consts::TAU;

use proptest::prelude::*;

use pi1_core::certify::{decide, Condition, InvarianceFit, Tolerances, Verdict};
use pi1_core::curvature::{conformal_rescale, curvature_at, weyl};
use pi1_core::geometry::chart::{ChartDomain, ManifoldSpec};
use pi1_core::geometry::fields::{MetricField, ScalarField};
use pi1_core::kernels::{kernel_component, pullback_kernel_values};
use pi1_core::loopspace::{
    action_pullback_density, eval_loop_form, iterate_action, DiscreteLoop, LoopTangentFrame,
};
use pi1_core::quadrature::{integrate_density, QuadratureSpec};
use pi1_core::real::Real;
use pi1_core::verify::{riemann_symmetry_residual, trace_residual};
use pi1_core::zoo::cases::case_by_id;

const N: usize = 4;

/// `g_ij = 2δ_ij + 0.3 c_ij sin(x_i + x_j + p_ij)`, diagonally dominant.
#[derive(Debug, Clone)]
struct WobblyMetric {
    c: Vec<f64>,
    p: Vec<f64>,
}

impl MetricField for WobblyMetric {
    fn dim(&self) -> usize {
        N
    }
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> {
        let mut m = vec![S::zero(); N * N];
        for i in 0..N {
            for j in 0..N {
                let (a, b) = (i.min(j), i.max(j));
                let k = a * N + b;
                m[i * N + j] = (x[i] + x[j] + self.p[k]).sin() * (0.3 * self.c[k]);
                if i == j {
                    m[i * N + j] += S::from(2.0);
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
struct Bump {
    a: Vec<f64>,
}

impl ScalarField for Bump {
    fn dim(&self) -> usize {
        N
    }
    fn value<S: Real>(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for (i, &a) in self.a.iter().enumerate() {
            acc += (x[i] * (i as f64 + 1.0)).cos() * a;
        }
        acc.exp()
    }
}

fn wobbly() -> impl Strategy<Value = WobblyMetric> {
    (
        prop::collection::vec(-1.0..1.0f64, N * N),
        prop::collection::vec(0.0..TAU, N * N),
    )
        .prop_map(|(c, p)| WobblyMetric { c, p })
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..TAU, n)
}

fn matrix3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 9)
}

fn matmul3(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            c[i * 3 + j] = (0..3).map(|k| a[i * 3 + k] * b[k * 3 + j]).sum();
        }
    }
    c
}

fn inversions(p: &[usize]) -> usize {
    (0..p.len())
        .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| p[i] > p[j])
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riemann_symmetries_hold_for_any_metric(g in wobbly(), x in point(N)) {
        let p = curvature_at(&g, &x).unwrap();
        prop_assert!(riemann_symmetry_residual(&p) < 1e-9);
        prop_assert!(trace_residual(&p, &weyl(&p).unwrap()) < 1e-9);
    }

    #[test]
    fn weyl_is_conformally_invariant(g in wobbly(), a in prop::collection::vec(-0.5..0.5f64, N), x in point(N)) {
        let rescaled = conformal_rescale(g.clone(), Bump { a }, std::slice::from_ref(&x)).unwrap();
        let c0 = weyl(&curvature_at(&g, &x).unwrap()).unwrap();
        let c1 = weyl(&curvature_at(&rescaled, &x).unwrap()).unwrap();
        for (u, v) in c0.iter().zip(&c1) {
            prop_assert!((u - v).abs() < 1e-8 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn kernel_pullback_is_contravariant(a in matrix3(), b in matrix3(), k in prop::collection::vec(-3.0..3.0f64, 3)) {
        // (f∘h)* k = h* f* k, with J_{f∘h} = J_f J_h.
        let composed = pullback_kernel_values(3, &matmul3(&a, &b), &k);
        let stepwise = pullback_kernel_values(3, &b, &pullback_kernel_values(3, &a, &k));
        for (u, v) in composed.iter().zip(&stepwise) {
            prop_assert!((u - v).abs() < 1e-9 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn kernel_components_follow_permutation_sign(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), nu in 0usize..4) {
        let values = [1.25, -0.5, 3.0, 7.5];
        let sign = if inversions(&perm).is_multiple_of(2) { 1.0 } else { -1.0 };
        prop_assert_eq!(kernel_component(&values, nu, &perm), sign * values[nu]);
    }

    #[test]
    fn loop_form_is_alternating(x in point(3), a in 0usize..3, b in 0usize..3, mix in prop::collection::vec(-1.0..1.0f64, 9)) {
        let case = case_by_id("t3").unwrap();
        let gamma = DiscreteLoop::orbit(case.action.as_ref(), &x, 32).unwrap();
        let fields: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|i| {
                (0..32)
                    .map(|j| {
                        let t = TAU * j as f64 / 32.0;
                        (0..3).map(|c| mix[i * 3 + c] + 0.2 * (t + c as f64).sin()).collect()
                    })
                    .collect()
            })
            .collect();
        let frame = LoopTangentFrame::new(fields).unwrap();
        let v = eval_loop_form(case.kernel.as_ref(), &gamma, &frame).unwrap();
        let w = eval_loop_form(case.kernel.as_ref(), &gamma, &frame.clone().swapped(a, b)).unwrap();
        let expect = if a == b { v } else { -v };
        prop_assert!((w - expect).abs() < 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn iterate_density_scales_linearly(x in point(3), n in 1u32..7) {
        let case = case_by_id("t3").unwrap();
        let base = action_pullback_density(case.action.as_ref(), case.kernel.as_ref(), &x, 64).unwrap();
        let it = iterate_action(case.action.clone(), n).unwrap();
        let scaled = action_pullback_density(&it, case.kernel.as_ref(), &x, 64).unwrap();
        prop_assert!((scaled - n as f64 * base).abs() < 1e-10 * (1.0 + base.abs() * n as f64));
    }

    #[test]
    fn monte_carlo_is_a_function_of_the_seed(seed in any::<u64>(), samples in 2usize..20_000) {
        let m = ManifoldSpec::new("T2", ChartDomain::torus(2));
        let q = QuadratureSpec::monte_carlo(samples, seed);
        let f = |x: &[f64]| Ok(x[0].sin() * x[1].cos() + 1.0);
        let a = integrate_density(&m, &q, f).unwrap();
        let b = integrate_density(&m, &q, f).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
    }

    #[test]
    fn reversing_orientation_negates(c in prop::collection::vec(-2.0..2.0f64, 3), mc in any::<bool>()) {
        let m = ManifoldSpec::new("T3", ChartDomain::torus(3));
        let q = if mc { QuadratureSpec::monte_carlo(5_000, 9) } else { QuadratureSpec::trapezoid(8) };
        let f = |x: &[f64]| Ok(c[0] + c[1] * (x[0] + x[2]).cos() + c[2] * x[1].sin().powi(2));
        let a = integrate_density(&m, &q, f).unwrap();
        let b = integrate_density(&m.clone().reversed(), &q, f).unwrap();
        prop_assert_eq!(a.value, -b.value);
    }

    #[test]
    fn trapezoid_is_exact_below_nyquist(k in 0i32..8, l in 0i32..8, phase in 0.0..TAU) {
        let m = ManifoldSpec::new("T2", ChartDomain::torus(2));
        let f = |x: &[f64]| Ok(2.0 + (k as f64 * x[0] + l as f64 * x[1] + phase).cos());
        let r = integrate_density(&m, &QuadratureSpec::trapezoid(16), f).unwrap();
        let truth = TAU * TAU * (2.0 + if k == 0 && l == 0 { phase.cos() } else { 0.0 });
        prop_assert!((r.value - truth).abs() < 1e-11);
    }

    #[test]
    fn verdicts_are_monotone(m in 0.0..2e-6f64, inv in 0.0..2e-6f64, value in -10.0..10.0f64, err in 0.0..3.0f64, worse in 1.0..10.0f64) {
        let tol = Tolerances::GRID;
        let fit = |r| InvarianceFit { c: 1.0, max_residual: r };
        let v = decide(&tol, m, Some(&fit(inv)), value, err);
        // Growing any residual or the error bar never promotes a verdict.
        for w in [
            decide(&tol, m * worse, Some(&fit(inv)), value, err),
            decide(&tol, m, Some(&fit(inv * worse)), value, err),
            decide(&tol, m, Some(&fit(inv)), value, err * worse),
        ] {
            if v != Verdict::Certified {
                prop_assert_ne!(w, Verdict::Certified);
            }
            if v == Verdict::Failed(Condition::Membership) {
                prop_assert_eq!(w, Verdict::Failed(Condition::Membership));
            }
        }
    }
}
