//! Property suites runnable from the command line. Each property reports a
//! measured quantity and the tolerance it must stay below.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{check_invariance, probe_points};
use crate::curvature::{
    conformal_rescale, curvature_at, deformed_metric, idx4, weyl, CurvaturePack,
};
use crate::error::{Error, Result};
use crate::geometry::chart::{ChartDomain, ManifoldSpec};
use crate::geometry::fields::{
    ActionMap, DynAction, DynHomotopy, FormField, MetricField, ScalarField, Tensor11Field,
    VectorField,
};
use crate::geometry::forms::{scaled, ConstantForm};
use crate::kernels::{
    conformal_kernel, contact_kernel, contract_values, kernel_component, ladder_brute_force,
    ladder_contract, pullback_kernel_by_action, riemannian_volume_density, wcs_kernel,
    ContactVolume, KernelField,
};
use crate::loopspace::{
    action_pullback_density, eval_loop_form, homotopy_invariance_check, iterate_action,
    loop_form_exterior_derivative, loop_obstruction, DiscreteLoop, LoopTangentFrame,
    ReparametrizedAction, LOOP_NODES,
};
use crate::quadrature::{
    convergence_sweep, integrate_density, integrate_top_form, QuadratureMethod, QuadratureSpec,
};
use crate::real::Real;
use crate::zoo::cases::{case_by_id, case_ids, HOMOTOPY_EPSILON};
use crate::zoo::sphere::{HopfAction, HopfChart, RoundMetric, SasakianStructure};
use crate::zoo::torus::{t3_contact_form, CoordinateRotation, TrigPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Curvature,
    Kernels,
    Loopspace,
    Quadrature,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Curvature,
        Suite::Kernels,
        Suite::Loopspace,
        Suite::Quadrature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Curvature => "curvature",
            Suite::Kernels => "kernels",
            Suite::Loopspace => "loopspace",
            Suite::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Incompatible(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

struct Recorder {
    suite: Suite,
    results: Vec<PropertyResult>,
}

impl Recorder {
    fn check<F>(&mut self, name: &str, tolerance: f64, f: F)
    where
        F: FnOnce() -> Result<(f64, String)>,
    {
        let (passed, measured, detail) = match f() {
            Ok((m, d)) => (m.is_finite() && m < tolerance, m, d),
            Err(e) => (false, f64::NAN, e.to_string()),
        };
        self.results.push(PropertyResult {
            suite: self.suite.name().into(),
            name: name.into(),
            passed,
            measured,
            tolerance,
            detail,
        });
    }
}

pub fn run_suite(suite: Suite) -> Vec<PropertyResult> {
    let mut r = Recorder {
        suite,
        results: Vec::new(),
    };
    match suite {
        Suite::Curvature => curvature_suite(&mut r),
        Suite::Kernels => kernels_suite(&mut r),
        Suite::Loopspace => loopspace_suite(&mut r),
        Suite::Quadrature => quadrature_suite(&mut r),
    }
    r.results
}

/// Uniform random points inside a chart, kept `margin` away from bounded edges.
pub fn random_points(domain: &ChartDomain, count: usize, seed: u64, margin: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let unit: Vec<f64> = (0..domain.dim()).map(|_| rng.random::<f64>()).collect();
            domain.from_unit(&unit, margin)
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max |R_{kji}{}^h − (g_{ki}δ_j^h − g_{ji}δ_k^h)|`.
pub fn round_identity_residual(p: &CurvaturePack) -> f64 {
    let n = p.dim;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for h in 0..n {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let model = p.g[k * n + i] * d(j, h) - p.g[j * n + i] * d(k, h);
                    worst = worst.max((p.riemann[idx4(n, k, j, i, h)] - model).abs());
                }
            }
        }
    }
    worst
}

/// First Bianchi and pair symmetry of the lowered Riemann tensor.
pub fn riemann_symmetry_residual(p: &CurvaturePack) -> f64 {
    let n = p.dim;
    let low = p.riemann_lowered();
    let r = |a, b, c, d| low[idx4(n, a, b, c, d)];
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for h in 0..n {
                    let bianchi = r(k, j, i, h) + r(j, i, k, h) + r(i, k, j, h);
                    let pair = r(k, j, i, h) - r(i, h, k, j);
                    worst = worst.max(bianchi.abs()).max(pair.abs());
                }
            }
        }
    }
    worst
}

/// Max over all traces of a (1,3) tensor `C_{kji}{}^h`.
pub fn trace_residual(p: &CurvaturePack, c: &[f64]) -> f64 {
    let n = p.dim;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let (mut t_kh, mut t_jh, mut t_ih, mut t_ki) = (0.0, 0.0, 0.0, 0.0);
            for t in 0..n {
                t_kh += c[idx4(n, t, a, b, t)];
                t_jh += c[idx4(n, a, t, b, t)];
                t_ih += c[idx4(n, a, b, t, t)];
                for u in 0..n {
                    t_ki += p.g_inv[t * n + u] * c[idx4(n, t, a, u, b)];
                }
            }
            worst = worst
                .max(t_kh.abs())
                .max(t_jh.abs())
                .max(t_ih.abs())
                .max(t_ki.abs());
        }
    }
    worst
}

/// The five Weyl patterns on (S⁵, g_ρ) built from the round structure at `x`.
fn weyl_patterns(s: &SasakianStructure, x: &[f64]) -> Vec<Vec<f64>> {
    let n = s.chart.dim();
    let g = MetricField::matrix(&s.g, x);
    let phi = Tensor11Field::matrix(&s.phi, x); // φ^h_i at [h*n+i]
    let eta = FormField::coefficients(&s.eta, x);
    let xi = VectorField::components(&s.xi, x);
    let low = |k: usize, i: usize| (0..n).map(|l| g[k * n + l] * phi[l * n + i]).sum::<f64>();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut out = vec![vec![0.0; n * n * n * n]; 5];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for h in 0..n {
                    let c = idx4(n, k, j, i, h);
                    out[0][c] = low(k, i) * phi[h * n + j] - phi[h * n + k] * low(j, i);
                    out[1][c] = low(k, j) * phi[h * n + i];
                    out[2][c] = g[k * n + i] * d(j, h) - g[j * n + i] * d(k, h);
                    out[3][c] = eta[k] * eta[i] * d(j, h) - eta[j] * eta[i] * d(k, h);
                    out[4][c] = g[k * n + i] * eta[j] * xi[h] - g[j * n + i] * eta[k] * xi[h];
                }
            }
        }
    }
    out
}

/// Least-squares coefficients and relative max residual of `target ≈ Σ c_a patterns[a]`.
fn fit(patterns: &[Vec<Vec<f64>>], targets: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let rows: usize = targets.iter().map(Vec::len).sum();
    let cols = patterns[0].len();
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DVector::zeros(rows);
    let mut r = 0;
    for (pats, t) in patterns.iter().zip(targets) {
        for (c, v) in t.iter().enumerate() {
            for (col, p) in pats.iter().enumerate() {
                a[(r, col)] = p[c];
            }
            b[r] = *v;
            r += 1;
        }
    }
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let resid = &a * &sol - &b;
    let scale = b.amax().max(f64::MIN_POSITIVE);
    (sol.iter().copied().collect(), resid.amax() / scale)
}

fn coefficient_variation(per_point: &[Vec<f64>]) -> f64 {
    let m = per_point.len() as f64;
    let cols = per_point[0].len();
    let means: Vec<f64> = (0..cols)
        .map(|c| per_point.iter().map(|v| v[c]).sum::<f64>() / m)
        .collect();
    let scale = max_abs(&means);
    (0..cols)
        .filter(|&c| means[c].abs() > 1e-8 * scale)
        .map(|c| {
            let var = per_point
                .iter()
                .map(|v| (v[c] - means[c]).powi(2))
                .sum::<f64>()
                / m;
            var.sqrt() / means[c].abs()
        })
        .fold(0.0, f64::max)
}

/// Smooth positive factor `exp(Σ a_i sin(x_i + b_i))`.
#[derive(Debug, Clone)]
struct ExpTrig {
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

impl ScalarField for ExpTrig {
    fn dim(&self) -> usize {
        self.amplitude.len()
    }
    fn value<S: Real>(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for (i, (&a, &b)) in self.amplitude.iter().zip(&self.phase).enumerate() {
            acc += (x[i] + b).sin() * a;
        }
        acc.exp()
    }
}

/// `η₁(u^{axis})` as a scalar field.
#[derive(Debug, Clone)]
struct ProfileScalar {
    dim: usize,
    axis: usize,
    profile: TrigPoly,
}

impl ScalarField for ProfileScalar {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value<S: Real>(&self, x: &[S]) -> S {
        self.profile.eval(x[self.axis])
    }
}

/// `η(ξ) η ∧ dη` on T³ for the zoo contact form and `ξ = ∂₁`.
pub fn t3_obstruction_form() -> impl FormField + Clone {
    let eta = t3_contact_form();
    let eta1 = ProfileScalar {
        dim: 3,
        axis: 1,
        profile: eta.profiles[0].clone(),
    };
    scaled(
        eta1,
        ContactVolume::new(eta, 1).expect("T3 is 3-dimensional"),
    )
}

fn curvature_suite(r: &mut Recorder) {
    for m in [1usize, 2] {
        let chart = HopfChart::new(m);
        r.check(
            &format!("round-S{} constant-curvature identity", 2 * m + 1),
            1e-6,
            || {
                let mut worst: f64 = 0.0;
                for x in random_points(&chart.domain(), 100, 7 + m as u64, 0.05) {
                    worst = worst.max(round_identity_residual(&curvature_at(
                        &RoundMetric(chart),
                        &x,
                    )?));
                }
                Ok((
                    worst,
                    "max componentwise residual over 100 random points".into(),
                ))
            },
        );
    }
    let s5 = SasakianStructure::new(2);
    let domain = s5.chart.domain();
    r.check("unit S5 scalar curvature = 20", 1e-6, || {
        let mut worst: f64 = 0.0;
        let mut last = 0.0;
        for x in random_points(&domain, 50, 11, 0.05) {
            last = curvature_at(&s5.g, &x)?.scalar;
            worst = worst.max((last - 20.0).abs());
        }
        Ok((worst, format!("scalar curvature {last:.12}")))
    });
    r.check("first Bianchi and pair symmetry on g_rho=1", 1e-6, || {
        let g = deformed_metric(s5.g, s5.eta, 1.0)?;
        let mut worst: f64 = 0.0;
        for x in random_points(&domain, 20, 13, 0.05) {
            worst = worst.max(riemann_symmetry_residual(&curvature_at(&g, &x)?));
        }
        Ok((worst, "lowered Riemann over 20 points".into()))
    });
    r.check("Weyl of round S5 vanishes", 1e-6, || {
        let mut worst: f64 = 0.0;
        for x in random_points(&domain, 100, 17, 0.05) {
            worst = worst.max(max_abs(&weyl(&curvature_at(&s5.g, &x)?)?));
        }
        Ok((worst, "max |C| over 100 points".into()))
    });
    r.check("Weyl (1,3) conformally invariant", 1e-5, || {
        let g = deformed_metric(s5.g, s5.eta, 1.0)?;
        let points = random_points(&domain, 20, 19, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut worst: f64 = 0.0;
        for trial in 0..3 {
            let factor = ExpTrig {
                amplitude: (0..5).map(|_| rng.random_range(-0.4..0.4)).collect(),
                phase: (0..5).map(|_| rng.random_range(0.0..TAU)).collect(),
            };
            let rescaled = conformal_rescale(g.clone(), factor, &points)?;
            for x in &points[trial * 5..trial * 5 + 5] {
                let a = weyl(&curvature_at(&g, x)?)?;
                let b = weyl(&curvature_at(&rescaled, x)?)?;
                worst = worst.max(
                    a.iter()
                        .zip(&b)
                        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs())),
                );
            }
        }
        Ok((worst, "3 random factors, 5 points each".into()))
    });
    r.check("Weyl totally trace-free on g_rho=1", 1e-6, || {
        let g = deformed_metric(s5.g, s5.eta, 1.0)?;
        let mut worst: f64 = 0.0;
        let mut norm: f64 = 0.0;
        for x in random_points(&domain, 50, 29, 0.05) {
            let p = curvature_at(&g, &x)?;
            let c = weyl(&p)?;
            norm = norm.max(max_abs(&c));
            worst = worst.max(trace_residual(&p, &c));
        }
        Ok((worst, format!("max |C| = {norm:.4}")))
    });
    for rho in [0.5, 1.0] {
        r.check(
            &format!("Ricci structural fit c1 g + c2 eta⊗eta, rho={rho}"),
            1e-5,
            || {
                let g = deformed_metric(s5.g, s5.eta, rho)?;
                let mut pats = Vec::new();
                let mut targets = Vec::new();
                for x in random_points(&domain, 50, 31, 0.05) {
                    let p = curvature_at(&g, &x)?;
                    let gm = MetricField::matrix(&s5.g, &x);
                    let eta = FormField::coefficients(&s5.eta, &x);
                    let etaeta: Vec<f64> = (0..25).map(|c| eta[c / 5] * eta[c % 5]).collect();
                    pats.push(vec![gm, etaeta]);
                    targets.push(p.ricci);
                }
                let (c, resid) = fit(&pats, &targets);
                Ok((resid, format!("c1 = {:.10}, c2 = {:.10}", c[0], c[1])))
            },
        );
        r.check(
            &format!("Weyl structural fit on five patterns, rho={rho}"),
            1e-4,
            || {
                let g = deformed_metric(s5.g, s5.eta, rho)?;
                let mut pats = Vec::new();
                let mut targets = Vec::new();
                let mut per_point = Vec::new();
                for x in random_points(&domain, 20, 37, 0.05) {
                    let p = curvature_at(&g, &x)?;
                    let pat = weyl_patterns(&s5, &x);
                    let c = weyl(&p)?;
                    per_point.push(fit(std::slice::from_ref(&pat), std::slice::from_ref(&c)).0);
                    pats.push(pat);
                    targets.push(c);
                }
                let (c, resid) = fit(&pats, &targets);
                let cv = coefficient_variation(&per_point);
                let coeffs: Vec<String> = c.iter().map(|v| format!("{v:.8}")).collect();
                // Fit residual must stay below 1e-4 and coefficient variation below 1e-3.
                Ok((
                    resid.max(cv * 1e-1),
                    format!(
                        "coefficients [{}], max coefficient of variation {cv:.2e}",
                        coeffs.join(", ")
                    ),
                ))
            },
        );
    }
    r.check("Sasakian identities on S3 and S5", 1e-8, || {
        let mut worst: f64 = 0.0;
        for m in [1, 2] {
            let s = SasakianStructure::new(m);
            for x in random_points(&s.chart.domain(), 50, 41, 0.05) {
                let res = s.residuals(&x)?;
                worst = worst
                    .max(res.eta_of_xi)
                    .max(res.reeb_kernel)
                    .max(res.phi_squared);
            }
        }
        Ok((worst, "eta(xi)=1, i_xi deta=0, phi^2=-I+eta⊗xi".into()))
    });
}

fn kernels_suite(r: &mut Recorder) {
    let s5 = SasakianStructure::new(2);
    let domain = s5.chart.domain();
    r.check("ladder fast path equals 120-permutation sum", 1e-9, || {
        let g = deformed_metric(s5.g, s5.eta, 1.0)?;
        let mut worst: f64 = 0.0;
        for x in random_points(&domain, 20, 43, 0.05) {
            let p = curvature_at(&g, &x)?;
            for t in [p.riemann.clone(), weyl(&p)?] {
                let fast = ladder_contract(&t);
                let slow = ladder_brute_force(&t);
                let scale = max_abs(&slow).max(1.0);
                worst = worst.max(
                    fast.iter()
                        .zip(&slow)
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                        / scale,
                );
            }
        }
        Ok((
            worst,
            "Riemann and Weyl sources at 20 points, relative to max(1, |k|)".into(),
        ))
    });
    r.check("canonical storage is antisymmetric", 1e-15, || {
        let values = [1.5, -2.0, 0.25];
        let mut worst: f64 = 0.0;
        for nu in 0..3 {
            worst = worst
                .max((kernel_component(&values, nu, &[1, 0, 2]) + values[nu]).abs())
                .max((kernel_component(&values, nu, &[1, 2, 0]) - values[nu]).abs())
                .max(kernel_component(&values, nu, &[1, 1, 2]).abs());
        }
        Ok((
            worst,
            "transposition flips sign, repeated index vanishes".into(),
        ))
    });
    r.check(
        "Hopf rotation preserves WCS and conformal kernels on g_rho=1",
        1e-6,
        || {
            let g = deformed_metric(s5.g, s5.eta, 1.0)?;
            let a = HopfAction(s5.chart);
            let wcs = wcs_kernel(g.clone())?;
            let conf = conformal_kernel(g)?;
            let mut worst: f64 = 0.0;
            for (i, x) in random_points(&domain, 100, 47, 0.05).iter().enumerate() {
                let theta = TAU * (i as f64 + 0.5) / 100.0;
                for k in [&wcs as &dyn KernelField, &conf] {
                    let pulled = pullback_kernel_by_action(k, &a, theta, x)?;
                    let base = k.eval(x)?;
                    worst = worst.max(
                        pulled
                            .iter()
                            .zip(&base)
                            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs())),
                    );
                }
            }
            Ok((worst, "100 points, one angle each".into()))
        },
    );
    r.check(
        "contact kernel preserved by strict contactomorphisms",
        1e-8,
        || {
            let mut worst: f64 = 0.0;
            let t3 = contact_kernel(t3_contact_form(), 1)?;
            let rot = CoordinateRotation {
                dim: 3,
                axis: 0,
                speed: 1.0,
            };
            let cases: Vec<(Box<dyn KernelField>, Box<dyn DynAction>, ChartDomain)> = vec![
                (Box::new(t3), Box::new(rot), ChartDomain::torus(3)),
                (
                    Box::new(contact_kernel(SasakianStructure::new(1).eta, 1)?),
                    Box::new(HopfAction(HopfChart::new(1))),
                    HopfChart::new(1).domain(),
                ),
                (
                    Box::new(contact_kernel(s5.eta, 2)?),
                    Box::new(HopfAction(s5.chart)),
                    domain.clone(),
                ),
            ];
            for (k, a, d) in &cases {
                let fit = check_invariance(
                    k.as_ref(),
                    a.as_ref(),
                    &random_points(d, 40, 53, 0.05),
                    &[0.3, 1.7, 4.0],
                )?;
                worst = worst.max(fit.max_residual).max((fit.c - 1.0).abs());
            }
            Ok((worst, "T3 rotation, S3 and S5 Hopf rotation".into()))
        },
    );
    for (rho, label) in [(1.0, "WCS"), (0.5, "WCS")] {
        r.check(
            &format!("{label} kernel proportional to eta⊗eta∧(deta)^2, rho={rho}"),
            1e-3,
            || {
                let g = deformed_metric(s5.g, s5.eta, rho)?;
                let k = wcs_kernel(g)?;
                let vol = ContactVolume::new(s5.eta, 2)?;
                let ratios: Vec<f64> = random_points(&domain, 200, 59, 0.05)
                    .iter()
                    .map(|x| {
                        Ok(
                            contract_values(&k.eval(x)?, &VectorField::components(&s5.xi, x))
                                / vol.coefficients(x)[0],
                        )
                    })
                    .collect::<Result<_>>()?;
                let (mean, cv) = mean_cv(&ratios);
                Ok((
                    cv,
                    format!("ratio {mean:.10}, coefficient of variation {cv:.2e}"),
                ))
            },
        );
    }
}

/// Mean and coefficient of variation.
pub fn mean_cv(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m).sqrt();
    (
        mean,
        if mean != 0.0 {
            sd / mean.abs()
        } else {
            f64::INFINITY
        },
    )
}

/// Max over invariant zoo cases of `|density − 2π k̂·ξ| / max|2π k̂·ξ|` at `count` probe points.
pub fn reduction_identity(count: usize) -> Result<(f64, Vec<String>)> {
    let mut worst: f64 = 0.0;
    let mut covered = Vec::new();
    for id in case_ids() {
        let case = case_by_id(&id)?;
        let points = probe_points(&case.manifold, count);
        let invariant = match check_invariance(
            case.kernel.as_ref(),
            case.action.as_ref(),
            &case.probe(),
            &case.thetas(),
        ) {
            Ok(fit) => fit.max_residual < case.tolerances.invariance,
            Err(Error::ZeroKernel) => true,
            Err(e) => return Err(e),
        };
        if !invariant {
            continue;
        }
        let (mut gap, mut scale) = (0.0f64, 0.0f64);
        for x in &points {
            let reduced = TAU * contract_values(&case.kernel.eval(x)?, &case.action.generator(x));
            let density =
                action_pullback_density(case.action.as_ref(), case.kernel.as_ref(), x, LOOP_NODES)?;
            gap = gap.max((density - reduced).abs());
            scale = scale.max(reduced.abs());
        }
        worst = worst.max(if scale > 0.0 { gap / scale } else { gap });
        covered.push(id);
    }
    Ok((worst, covered))
}

/// `|∫ density(a_n) − n ∫ density(a)| / |n ∫ density(a)|` on the T³ case.
pub fn iterate_scaling(n: u32) -> Result<f64> {
    let case = case_by_id("t3")?;
    let q = QuadratureSpec::trapezoid(16);
    let base = loop_obstruction(
        &case.manifold,
        case.action.as_ref(),
        case.kernel.as_ref(),
        &q,
        LOOP_NODES,
    )?;
    let iterated = iterate_action(case.action.clone(), n)?;
    let scaled = loop_obstruction(
        &case.manifold,
        &iterated,
        case.kernel.as_ref(),
        &q,
        LOOP_NODES,
    )?;
    let expect = n as f64 * base.value;
    Ok((scaled.value - expect).abs() / expect.abs())
}

/// Max of `|loop_form_exterior_derivative|` relative to `max |2π k̂·ξ|` under the
/// reparametrization homotopy, over invariant zoo cases.
pub fn exterior_derivative_vanishing(points: usize) -> Result<(f64, Vec<String>)> {
    let hopf3 = HopfAction(HopfChart::new(1));
    let hopf5 = HopfAction(HopfChart::new(2));
    let rot = |dim| CoordinateRotation {
        dim,
        axis: 0,
        speed: 1.0,
    };
    let homotopies: Vec<(&str, Arc<dyn DynHomotopy>)> = vec![
        ("t2", reparam(rot(2))),
        ("t3", reparam(rot(3))),
        ("s3-contact", reparam(hopf3)),
        ("s3-psh", reparam(hopf3)),
        ("s5-contact", reparam(hopf5)),
        ("s5-wcs-rho1", reparam(hopf5)),
    ];
    let mut worst: f64 = 0.0;
    let mut covered = Vec::new();
    for (id, f) in homotopies {
        let case = case_by_id(id)?;
        let (mut gap, mut scale) = (0.0f64, 0.0f64);
        for x in probe_points(&case.manifold, points) {
            scale = scale.max(
                TAU * contract_values(&case.kernel.eval(&x)?, &case.action.generator(&x)).abs(),
            );
            for s in [0.0, 0.5, 1.0] {
                gap = gap.max(
                    loop_form_exterior_derivative(
                        case.kernel.as_ref(),
                        f.as_ref(),
                        s,
                        &x,
                        LOOP_NODES,
                    )?
                    .abs(),
                );
            }
        }
        worst = worst.max(if scale > 0.0 { gap / scale } else { gap });
        covered.push(id.to_string());
    }
    Ok((worst, covered))
}

fn reparam<A: ActionMap + 'static>(a: A) -> Arc<dyn DynHomotopy> {
    Arc::new(ReparametrizedAction {
        inner: a,
        epsilon: HOMOTOPY_EPSILON,
    })
}

fn loopspace_suite(r: &mut Recorder) {
    let case = case_by_id("t3");
    r.check("loop form antisymmetric in frame fields", 1e-12, || {
        let case = case.clone()?;
        let x = [0.4, 1.1, 2.5];
        let gamma = DiscreteLoop::orbit(case.action.as_ref(), &x, LOOP_NODES)?;
        let frame = LoopTangentFrame::pushed_coordinate(case.action.as_ref(), &x, LOOP_NODES);
        let v = eval_loop_form(case.kernel.as_ref(), &gamma, &frame)?;
        let swapped = eval_loop_form(case.kernel.as_ref(), &gamma, &frame.clone().swapped(0, 2))?;
        let mut fields = frame.fields().to_vec();
        fields[1] = fields[0].clone();
        let repeated = eval_loop_form(
            case.kernel.as_ref(),
            &gamma,
            &LoopTangentFrame::new(fields)?,
        )?;
        Ok((
            (v + swapped).abs().max(repeated.abs()),
            format!("value {v:.12}"),
        ))
    });
    r.check("constant loop gives zero", 1e-15, || {
        let case = case.clone()?;
        let gamma = DiscreteLoop::constant(&[0.4, 1.1, 2.5], LOOP_NODES)?;
        let v = eval_loop_form(
            case.kernel.as_ref(),
            &gamma,
            &LoopTangentFrame::coordinate(3, LOOP_NODES),
        )?;
        Ok((v.abs(), String::new()))
    });
    r.check("T3 Reeb orbit reduces to 2π k·ξ", 1e-8, || {
        let case = case.clone()?;
        let mut worst: f64 = 0.0;
        for x in probe_points(&case.manifold, 20) {
            let gamma = DiscreteLoop::orbit(case.action.as_ref(), &x, LOOP_NODES)?;
            let v = eval_loop_form(
                case.kernel.as_ref(),
                &gamma,
                &LoopTangentFrame::coordinate(3, LOOP_NODES),
            )?;
            let expect = TAU * contract_values(&case.kernel.eval(&x)?, &case.action.generator(&x));
            worst = worst.max((v - expect).abs());
        }
        Ok((
            worst,
            "coordinate frame along orbits through 20 points".into(),
        ))
    });
    r.check("reduction identity on invariant zoo cases", 1e-7, || {
        let (worst, covered) = reduction_identity(100)?;
        Ok((worst, format!("100 points each: {}", covered.join(", "))))
    });
    for n in [2, 3, 5] {
        r.check(&format!("iterate scaling n={n}"), 1e-8, || {
            Ok((iterate_scaling(n)?, "t3".into()))
        });
    }
    r.check("iterates compose multiplicatively", 1e-12, || {
        let case = case.clone()?;
        let twice = iterate_action(case.action.clone(), 2)?;
        let six_by_parts = iterate_action(Arc::new(twice), 3)?;
        let six = iterate_action(case.action.clone(), 6)?;
        let x = [0.3, 0.9, 1.7];
        let mut worst: f64 = 0.0;
        for t in [0.1, 1.0, 2.9] {
            let a = six_by_parts.apply(t, &x);
            let b = six.apply(t, &x);
            let va = six_by_parts.velocity(t, &x);
            let vb = six.velocity(t, &x);
            worst = worst.max(max_abs(
                &a.iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>(),
            ));
            worst = worst.max(max_abs(
                &va.iter().zip(&vb).map(|(p, q)| p - q).collect::<Vec<_>>(),
            ));
        }
        Ok((worst, String::new()))
    });
    r.check(
        "exterior derivative vanishes for invariant kernels",
        1e-7,
        || {
            let (worst, covered) = exterior_derivative_vanishing(20)?;
            Ok((
                worst,
                format!("reparametrization homotopy: {}", covered.join(", ")),
            ))
        },
    );
    r.check("homotopy endpoint integrals agree on t3", 1e-6, || {
        let case = case.clone()?;
        let f = reparam(CoordinateRotation {
            dim: 3,
            axis: 0,
            speed: 1.0,
        });
        let check = homotopy_invariance_check(
            case.kernel.as_ref(),
            f.as_ref(),
            &case.manifold,
            &QuadratureSpec::trapezoid(16),
            LOOP_NODES,
            case.tolerances.invariance,
        )?;
        Ok((
            check.difference,
            format!(
                "I0 = {:.12}, I1 = {:.12}",
                check.start.value, check.end.value
            ),
        ))
    });
}

/// Bitwise equality of MC results under two pool sizes.
pub fn mc_thread_determinism(samples: usize, seed: u64) -> Result<(f64, f64)> {
    let m = ManifoldSpec::new("T3", ChartDomain::torus(3));
    let q = QuadratureSpec::monte_carlo(samples, seed);
    let f = |x: &[f64]| Ok(1.0 + x[0].sin() * x[1].cos() + 0.3 * x[2].cos().powi(2));
    let run = |threads: usize| -> Result<f64> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Incompatible(e.to_string()))?;
        pool.install(|| integrate_density(&m, &q, f))
            .map(|r| r.value)
    };
    Ok((run(1)?, run(4)?))
}

fn quadrature_suite(r: &mut Recorder) {
    let t2 = ManifoldSpec::new("T2", ChartDomain::torus(2));
    let t3 = ManifoldSpec::new("T3", ChartDomain::torus(3));
    r.check("flat T2 area = 4π²", 1e-12, || {
        let v = integrate_top_form(&t2, &ConstantForm::volume(2), &QuadratureSpec::trapezoid(8))?;
        Ok(((v.value - 4.0 * PI * PI).abs(), format!("{:.15}", v.value)))
    });
    r.check("T3 sweep 16/32/64 converges", 1e-10, || {
        let form = t3_obstruction_form();
        let res = convergence_sweep(
            &t3,
            &form,
            QuadratureMethod::PeriodicTrapezoid,
            &[16, 32, 64],
            0,
        )?;
        let diff = (res[2].value - res[1].value).abs();
        Ok((
            diff,
            format!(
                "levels {:.12} {:.12} {:.12}",
                res[0].value, res[1].value, res[2].value
            ),
        ))
    });
    r.check(
        "constant integrand identical at every level",
        1e-300,
        || {
            let res = convergence_sweep(
                &t3,
                &ConstantForm::volume(3),
                QuadratureMethod::PeriodicTrapezoid,
                &[4, 8, 16],
                0,
            )?;
            let spread = res
                .iter()
                .map(|r| (r.value - res[0].value).abs())
                .fold(0.0, f64::max);
            Ok((spread, format!("{:.15}", res[0].value)))
        },
    );
    r.check("orientation reversal negates exactly", 1e-300, || {
        let form = t3_obstruction_form();
        let a = integrate_top_form(&t3, &form, &QuadratureSpec::trapezoid(16))?;
        let b = integrate_top_form(
            &t3.clone().reversed(),
            &form,
            &QuadratureSpec::trapezoid(16),
        )?;
        Ok(((a.value + b.value).abs(), String::new()))
    });
    r.check("MC determinism across thread counts", 1e-300, || {
        let (a, b) = mc_thread_determinism(50_000, 42)?;
        Ok((
            (a - b).abs(),
            format!("1 thread {a:.17e}, 4 threads {b:.17e}"),
        ))
    });
    r.check("MC error shrinks ~10x from 1e4 to 1e6 samples", 0.5, || {
        let form = t3_obstruction_form();
        let res = convergence_sweep(
            &t3,
            &form,
            QuadratureMethod::MonteCarlo,
            &[10_000, 1_000_000],
            5,
        )?;
        let ratio = res[0].error_estimate / res[1].error_estimate;
        Ok(((ratio / 10.0).ln().abs(), format!("error ratio {ratio:.3}")))
    });
    r.check("MC error calibration on 20 integrands", 1.5, || {
        let misses = mc_calibration_misses()?;
        Ok((
            misses as f64,
            format!("{misses} of 20 outside 4 standard errors"),
        ))
    });
    r.check("S3 eta∧deta = 4π² by Monte Carlo", 4.0, || {
        let s = SasakianStructure::new(1);
        let form = ContactVolume::new(s.eta, 1)?;
        let v = integrate_top_form(
            &s.chart.manifold(),
            &form,
            &QuadratureSpec::monte_carlo(1_000_000, 42),
        )?;
        let z = (v.value - 4.0 * PI * PI).abs() / v.error_estimate;
        Ok((z, format!("{:.6} ± {:.1e}", v.value, v.error_estimate)))
    });
    r.check("vol(S3) = 2π² and vol(S5) = π³", 1e-10, || {
        let mut worst: f64 = 0.0;
        let mut detail = Vec::new();
        for m in [1, 2] {
            let chart = HopfChart::new(m);
            let g = RoundMetric(chart);
            let v = integrate_density(
                &chart.manifold(),
                &QuadratureSpec::gauss_legendre(12),
                |x| riemannian_volume_density(&g, x),
            )?;
            worst = worst.max((v.value - chart.volume()).abs() / chart.volume());
            detail.push(format!("{:.12}", v.value));
        }
        Ok((worst, detail.join(", ")))
    });
}

/// Count of known T³ integrals missed by more than 4 MC standard errors.
pub fn mc_calibration_misses() -> Result<usize> {
    let t3 = ManifoldSpec::new("T3", ChartDomain::torus(3));
    let mut misses = 0;
    for j in 0..20u64 {
        let c = 0.5 + 0.1 * j as f64;
        let b = 0.3 * (j % 4) as f64;
        let k = (j % 3 + 1) as f64;
        let truth = TAU.powi(3) * (c + 0.5 * b);
        let r = integrate_density(&t3, &QuadratureSpec::monte_carlo(10_000, 1000 + j), |x| {
            Ok(c + (x[0] + k * x[1]).sin() + b * x[2].cos().powi(2))
        })?;
        if (r.value - truth).abs() > 4.0 * r.error_estimate {
            misses += 1;
        }
    }
    Ok(misses)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("geometry".parse::<Suite>().is_err());
    }

    #[test]
    fn mean_cv_of_constant_is_zero() {
        let (m, cv) = mean_cv(&[2.0, 2.0, 2.0]);
        assert_eq!(m, 2.0);
        assert_eq!(cv, 0.0);
    }
}
