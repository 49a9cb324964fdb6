//! Numerical check of the three obstruction conditions: group membership of
//! every `a(θ, ·)`, invariance of the kernel up to a constant, and
//! nonvanishing of `∫_M k̂ · ξ`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::chart::ManifoldSpec;
use crate::geometry::fields::{DynAction, DynForm, DynHomotopy, DynMetric, DynTensor11};
use crate::geometry::forms::pullback_coefficients;
use crate::geometry::linalg::matvec;
use crate::kernels::{contract_values, pullback_kernel_values, KernelField, SharedKernel};
use crate::loopspace::{
    action_pullback_density, homotopy_invariance_check, HomotopyCheck, LOOP_NODES,
};
use crate::quadrature::{integrate_density, IntegralResult, QuadratureSpec};

/// Which transformation group `a(θ, ·)` must stay inside.
#[derive(Clone)]
pub enum MembershipPredicate {
    Isometry(Arc<dyn DynMetric>),
    Conformal(Arc<dyn DynMetric>),
    StrictContact(Arc<dyn DynForm>),
    FormPair {
        eta: Arc<dyn DynForm>,
        mu: Arc<dyn DynForm>,
    },
    Psh {
        eta: Arc<dyn DynForm>,
        g: Arc<dyn DynMetric>,
        phi: Arc<dyn DynTensor11>,
    },
}

impl MembershipPredicate {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Isometry(_) => "isometry",
            Self::Conformal(_) => "conformal",
            Self::StrictContact(_) => "strict-contact",
            Self::FormPair { .. } => "form-pair",
            Self::Psh { .. } => "pseudo-hermitian",
        }
    }

    fn dim(&self) -> usize {
        match self {
            Self::Isometry(g) | Self::Conformal(g) => g.dim(),
            Self::StrictContact(eta) | Self::FormPair { eta, .. } | Self::Psh { eta, .. } => {
                eta.dim()
            }
        }
    }

    /// Residual of the defining equation for the map `x ↦ y` with Jacobian `jac`.
    /// The conformal variant also returns the fitted factor `f`.
    pub fn residual(&self, x: &[f64], y: &[f64], jac: &[f64]) -> (f64, Option<f64>) {
        let n = x.len();
        match self {
            Self::Isometry(g) => (
                max_abs_diff(&pull_metric(n, jac, &g.eval(y)), &g.eval(x)),
                None,
            ),
            Self::Conformal(g) => {
                let pulled = pull_metric(n, jac, &g.eval(y));
                let base = g.eval(x);
                let f = contract_values(&pulled, &base) / contract_values(&base, &base);
                let scaled: Vec<f64> = base.iter().map(|v| v * f).collect();
                (max_abs_diff(&pulled, &scaled), Some(f))
            }
            Self::StrictContact(eta) => (form_residual(eta.as_ref(), x, y, jac), None),
            Self::FormPair { eta, mu } => (
                form_residual(eta.as_ref(), x, y, jac).max(form_residual(mu.as_ref(), x, y, jac)),
                None,
            ),
            Self::Psh { eta, phi, .. } => {
                let form = form_residual(eta.as_ref(), x, y, jac);
                let phi_x = phi.eval(x);
                let phi_y = phi.eval(y);
                let mut commute: f64 = 0.0;
                for v in contact_frame(&eta.eval(x)) {
                    let lhs = matvec(n, jac, &matvec(n, &phi_x, &v));
                    let rhs = matvec(n, &phi_y, &matvec(n, jac, &v));
                    commute = commute.max(max_abs_diff(&lhs, &rhs));
                }
                (form.max(commute), None)
            }
        }
    }
}

/// `Jᵀ g(y) J`.
fn pull_metric(n: usize, jac: &[f64], g_y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    acc += jac[a * n + i] * g_y[a * n + b] * jac[b * n + j];
                }
            }
            out[i * n + j] = acc;
        }
    }
    out
}

fn form_residual(form: &dyn DynForm, x: &[f64], y: &[f64], jac: &[f64]) -> f64 {
    let pulled = pullback_coefficients(x.len(), form.degree(), jac, &form.eval(y));
    max_abs_diff(&pulled, &form.eval(x))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

/// Basis of `Ker η`: `e_i − (η_i/η_p) e_p` for `i ≠ p`, `p` the largest component.
fn contact_frame(eta: &[f64]) -> Vec<Vec<f64>> {
    let n = eta.len();
    let p = (0..n)
        .max_by(|&a, &b| eta[a].abs().total_cmp(&eta[b].abs()))
        .unwrap_or(0);
    (0..n)
        .filter(|&i| i != p)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v[p] = -eta[i] / eta[p];
            v
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub membership: f64,
    pub invariance: f64,
}

impl Tolerances {
    pub const GRID: Self = Self {
        membership: 1e-6,
        invariance: 1e-6,
    };
    pub const MONTE_CARLO: Self = Self {
        membership: 1e-4,
        invariance: 1e-4,
    };
}

/// `|I|` must also clear this floor to count as nonzero.
pub const SIGNIFICANCE_FLOOR: f64 = 1e-8;
/// `|I| > SIGMAS · error` is required for nonvanishing.
pub const SIGMAS: f64 = 5.0;

/// Which verdicts a case is expected to reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Expectation {
    Certified,
    NotCertified,
}

impl Expectation {
    pub fn met_by(self, v: Verdict) -> bool {
        (v == Verdict::Certified) == (self == Expectation::Certified)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Membership,
    Invariance,
    Nonvanishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Inconclusive,
    Failed(Condition),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => f.write_str("CERTIFIED"),
            Verdict::Inconclusive => f.write_str("INCONCLUSIVE"),
            Verdict::Failed(Condition::Membership) => f.write_str("FAILED(i)"),
            Verdict::Failed(Condition::Invariance) => f.write_str("FAILED(ii)"),
            Verdict::Failed(Condition::Nonvanishing) => f.write_str("FAILED(iii)"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A homotopy of the action whose endpoint integrals are compared, with its own
/// (usually coarser) quadrature since each node costs a full loop integral.
#[derive(Clone)]
pub struct HomotopyRun {
    pub map: Arc<dyn DynHomotopy>,
    pub quadrature: QuadratureSpec,
}

/// Everything needed to run the pipeline on one example.
#[derive(Clone)]
pub struct CertificationCase {
    pub id: String,
    pub section: String,
    pub kernel_name: String,
    pub action_name: String,
    pub manifold: ManifoldSpec,
    pub kernel: SharedKernel,
    pub action: Arc<dyn DynAction>,
    pub membership: MembershipPredicate,
    pub quadrature: QuadratureSpec,
    pub tolerances: Tolerances,
    pub expected: Expectation,
    pub homotopy: Option<HomotopyRun>,
    /// Sample points for membership and invariance.
    pub probe_points: usize,
    /// θ samples per probe point.
    pub probe_thetas: usize,
}

impl CertificationCase {
    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.dim();
        for found in [self.kernel.dim(), self.action.dim(), self.membership.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(())
    }

    /// Deterministic Halton points inside the chart, away from its boundary.
    pub fn probe(&self) -> Vec<Vec<f64>> {
        probe_points(&self.manifold, self.probe_points)
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.probe_thetas)
            .map(|j| TAU * (j as f64 + 0.37) / self.probe_thetas as f64)
            .collect()
    }
}

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b;
        r += f * (i % base as u64) as f64;
        i /= base as u64;
    }
    r
}

/// First `count` Halton points mapped into the chart with a 3% margin.
pub fn probe_points(m: &ManifoldSpec, count: usize) -> Vec<Vec<f64>> {
    (1..=count as u64)
        .map(|i| {
            let unit: Vec<f64> = (0..m.dim())
                .map(|a| radical_inverse(i, PRIMES[a % PRIMES.len()]))
                .collect();
            m.domain.from_unit(&unit, 0.03)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipStats {
    pub max_residual: f64,
    pub mean_residual: f64,
    pub samples: usize,
    /// Range of the fitted conformal factor, when the predicate is conformal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal_factor: Option<(f64, f64)>,
}

pub fn check_membership(
    predicate: &MembershipPredicate,
    action: &dyn DynAction,
    points: &[Vec<f64>],
    thetas: &[f64],
) -> Result<MembershipStats> {
    if points.is_empty() || thetas.is_empty() {
        return Err(Error::MissingInput("membership sample points"));
    }
    let (mut max, mut sum, mut count) = (0.0f64, 0.0, 0usize);
    let mut factor: Option<(f64, f64)> = None;
    for x in points {
        for &t in thetas {
            let (y, jac) = action.jacobian(t, x);
            let (r, f) = predicate.residual(x, &y, &jac);
            if !r.is_finite() {
                return Err(Error::NotANumber { point: x.clone() });
            }
            max = max.max(r);
            sum += r;
            count += 1;
            if let Some(f) = f {
                factor = Some(factor.map_or((f, f), |(lo, hi)| (lo.min(f), hi.max(f))));
            }
        }
    }
    Ok(MembershipStats {
        max_residual: max,
        mean_residual: sum / count as f64,
        samples: count,
        conformal_factor: factor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub max_residual: f64,
}

/// Kernels whose sampled components all lie below this are treated as zero.
pub const ZERO_KERNEL: f64 = 1e-10;

/// Least-squares `C` in `a(θ)* k̂ ≈ C k̂` and the max-norm residual.
pub fn check_invariance(
    kernel: &dyn KernelField,
    action: &dyn DynAction,
    points: &[Vec<f64>],
    thetas: &[f64],
) -> Result<InvarianceFit> {
    let n = kernel.dim();
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(points.len() * thetas.len());
    let mut scale: f64 = 0.0;
    for x in points {
        let k = kernel.eval(x)?;
        scale = scale.max(k.iter().fold(0.0, |m, v| m.max(v.abs())));
        for &t in thetas {
            let (y, jac) = action.jacobian(t, x);
            pairs.push((
                pullback_kernel_values(n, &jac, &kernel.eval(&y)?),
                k.clone(),
            ));
        }
    }
    if scale < ZERO_KERNEL {
        return Err(Error::ZeroKernel);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (p, k) in &pairs {
        num += contract_values(p, k);
        den += contract_values(k, k);
    }
    let c = num / den;
    let residual = pairs.iter().fold(0.0f64, |m, (p, k)| {
        m.max(
            p.iter()
                .zip(k)
                .fold(0.0f64, |m, (a, b)| m.max((a - c * b).abs())),
        )
    });
    Ok(InvarianceFit {
        c,
        max_residual: residual,
    })
}

/// `2πC ∫_M k̂ · ξ` together with the bare chart integral `∫_M k̂ · ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
    pub kernel_integral: IntegralResult,
}

pub fn obstruction_integral(case: &CertificationCase, c: f64) -> Result<Obstruction> {
    let kernel = case.kernel.as_ref();
    let action = case.action.as_ref();
    let r = integrate_density(&case.manifold, &case.quadrature, |x| {
        Ok(contract_values(&kernel.eval(x)?, &action.generator(x)))
    })?;
    let factor = TAU * c;
    Ok(Obstruction {
        value: factor * r.value,
        error: factor.abs() * r.error_estimate,
        nodes: r.nodes_used,
        kernel_integral: r,
    })
}

/// Max over probe points of `|density − 2πC k̂·ξ|` relative to `max |2πC k̂·ξ|`.
pub fn reduction_cross_check(case: &CertificationCase, c: f64, points: &[Vec<f64>]) -> Result<f64> {
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for x in points {
        let reduced = TAU * c * contract_values(&case.kernel.eval(x)?, &case.action.generator(x));
        let density =
            action_pullback_density(case.action.as_ref(), case.kernel.as_ref(), x, LOOP_NODES)?;
        worst = worst.max((density - reduced).abs());
        scale = scale.max(reduced.abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub case: String,
    pub paper_section: String,
    pub membership: MembershipStats,
    /// `None` when the kernel vanishes at every probe point.
    pub invariance: Option<InvarianceFit>,
    pub obstruction: Obstruction,
    /// Relative gap between the loop-space density and its reduced form on probe points.
    pub reduction_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homotopy: Option<HomotopyCheck>,
    pub verdict: Verdict,
    pub expected: Expectation,
    pub expectation_met: bool,
    pub notes: Vec<String>,
}

/// Verdict from the three measured quantities; conditions are checked in order.
pub fn decide(
    tol: &Tolerances,
    membership_residual: f64,
    invariance: Option<&InvarianceFit>,
    value: f64,
    error: f64,
) -> Verdict {
    if membership_residual >= tol.membership {
        return Verdict::Failed(Condition::Membership);
    }
    let Some(fit) = invariance else {
        return Verdict::Failed(Condition::Nonvanishing);
    };
    if fit.max_residual >= tol.invariance {
        return Verdict::Failed(Condition::Invariance);
    }
    if value.abs() > SIGMAS * error && value.abs() > SIGNIFICANCE_FLOOR {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    }
}

pub fn certify(case: &CertificationCase) -> Result<CertificationReport> {
    case.check_dims()?;
    let points = case.probe();
    let thetas = case.thetas();
    let mut notes = Vec::new();
    let membership = check_membership(&case.membership, case.action.as_ref(), &points, &thetas)?;
    let invariance =
        match check_invariance(case.kernel.as_ref(), case.action.as_ref(), &points, &thetas) {
            Ok(fit) => Some(fit),
            Err(Error::ZeroKernel) => {
                notes.push(Error::ZeroKernel.to_string());
                None
            }
            Err(e) => return Err(e),
        };
    let c = invariance.map_or(1.0, |f| f.c);
    let obstruction = obstruction_integral(case, c)?;
    let reduction_residual = reduction_cross_check(case, c, &points[..points.len().min(16)])?;
    let homotopy = match &case.homotopy {
        Some(run) => {
            let check = homotopy_invariance_check(
                case.kernel.as_ref(),
                run.map.as_ref(),
                &case.manifold,
                &run.quadrature,
                LOOP_NODES,
                case.tolerances.invariance,
            )?;
            if let Some(w) = &check.warning {
                notes.push(w.clone());
            }
            Some(check)
        }
        None => None,
    };
    let verdict = decide(
        &case.tolerances,
        membership.max_residual,
        invariance.as_ref(),
        obstruction.value,
        obstruction.error,
    );
    notes.push(format!(
        "membership sampled at {} points x {} angles",
        points.len(),
        thetas.len()
    ));
    Ok(CertificationReport {
        case: case.id.clone(),
        paper_section: case.section.clone(),
        membership,
        invariance,
        obstruction,
        reduction_residual,
        homotopy,
        verdict,
        expected: case.expected,
        expectation_met: case.expected.met_by(verdict),
        notes,
    })
}
