//! Finite-dimensional reductions of the loop-space form built from a kernel.
//!
//! All θ-integrals use the trapezoid rule on `θ_j = 2πj/N`, which is
//! spectrally accurate for the smooth periodic integrands that occur here.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::chart::ManifoldSpec;
use crate::geometry::fields::{ActionMap, DynAction, DynHomotopy, Homotopy};
use crate::geometry::linalg::{det, Lu};
use crate::kernels::{contract_values, pullback_kernel_values, KernelField};
use crate::quadrature::{integrate_density, IntegralResult, QuadratureSpec};
use crate::real::Real;

/// Default number of θ nodes along a loop.
pub const LOOP_NODES: usize = 64;
/// Smallest admissible loop discretization.
pub const MIN_LOOP_NODES: usize = 16;

fn theta(j: usize, n: usize) -> f64 {
    TAU * j as f64 / n as f64
}

/// Samples `γ(θ_j)` with velocities `γ̇(θ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLoop {
    samples: Vec<Vec<f64>>,
    velocity: Vec<Vec<f64>>,
}

impl DiscreteLoop {
    pub fn new(samples: Vec<Vec<f64>>, velocity: Vec<Vec<f64>>) -> Result<Self> {
        if samples.len() < MIN_LOOP_NODES {
            return Err(Error::LoopTooCoarse {
                min: MIN_LOOP_NODES,
                found: samples.len(),
            });
        }
        if velocity.len() != samples.len() {
            return Err(Error::DimensionMismatch {
                expected: samples.len(),
                found: velocity.len(),
            });
        }
        let dim = samples[0].len();
        for v in samples.iter().chain(&velocity) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(Self { samples, velocity })
    }

    /// `γ(θ_j)` and `γ̇(θ_j)` from a closed-form parametrization.
    pub fn from_fn<F>(nodes: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>),
    {
        let (samples, velocity) = (0..nodes).map(|j| f(theta(j, nodes))).unzip();
        Self::new(samples, velocity)
    }

    /// Orbit `θ ↦ a(θ, x)`.
    pub fn orbit(a: &dyn DynAction, x: &[f64], nodes: usize) -> Result<Self> {
        Self::from_fn(nodes, |t| (a.apply(t, x), a.velocity(t, x)))
    }

    pub fn constant(x: &[f64], nodes: usize) -> Result<Self> {
        Self::from_fn(nodes, |_| (x.to_vec(), vec![0.0; x.len()]))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn velocity(&self) -> &[Vec<f64>] {
        &self.velocity
    }
}

/// `n` vector fields along a loop; `fields[i][j]` is `X_i(θ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopTangentFrame {
    fields: Vec<Vec<Vec<f64>>>,
}

impl LoopTangentFrame {
    pub fn new(fields: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = fields.len();
        for field in &fields {
            for v in field {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: v.len(),
                    });
                }
            }
        }
        Ok(Self { fields })
    }

    /// `X_i = ∂_i` at every node.
    pub fn coordinate(dim: usize, nodes: usize) -> Self {
        let fields = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                vec![e; nodes]
            })
            .collect();
        Self { fields }
    }

    /// Columns of `∂a(θ_j, x)/∂x`: the push-forward of the coordinate frame at `x`.
    pub fn pushed_coordinate(a: &dyn DynAction, x: &[f64], nodes: usize) -> Self {
        let n = x.len();
        let mut fields = vec![Vec::with_capacity(nodes); n];
        for j in 0..nodes {
            let (_, jac) = a.jacobian(theta(j, nodes), x);
            for (i, field) in fields.iter_mut().enumerate() {
                field.push((0..n).map(|nu| jac[nu * n + i]).collect());
            }
        }
        Self { fields }
    }

    pub fn fields(&self) -> &[Vec<Vec<f64>>] {
        &self.fields
    }

    /// Swaps `X_a` and `X_b`.
    pub fn swapped(mut self, a: usize, b: usize) -> Self {
        self.fields.swap(a, b);
        self
    }
}

/// `∫₀^{2π} k̂_{ν[λ₁…λₙ]}(γ) γ̇^ν X₁^{λ₁} ⋯ Xₙ^{λₙ} dθ`.
///
/// The antisymmetric block is top degree, so the λ-contraction is `det[X_i^λ]`.
pub fn eval_loop_form(
    kernel: &dyn KernelField,
    gamma: &DiscreteLoop,
    frame: &LoopTangentFrame,
) -> Result<f64> {
    let n = kernel.dim();
    let nodes = gamma.len();
    if gamma.dim() != n || frame.fields.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if gamma.dim() != n {
                gamma.dim()
            } else {
                frame.fields.len()
            },
        });
    }
    if frame.fields.iter().any(|f| f.len() != nodes) {
        return Err(Error::DimensionMismatch {
            expected: nodes,
            found: frame
                .fields
                .iter()
                .map(Vec::len)
                .find(|&l| l != nodes)
                .unwrap_or(0),
        });
    }
    let mut acc = 0.0;
    let mut block = vec![0.0; n * n];
    for j in 0..nodes {
        let k = kernel.eval(&gamma.samples[j])?;
        for (i, field) in frame.fields.iter().enumerate() {
            for lambda in 0..n {
                block[lambda * n + i] = field[j][lambda];
            }
        }
        acc += contract_values(&k, &gamma.velocity[j]) * det(n, &block);
    }
    Ok(acc * TAU / nodes as f64)
}

/// Loop-space pullback of the kernel form by the action, evaluated on the
/// coordinate frame at `x`: the θ-integral of `k̂_ν(a) ∂_θa^ν det ∂_x a`.
pub fn action_pullback_density(
    a: &dyn DynAction,
    kernel: &dyn KernelField,
    x: &[f64],
    nodes: usize,
) -> Result<f64> {
    let n = x.len();
    let mut acc = 0.0;
    for j in 0..nodes {
        let t = theta(j, nodes);
        let (y, jac) = a.jacobian(t, x);
        let k = kernel.eval(&y)?;
        acc += contract_values(&k, &a.velocity(t, x)) * det(n, &jac);
    }
    Ok(acc * TAU / nodes as f64)
}

/// `∫_M` of the loop-space pullback density, without the reduction to `2π k̂·ξ`.
pub fn loop_obstruction(
    m: &ManifoldSpec,
    a: &dyn DynAction,
    kernel: &dyn KernelField,
    q: &QuadratureSpec,
    nodes: usize,
) -> Result<IntegralResult> {
    integrate_density(m, q, |x| action_pullback_density(a, kernel, x, nodes))
}

/// `a_n(θ, x) = a(nθ, x)`.
#[derive(Clone)]
pub struct IteratedAction {
    inner: Arc<dyn DynAction>,
    n: u32,
}

impl IteratedAction {
    pub fn power(&self) -> u32 {
        self.n
    }
}

/// The `n`th iterate; iterating an iterate multiplies the powers.
pub fn iterate_action(a: Arc<dyn DynAction>, n: u32) -> Result<IteratedAction> {
    if n == 0 {
        return Err(Error::Incompatible(
            "iterate power must be at least 1".into(),
        ));
    }
    Ok(IteratedAction { inner: a, n })
}

impl DynAction for IteratedAction {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, theta: f64, x: &[f64]) -> Vec<f64> {
        self.inner.apply(self.n as f64 * theta, x)
    }
    fn jacobian(&self, theta: f64, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.inner.jacobian(self.n as f64 * theta, x)
    }
    fn velocity(&self, theta: f64, x: &[f64]) -> Vec<f64> {
        let n = self.n as f64;
        self.inner
            .velocity(n * theta, x)
            .into_iter()
            .map(|v| v * n)
            .collect()
    }
}

/// `F(s, θ, x) = a(θ + s ε sin θ, x)`; each slice is a reparametrized orbit map.
#[derive(Debug, Clone)]
pub struct ReparametrizedAction<A> {
    pub inner: A,
    pub epsilon: f64,
}

impl<A: ActionMap> Homotopy for ReparametrizedAction<A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply<S: Real>(&self, s: S, theta: S, x: &[S]) -> Vec<S> {
        self.inner.apply(theta + s * theta.sin() * self.epsilon, x)
    }
}

/// `F(s, θ, x) = a(θ, x)` for every `s`.
#[derive(Debug, Clone)]
pub struct ConstantHomotopy<A>(pub A);

impl<A: ActionMap> Homotopy for ConstantHomotopy<A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply<S: Real>(&self, _s: S, theta: S, x: &[S]) -> Vec<S> {
        self.0.apply(theta, x)
    }
}

const SINGULAR_TOL: f64 = 1e-12;

/// `∫₀^{2π} k̂_{λ₀}(F) (∂F/∂xⁱ ∂_θαⁱ)^{λ₀} det ∂F/∂x dθ` at `(s, x)`, where
/// `α = (∂F/∂x)⁻¹ ∂_sF` and `∂_θα = (∂F/∂x)⁻¹(∂_θ∂_sF − ∂_θ(∂F/∂x) α)`.
pub fn loop_form_exterior_derivative(
    kernel: &dyn KernelField,
    f: &dyn DynHomotopy,
    s: f64,
    x: &[f64],
    nodes: usize,
) -> Result<f64> {
    let n = x.len();
    let mut acc = 0.0;
    for j in 0..nodes {
        let t = theta(j, nodes);
        let jet = f.jet(s, t, x);
        let lu = Lu::new(n, &jet.jacobian, SINGULAR_TOL).ok_or_else(|| Error::Singular {
            what: "homotopy slice Jacobian",
            point: x.to_vec(),
        })?;
        let alpha = lu.solve(&jet.d_s);
        let rhs: Vec<f64> = (0..n)
            .map(|r| {
                jet.d_theta_d_s[r]
                    - (0..n)
                        .map(|c| jet.d_theta_jacobian[r * n + c] * alpha[c])
                        .sum::<f64>()
            })
            .collect();
        // J ∂_θα = rhs exactly; only det J needs the Jacobian again.
        let k = kernel.eval(&jet.value)?;
        acc += contract_values(&k, &rhs) * det(n, &jet.jacobian);
    }
    Ok(acc * TAU / nodes as f64)
}

/// Loop-space pullback density of the slice `F(s, ·, ·)`.
pub fn homotopy_slice_density(
    kernel: &dyn KernelField,
    f: &dyn DynHomotopy,
    s: f64,
    x: &[f64],
    nodes: usize,
) -> Result<f64> {
    let n = x.len();
    let mut acc = 0.0;
    for j in 0..nodes {
        let jet = f.jet(s, theta(j, nodes), x);
        let k = kernel.eval(&jet.value)?;
        acc += contract_values(&k, &jet.d_theta) * det(n, &jet.jacobian);
    }
    Ok(acc * TAU / nodes as f64)
}

/// Max over samples of `|F(s, θ, ·)* k̂ − k̂|` relative to `max |k̂|`.
pub fn homotopy_invariance_residual(
    kernel: &dyn KernelField,
    f: &dyn DynHomotopy,
    points: &[Vec<f64>],
    s_values: &[f64],
    thetas: &[f64],
) -> Result<f64> {
    let n = f.dim();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for x in points {
        let k = kernel.eval(x)?;
        scale = scale.max(k.iter().fold(0.0, |m, v| m.max(v.abs())));
        for &s in s_values {
            for &t in thetas {
                let jet = f.jet(s, t, x);
                let pulled = pullback_kernel_values(n, &jet.jacobian, &kernel.eval(&jet.value)?);
                for (p, q) in pulled.iter().zip(&k) {
                    worst = worst.max((p - q).abs());
                }
            }
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyCheck {
    pub start: IntegralResult,
    pub end: IntegralResult,
    pub difference: f64,
    pub invariance_residual: f64,
    pub warning: Option<String>,
}

/// Integrates the slice densities at `s = 0` and `s = 1` over `M`.
pub fn homotopy_invariance_check(
    kernel: &dyn KernelField,
    f: &dyn DynHomotopy,
    m: &ManifoldSpec,
    q: &QuadratureSpec,
    nodes: usize,
    invariance_tol: f64,
) -> Result<HomotopyCheck> {
    let probe: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let unit: Vec<f64> = (0..m.dim())
                .map(|a| ((i as f64 + 0.5) * (0.618_033_988_749_895 + 0.1 * a as f64)).fract())
                .collect();
            m.domain.from_unit(&unit, 0.05)
        })
        .collect();
    let thetas: Vec<f64> = (0..5).map(|j| theta(j, 5) + 0.1).collect();
    let residual = homotopy_invariance_residual(kernel, f, &probe, &[0.0, 0.5, 1.0], &thetas)?;
    let start = integrate_density(m, q, |x| homotopy_slice_density(kernel, f, 0.0, x, nodes))?;
    let end = integrate_density(m, q, |x| homotopy_slice_density(kernel, f, 1.0, x, nodes))?;
    let warning = (residual > invariance_tol).then(|| {
        format!("kernel not invariant along the homotopy: residual {residual:.3e} > {invariance_tol:.1e}")
    });
    Ok(HomotopyCheck {
        difference: (start.value - end.value).abs(),
        start,
        end,
        invariance_residual: residual,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ZeroKernel;
    use crate::zoo::torus::CoordinateRotation;

    #[test]
    fn loops_need_sixteen_nodes() {
        assert!(matches!(
            DiscreteLoop::constant(&[0.0, 0.0], 8),
            Err(Error::LoopTooCoarse { min: 16, found: 8 })
        ));
    }

    #[test]
    fn zero_kernel_gives_zero_density() {
        let a = CoordinateRotation {
            dim: 2,
            axis: 0,
            speed: 1.0,
        };
        assert_eq!(
            action_pullback_density(&a, &ZeroKernel(2), &[0.1, 0.2], 32).unwrap(),
            0.0
        );
    }

    #[test]
    fn iterate_rejects_zero_power() {
        let a: Arc<dyn DynAction> = Arc::new(CoordinateRotation {
            dim: 1,
            axis: 0,
            speed: 1.0,
        });
        assert!(iterate_action(a, 0).is_err());
    }
}
