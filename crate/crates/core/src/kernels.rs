//! Kernel tensors `k̂ ∈ Ω¹ ⊗ Ωⁿ` and their contraction with vector fields.
//!
//! A kernel on an n-dimensional chart is stored as the n numbers `k̂_ν`, the
//! coefficient of `dx^ν ⊗ dx¹ ∧ … ∧ dxⁿ`; the antisymmetric block is top
//! degree, so every other component is `sign · k̂_ν`.

use std::sync::Arc;

use crate::curvature::{curvature_at, idx4, weyl};
use crate::error::{Error, Result};
use crate::geometry::basis::{permutation_sign, permutations, sort_with_sign};
use crate::geometry::fields::{
    DynAction, DynForm, DynMap, DynMetric, DynVector, FormField, MetricField,
};
use crate::geometry::forms::{exterior_coefficients, wedge_coefficients};
use crate::geometry::linalg::det;
use crate::real::{seeded, Real};

/// Pointwise kernel evaluator.
pub trait KernelField: Send + Sync {
    fn dim(&self) -> usize;
    /// `k̂_ν` for ν in `0..n`.
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// `k̂_{ν[λ₁…λₙ]}` at an arbitrary ordering of the antisymmetric block.
pub fn kernel_component(values: &[f64], nu: usize, lambdas: &[usize]) -> f64 {
    match sort_with_sign(lambdas) {
        Some((sorted, sign)) if sorted.iter().enumerate().all(|(i, &l)| i == l) => {
            sign * values[nu]
        }
        _ => 0.0,
    }
}

/// Top coefficient of `k̂ · ξ = k̂_ν ξ^ν`.
pub fn kernel_contract(kernel: &dyn KernelField, xi: &dyn DynVector, x: &[f64]) -> Result<f64> {
    let k = kernel.eval(x)?;
    Ok(contract_values(&k, &xi.eval(x)))
}

pub fn contract_values(k: &[f64], xi: &[f64]) -> f64 {
    k.iter().zip(xi).map(|(a, b)| a * b).sum()
}

/// `(f*k̂)_j = det J · Σ_ν k̂_ν(f(x)) J^ν_j`.
pub fn pullback_kernel_values(n: usize, jac: &[f64], k_at_fx: &[f64]) -> Vec<f64> {
    let d = det(n, jac);
    (0..n)
        .map(|j| d * (0..n).map(|nu| k_at_fx[nu] * jac[nu * n + j]).sum::<f64>())
        .collect()
}

pub fn pullback_kernel(kernel: &dyn KernelField, f: &dyn DynMap, x: &[f64]) -> Result<Vec<f64>> {
    let (y, jac) = f.jacobian(x);
    Ok(pullback_kernel_values(x.len(), &jac, &kernel.eval(&y)?))
}

/// `a(θ, ·)* k̂` at `x`.
pub fn pullback_kernel_by_action(
    kernel: &dyn KernelField,
    a: &dyn DynAction,
    theta: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    let (y, jac) = a.jacobian(theta, x);
    Ok(pullback_kernel_values(x.len(), &jac, &kernel.eval(&y)?))
}

/// Top-degree factor of a product kernel.
#[derive(Clone)]
pub enum TopForm {
    Form(Arc<dyn DynForm>),
    /// `√det g du¹ ∧ … ∧ duⁿ`.
    Volume(Arc<dyn DynMetric>),
}

impl TopForm {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            TopForm::Form(mu) => Ok(mu.eval(x)[0]),
            TopForm::Volume(g) => riemannian_volume_density(g.as_ref(), x),
        }
    }
}

/// `√det g`, rejecting metrics that are not positive definite.
pub fn riemannian_volume_density(g: &dyn DynMetric, x: &[f64]) -> Result<f64> {
    let n = g.dim();
    let m = nalgebra::DMatrix::from_row_slice(n, n, &g.eval(x));
    match m.clone().cholesky() {
        Some(ch) => Ok(ch.l().diagonal().product()),
        None => Err(Error::NotPositiveDefinite {
            point: x.to_vec(),
            min_eigenvalue: m.symmetric_eigenvalues().min(),
        }),
    }
}

/// `k̂ = η ⊗ μ`.
#[derive(Clone)]
pub struct ProductKernel {
    eta: Arc<dyn DynForm>,
    top: TopForm,
}

impl KernelField for ProductKernel {
    fn dim(&self) -> usize {
        self.eta.dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mu = self.top.eval(x)?;
        Ok(self.eta.eval(x).into_iter().map(|e| e * mu).collect())
    }
}

pub fn product_kernel(eta: Arc<dyn DynForm>, mu: Arc<dyn DynForm>) -> Result<ProductKernel> {
    let n = eta.dim();
    if eta.degree() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: eta.degree(),
        });
    }
    if mu.degree() != n || mu.dim() != n {
        return Err(Error::NotTopDegree {
            expected: n,
            found: mu.degree(),
        });
    }
    Ok(ProductKernel {
        eta,
        top: TopForm::Form(mu),
    })
}

/// `η ∧ (dη)^k`, a top form when `n = 2k + 1`.
#[derive(Debug, Clone)]
pub struct ContactVolume<E> {
    eta: E,
    k: usize,
}

impl<E: FormField> ContactVolume<E> {
    pub fn new(eta: E, k: usize) -> Result<Self> {
        let n = eta.dim();
        if eta.degree() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: eta.degree(),
            });
        }
        if n != 2 * k + 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * k + 1,
                found: n,
            });
        }
        Ok(Self { eta, k })
    }
}

impl<E: FormField> FormField for ContactVolume<E> {
    fn dim(&self) -> usize {
        self.eta.dim()
    }
    fn degree(&self) -> usize {
        2 * self.k + 1
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = FormField::dim(self);
        let eta = self.eta.coefficients(x);
        let deta: Vec<Vec<S>> = (0..n)
            .map(|i| {
                self.eta
                    .coefficients(&seeded(x, i))
                    .iter()
                    .map(|d| d.eps)
                    .collect()
            })
            .collect();
        let two = exterior_coefficients(n, 1, &deta);
        let mut acc = eta;
        let mut degree = 1;
        for _ in 0..self.k {
            acc = wedge_coefficients(n, degree, &acc, 2, &two);
            degree += 2;
        }
        acc
    }
}

/// `k̂^η = η ⊗ (η ∧ (dη)^k)` on a `(2k+1)`-dimensional chart.
pub fn contact_kernel<E: FormField + Clone + 'static>(eta: E, k: usize) -> Result<ProductKernel> {
    let volume = ContactVolume::new(eta.clone(), k)?;
    Ok(ProductKernel {
        eta: Arc::new(eta),
        top: TopForm::Form(Arc::new(volume)),
    })
}

/// `η ⊗ dvol_g`.
pub fn psh_kernel<E, G>(eta: E, g: G) -> Result<ProductKernel>
where
    E: FormField + 'static,
    G: MetricField + 'static,
{
    if eta.degree() != 1 || eta.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: eta.dim(),
        });
    }
    Ok(ProductKernel {
        eta: Arc::new(eta),
        top: TopForm::Volume(Arc::new(g)),
    })
}

/// Which curvature tensor feeds the ladder contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderSource {
    Riemann,
    Weyl,
}

/// Curvature ladder kernel on a 5-dimensional chart:
/// `k̂_{j[i₁…i₅]} = Σ_σ sgn σ T_{i_{σ1} ℓ₁ j}{}^{ℓ₀} T_{i_{σ2} i_{σ3} ℓ₂}{}^{ℓ₁} T_{i_{σ4} i_{σ5} ℓ₀}{}^{ℓ₂}`.
///
/// The ℓ-chain follows the conformal ladder; the Riemann variant reuses it.
#[derive(Debug, Clone)]
pub struct LadderKernel<G> {
    g: G,
    source: LadderSource,
}

fn ladder<G: MetricField>(g: G, source: LadderSource) -> Result<LadderKernel<G>> {
    if g.dim() != 5 {
        return Err(Error::LadderDimension(g.dim()));
    }
    Ok(LadderKernel { g, source })
}

/// Kernel built from the Riemann tensor (n = 5).
pub fn wcs_kernel<G: MetricField>(g: G) -> Result<LadderKernel<G>> {
    ladder(g, LadderSource::Riemann)
}

/// Kernel built from the Weyl tensor (n = 5).
pub fn conformal_kernel<G: MetricField>(g: G) -> Result<LadderKernel<G>> {
    ladder(g, LadderSource::Weyl)
}

impl<G: MetricField> LadderKernel<G> {
    pub fn source(&self) -> LadderSource {
        self.source
    }

    /// The (1,3) tensor the ladder is built from, layout `[k][j][i][h]`.
    pub fn tensor(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pack = curvature_at(&self.g, x)?;
        match self.source {
            LadderSource::Riemann => Ok(pack.riemann),
            LadderSource::Weyl => weyl(&pack),
        }
    }
}

impl<G: MetricField> KernelField for LadderKernel<G> {
    fn dim(&self) -> usize {
        5
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(ladder_contract(&self.tensor(x)?).to_vec())
    }
}

/// Fast ladder contraction for a tensor antisymmetric in its first two slots.
///
/// Pairs `(σ2, σ3)` and `(σ4, σ5)` each contribute a factor 2, so the 120-term
/// sum reduces to 30 ordered pair splits with `W = M₃ · M₂` shared across ν.
pub fn ladder_contract(t: &[f64]) -> [f64; 5] {
    const N: usize = 5;
    let at = |k: usize, j: usize, i: usize, h: usize| t[idx4(N, k, j, i, h)];
    // antisymmetrized copy so the pair shortcut is exact for any input
    let mut a = vec![0.0; N * N * N * N];
    for k in 0..N {
        for j in 0..N {
            for i in 0..N {
                for h in 0..N {
                    a[idx4(N, k, j, i, h)] = 0.5 * (at(k, j, i, h) - at(j, k, i, h));
                }
            }
        }
    }
    let am = |k: usize, j: usize, i: usize, h: usize| a[idx4(N, k, j, i, h)];
    let mut out = [0.0; N];
    for first in 0..N {
        let rest: Vec<usize> = (0..N).filter(|&v| v != first).collect();
        for (p, q) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let (b, c) = (rest[p], rest[q]);
            let others: Vec<usize> = rest.iter().copied().filter(|&v| v != b && v != c).collect();
            let (d, e) = (others[0], others[1]);
            let sign = permutation_sign(&[first, b, c, d, e]);
            // W[l0][l1] = Σ_l2 A[d][e][l0][l2] A[b][c][l2][l1]
            let mut w = [[0.0; N]; N];
            for (l0, row) in w.iter_mut().enumerate() {
                for (l1, slot) in row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for l2 in 0..N {
                        acc += am(d, e, l0, l2) * am(b, c, l2, l1);
                    }
                    *slot = acc;
                }
            }
            for (nu, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for l0 in 0..N {
                    for l1 in 0..N {
                        acc += am(first, l1, nu, l0) * w[l0][l1];
                    }
                }
                *o += 4.0 * sign * acc;
            }
        }
    }
    out
}

/// Direct 120-permutation evaluation of the ladder, without shortcuts.
pub fn ladder_brute_force(t: &[f64]) -> [f64; 5] {
    const N: usize = 5;
    let at = |k: usize, j: usize, i: usize, h: usize| t[idx4(N, k, j, i, h)];
    let mut out = [0.0; N];
    for sigma in permutations(N) {
        let sign = permutation_sign(&sigma);
        for (nu, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for l0 in 0..N {
                for l1 in 0..N {
                    for l2 in 0..N {
                        acc += at(sigma[0], l1, nu, l0)
                            * at(sigma[1], sigma[2], l2, l1)
                            * at(sigma[3], sigma[4], l0, l2);
                    }
                }
            }
            *o += sign * acc;
        }
    }
    out
}

/// Type-erased kernel handle.
pub type SharedKernel = Arc<dyn KernelField>;

impl<T: KernelField + ?Sized> KernelField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).eval(x)
    }
}

/// A kernel that is identically zero; useful as a control.
#[derive(Debug, Clone, Copy)]
pub struct ZeroKernel(pub usize);

impl KernelField for ZeroKernel {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, _x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{FlatMetric, HypersphericalMetric};
    use crate::geometry::forms::ConstantForm;

    #[test]
    fn ladder_fast_path_matches_brute_force_on_random_tensor() {
        // deterministic pseudo-random tensor, antisymmetric in the first pair
        let mut t = vec![0.0; 625];
        let mut state = 0x2545F4914F6CDD1Du64;
        for k in 0..5 {
            for j in 0..k {
                for i in 0..5 {
                    for h in 0..5 {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        let v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                        t[idx4(5, k, j, i, h)] = v;
                        t[idx4(5, j, k, i, h)] = -v;
                    }
                }
            }
        }
        let fast = ladder_contract(&t);
        let slow = ladder_brute_force(&t);
        for (a, b) in fast.iter().zip(slow) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!(fast.iter().any(|v| v.abs() > 1e-6));
    }

    #[test]
    fn ladder_requires_dimension_five() {
        assert_eq!(
            wcs_kernel(FlatMetric(3)).err().unwrap(),
            Error::LadderDimension(3)
        );
        assert!(conformal_kernel(HypersphericalMetric(7)).is_err());
    }

    #[test]
    fn flat_metric_gives_zero_wcs_kernel() {
        let k = wcs_kernel(FlatMetric(5)).unwrap();
        assert_eq!(k.eval(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn round_sphere_conformal_kernel_vanishes() {
        let k = conformal_kernel(HypersphericalMetric(5)).unwrap();
        let v = k.eval(&[0.9, 1.2, 0.7, 1.9, 0.4]).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-10));
    }

    #[test]
    fn product_kernel_rejects_non_top_mu() {
        let eta: Arc<dyn DynForm> = Arc::new(ConstantForm::basis(3, &[0]).unwrap());
        let mu: Arc<dyn DynForm> = Arc::new(ConstantForm::basis(3, &[0, 1]).unwrap());
        assert_eq!(
            product_kernel(eta, mu).err().unwrap(),
            Error::NotTopDegree {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn closed_eta_gives_zero_contact_kernel() {
        let k = contact_kernel(ConstantForm::basis(3, &[2]).unwrap(), 1).unwrap();
        assert_eq!(k.eval(&[0.3, 0.2, 0.1]).unwrap(), vec![0.0; 3]);
        assert!(contact_kernel(ConstantForm::basis(4, &[2]).unwrap(), 1).is_err());
    }

    #[test]
    fn component_sign_follows_permutation() {
        let values = [2.0, 3.0, 5.0];
        assert_eq!(kernel_component(&values, 1, &[0, 1, 2]), 3.0);
        assert_eq!(kernel_component(&values, 1, &[1, 0, 2]), -3.0);
        assert_eq!(kernel_component(&values, 2, &[1, 1, 2]), 0.0);
    }
}
