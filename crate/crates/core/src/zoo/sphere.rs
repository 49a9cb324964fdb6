//! Odd spheres `S^{2m+1} ⊂ ℂ^{m+1}` in Hopf coordinates.
//!
//! Coordinates are `(ψ, ϑ₁, φ₁, …, ϑ_m, φ_m)` with ψ, φ ∈ [0, 2π) periodic and
//! ϑ ∈ (0, π/2). Radii are nested spherical: `r₀ = cos ϑ₁`,
//! `r_d = sin ϑ₁ ⋯ sin ϑ_d cos ϑ_{d+1}`, `r_m = sin ϑ₁ ⋯ sin ϑ_m`, and phases
//! `ξ₀ = ψ`, `ξ_d = ψ + φ_d`, so `z_d = r_d e^{iξ_d}`. The chart misses the
//! null set where some `r_d` vanishes.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::Result;
use crate::geometry::chart::{ChartDomain, ManifoldSpec};
use crate::geometry::fields::{ActionMap, FormField, MetricField, Tensor11Field, VectorField};
use crate::geometry::linalg::{matmul, Lu};
use crate::real::Real;

/// Hopf coordinate system on `S^{2m+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopfChart {
    pub m: usize,
}

impl HopfChart {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Hopf chart needs m ≥ 1");
        Self { m }
    }

    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }

    pub fn theta_axis(a: usize) -> usize {
        2 * a - 1
    }

    pub fn phi_axis(a: usize) -> usize {
        2 * a
    }

    pub fn domain(&self) -> ChartDomain {
        let n = self.dim();
        let mut bounds = Vec::with_capacity(n);
        let mut periodic = Vec::with_capacity(n);
        for i in 0..n {
            if i % 2 == 1 {
                bounds.push((0.0, FRAC_PI_2));
                periodic.push(false);
            } else {
                bounds.push((0.0, TAU));
                periodic.push(true);
            }
        }
        ChartDomain::new(bounds, periodic).expect("valid Hopf box")
    }

    pub fn manifold(&self) -> ManifoldSpec {
        ManifoldSpec::new(format!("S^{}", self.dim()), self.domain())
            .with_embedding_dim(2 * self.m + 2)
    }

    /// Radii `r_d` and `∂r_d/∂ϑ_a` (row d, column a − 1).
    pub fn radii<S: Real>(&self, x: &[S]) -> (Vec<S>, Vec<Vec<S>>) {
        let m = self.m;
        let s: Vec<S> = (1..=m).map(|a| x[Self::theta_axis(a)].sin()).collect();
        let c: Vec<S> = (1..=m).map(|a| x[Self::theta_axis(a)].cos()).collect();
        let mut r = Vec::with_capacity(m + 1);
        let mut dr = vec![vec![S::zero(); m]; m + 1];
        for d in 0..=m {
            // r_d = Π_{a<d} s_a · (c_d if d < m)
            let mut prod = S::one();
            for sa in s.iter().take(d) {
                prod *= *sa;
            }
            let last = if d < m { c[d] } else { S::one() };
            r.push(prod * last);
            for a in 0..m {
                let mut v = S::one();
                if a < d {
                    for (b, sb) in s.iter().enumerate().take(d) {
                        v *= if b == a { c[b] } else { *sb };
                    }
                    v *= last;
                } else if a == d && d < m {
                    v = prod * (-s[d]);
                } else {
                    v = S::zero();
                }
                dr[d][a] = v;
            }
        }
        (r, dr)
    }

    /// `∂ξ_d/∂x^i`, constant.
    pub fn phase_gradient(&self, d: usize, i: usize) -> f64 {
        if i == 0 || (d > 0 && i == Self::phi_axis(d)) {
            1.0
        } else {
            0.0
        }
    }

    /// `∂r_d/∂x^i` from the radial table.
    fn radial_gradient<S: Real>(&self, dr: &[Vec<S>], d: usize, i: usize) -> S {
        if i % 2 == 1 {
            dr[d][i.div_ceil(2) - 1]
        } else {
            S::zero()
        }
    }

    /// Real coordinates `(Re z₀, Im z₀, …)` of the embedding in `ℝ^{2m+2}`.
    pub fn embed<S: Real>(&self, x: &[S]) -> Vec<S> {
        let (r, _) = self.radii(x);
        let mut out = Vec::with_capacity(2 * self.m + 2);
        for (d, rd) in r.iter().enumerate() {
            let xi = if d == 0 {
                x[0]
            } else {
                x[0] + x[Self::phi_axis(d)]
            };
            out.push(*rd * xi.cos());
            out.push(*rd * xi.sin());
        }
        out
    }

    /// Induced round metric `Σ dr_d² + Σ r_d² dξ_d²`.
    pub fn round_metric<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let (r, dr) = self.radii(x);
        let mut g = vec![S::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = S::zero();
                for d in 0..=self.m {
                    acc += self.radial_gradient(&dr, d, i) * self.radial_gradient(&dr, d, j);
                    let w = self.phase_gradient(d, i) * self.phase_gradient(d, j);
                    if w != 0.0 {
                        acc += r[d] * r[d] * w;
                    }
                }
                g[i * n + j] = acc;
                g[j * n + i] = acc;
            }
        }
        g
    }

    /// `η = Σ r_d² dξ_d`, the restriction of `Σ (x dy − y dx)`.
    pub fn contact_form<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let (r, _) = self.radii(x);
        (0..n)
            .map(|i| {
                let mut acc = S::zero();
                for (d, rd) in r.iter().enumerate() {
                    let w = self.phase_gradient(d, i);
                    if w != 0.0 {
                        acc += *rd * *rd * w;
                    }
                }
                acc
            })
            .collect()
    }

    /// `⟨∂_l Z, J ∂_i Z⟩ = Σ r_d (∂_lξ_d ∂_i r_d − ∂_l r_d ∂_iξ_d)`, row l.
    fn complex_pairing<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let (r, dr) = self.radii(x);
        let mut w = vec![S::zero(); n * n];
        for l in 0..n {
            for i in 0..n {
                let mut acc = S::zero();
                for d in 0..=self.m {
                    let a = self.radial_gradient(&dr, d, i) * self.phase_gradient(d, l);
                    let b = self.radial_gradient(&dr, d, l) * self.phase_gradient(d, i);
                    acc += r[d] * (a - b);
                }
                w[l * n + i] = acc;
            }
        }
        w
    }

    /// `φ^h_i = g^{hl} ⟨∂_l Z, J ∂_i Z⟩`, the tangential part of `J`.
    pub fn structure_tensor<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let g = self.round_metric(x);
        let w = self.complex_pairing(x);
        let lu = Lu::new(n, &g, 1e-300).expect("round metric is invertible on the chart interior");
        matmul(n, &lu.inverse(), &w)
    }

    /// Volume of the unit `S^{2m+1}`: `2π^{m+1}/m!`.
    pub fn volume(&self) -> f64 {
        let fact: f64 = (1..=self.m).map(|k| k as f64).product();
        2.0 * PI.powi(self.m as i32 + 1) / fact
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetric(pub HopfChart);

impl MetricField for RoundMetric {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> {
        self.0.round_metric(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfContactForm(pub HopfChart);

impl FormField for HopfContactForm {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn degree(&self) -> usize {
        1
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        self.0.contact_form(x)
    }
}

/// Reeb field `∂_ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReebField(pub HopfChart);

impl VectorField for ReebField {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn components<S: Real>(&self, _x: &[S]) -> Vec<S> {
        let mut v = vec![S::zero(); self.0.dim()];
        v[0] = S::one();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureTensor(pub HopfChart);

impl Tensor11Field for StructureTensor {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> {
        self.0.structure_tensor(x)
    }
}

/// Hopf action `z ↦ e^{iθ} z`, i.e. `ψ ↦ ψ + θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfAction(pub HopfChart);

impl ActionMap for HopfAction {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply<S: Real>(&self, theta: S, x: &[S]) -> Vec<S> {
        let mut y = x.to_vec();
        y[0] += theta;
        y
    }
}

/// Standard Sasakian data `(g, φ, ξ, η)` on `S^{2m+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SasakianStructure {
    pub chart: HopfChart,
    pub g: RoundMetric,
    pub phi: StructureTensor,
    pub xi: ReebField,
    pub eta: HopfContactForm,
}

/// Residuals of the Sasakian identities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SasakianResiduals {
    /// `|η(ξ) − 1|`
    pub eta_of_xi: f64,
    /// `max |dη(ξ, ·)|`
    pub reeb_kernel: f64,
    /// `max |φ² + I − η ⊗ ξ|`
    pub phi_squared: f64,
}

impl SasakianStructure {
    pub fn new(m: usize) -> Self {
        let chart = HopfChart::new(m);
        Self {
            chart,
            g: RoundMetric(chart),
            phi: StructureTensor(chart),
            xi: ReebField(chart),
            eta: HopfContactForm(chart),
        }
    }

    pub fn residuals(&self, x: &[f64]) -> Result<SasakianResiduals> {
        use crate::geometry::forms::{exterior_derivative, interior_product};
        let n = self.chart.dim();
        let eta = self.eta.coefficients(x);
        let xi = self.xi.components(x);
        let eta_of_xi: f64 = eta.iter().zip(&xi).map(|(a, b)| a * b).sum();
        let d_eta = exterior_derivative(self.eta)?;
        let reeb = interior_product(self.xi, d_eta)?;
        let reeb_kernel = reeb
            .coefficients(x)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let phi = Tensor11Field::matrix(&self.phi, x);
        let phi2 = matmul(n, &phi, &phi);
        let mut phi_squared = 0.0f64;
        for h in 0..n {
            for i in 0..n {
                let id = if h == i { 1.0 } else { 0.0 };
                // (φ²)^h_i + δ^h_i − ξ^h η_i
                let v = phi2[h * n + i] + id - xi[h] * eta[i];
                phi_squared = phi_squared.max(v.abs());
            }
        }
        Ok(SasakianResiduals {
            eta_of_xi: (eta_of_xi - 1.0).abs(),
            reeb_kernel,
            phi_squared,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_lands_on_unit_sphere_and_metric_is_induced() {
        let chart = HopfChart::new(2);
        let x = [0.3, 0.7, 1.9, 1.1, 4.0];
        let z = chart.embed(&x[..]);
        let norm: f64 = z.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        // induced metric from the embedding Jacobian
        let n = chart.dim();
        let mut jac = vec![vec![0.0; 2 * chart.m + 2]; n];
        for (i, col) in jac.iter_mut().enumerate() {
            let dual = crate::real::seeded(&x[..], i);
            *col = chart.embed(&dual).iter().map(|d| d.eps).collect();
        }
        let g = chart.round_metric(&x[..]);
        for i in 0..n {
            for j in 0..n {
                let e: f64 = jac[i].iter().zip(&jac[j]).map(|(a, b)| a * b).sum();
                assert!((g[i * n + j] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sasakian_identities_hold() {
        for m in [1, 2] {
            let s = SasakianStructure::new(m);
            let mut x = vec![0.4; s.chart.dim()];
            x[1] = 0.6;
            let r = s.residuals(&x).unwrap();
            assert!(r.eta_of_xi < 1e-12);
            assert!(r.reeb_kernel < 1e-12);
            assert!(r.phi_squared < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn volumes_of_odd_spheres() {
        assert!((HopfChart::new(1).volume() - 2.0 * PI * PI).abs() < 1e-12);
        assert!((HopfChart::new(2).volume() - PI.powi(3)).abs() < 1e-12);
    }
}
