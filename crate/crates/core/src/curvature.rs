//! Levi-Civita curvature from metric 2-jets.
//!
//! Index conventions (all arrays flat, row-major over the listed order):
//! - `christoffel[h][i][j] = Γ^h_{ij}`
//! - `riemann[k][j][i][h] = R_{kji}{}^h = ∂_jΓ^h_{ki} − ∂_kΓ^h_{ji} + Γ^h_{jt}Γ^t_{ki} − Γ^h_{kt}Γ^t_{ji}`,
//!   so the unit sphere gives `g_{ki}δ_j^h − g_{ji}δ_k^h`
//! - `ricci[k][i] = R_{kji}{}^j`, positive on round spheres
//! - `weyl[k][j][i][h]`, same layout as `riemann`

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::fields::{FormField, MetricField, ScalarField};
use crate::geometry::linalg::min_symmetric_eigenvalue;
use crate::real::{second_jet, Real};

#[inline]
pub fn idx3(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

#[inline]
pub fn idx4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

/// Metric value with exact first and second partials at a point.
#[derive(Debug, Clone)]
pub struct Jet2Metric {
    pub dim: usize,
    pub point: Vec<f64>,
    /// `g[i][j]`
    pub g: Vec<f64>,
    /// `dg[k][i][j] = ∂_k g_{ij}`
    pub dg: Vec<f64>,
    /// `ddg[l][k][i][j] = ∂_l ∂_k g_{ij}`
    pub ddg: Vec<f64>,
}

pub fn metric_jets<M: MetricField + ?Sized>(g: &M, x: &[f64]) -> Result<Jet2Metric> {
    let n = g.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let jet = second_jet(x, |p| g.matrix(p));
    let m = n * n;
    let sym = |i: usize, j: usize| if i <= j { i * n + j } else { j * n + i };
    let mut gm = vec![0.0; m];
    let mut dg = vec![0.0; n * m];
    let mut ddg = vec![0.0; n * n * m];
    for i in 0..n {
        for j in 0..n {
            let c = sym(i, j);
            gm[i * n + j] = jet.values[c];
            for k in 0..n {
                dg[idx3(n, k, i, j)] = jet.gradient[k * m + c];
                for l in 0..n {
                    ddg[idx4(n, l, k, i, j)] = jet.hessian[(l * n + k) * m + c];
                }
            }
        }
    }
    if DMatrix::from_row_slice(n, n, &gm).cholesky().is_none() {
        return Err(Error::NotPositiveDefinite {
            point: x.to_vec(),
            min_eigenvalue: min_symmetric_eigenvalue(n, &gm),
        });
    }
    Ok(Jet2Metric {
        dim: n,
        point: x.to_vec(),
        g: gm,
        dg,
        ddg,
    })
}

/// Curvature tensors at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub dim: usize,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub christoffel: Vec<f64>,
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

pub fn curvature_pack(jet: &Jet2Metric) -> Result<CurvaturePack> {
    let n = jet.dim;
    let g_inv = DMatrix::from_row_slice(n, n, &jet.g)
        .try_inverse()
        .ok_or_else(|| Error::Singular {
            what: "metric",
            point: jet.point.clone(),
        })?;
    let gi = |a: usize, b: usize| g_inv[(a, b)];
    let dg = |k: usize, i: usize, j: usize| jet.dg[idx3(n, k, i, j)];
    let ddg = |l: usize, k: usize, i: usize, j: usize| jet.ddg[idx4(n, l, k, i, j)];

    // lowered symbols Γ_{m,ij} and their derivatives ∂_l Γ_{m,ij}
    let mut low = vec![0.0; n * n * n];
    let mut dlow = vec![0.0; n * n * n * n];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                low[idx3(n, m, i, j)] = 0.5 * (dg(i, m, j) + dg(j, m, i) - dg(m, i, j));
                for l in 0..n {
                    dlow[idx4(n, l, m, i, j)] =
                        0.5 * (ddg(l, i, m, j) + ddg(l, j, m, i) - ddg(l, m, i, j));
                }
            }
        }
    }
    // ∂_l g^{hm} = −g^{ha} ∂_l g_{ab} g^{bm}
    let mut half = vec![0.0; n * n * n]; // [l][a][m] = ∂_l g_{ab} g^{bm}
    for l in 0..n {
        for a in 0..n {
            for m in 0..n {
                half[idx3(n, l, a, m)] = (0..n).map(|b| dg(l, a, b) * gi(b, m)).sum();
            }
        }
    }
    let mut dginv = vec![0.0; n * n * n];
    for l in 0..n {
        for h in 0..n {
            for m in 0..n {
                dginv[idx3(n, l, h, m)] = -(0..n)
                    .map(|a| gi(h, a) * half[idx3(n, l, a, m)])
                    .sum::<f64>();
            }
        }
    }
    let mut gamma = vec![0.0; n * n * n];
    let mut dgamma = vec![0.0; n * n * n * n]; // [l][h][i][j]
    for h in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    acc += gi(h, m) * low[idx3(n, m, i, j)];
                }
                gamma[idx3(n, h, i, j)] = acc;
                for l in 0..n {
                    let mut d = 0.0;
                    for m in 0..n {
                        d += dginv[idx3(n, l, h, m)] * low[idx3(n, m, i, j)]
                            + gi(h, m) * dlow[idx4(n, l, m, i, j)];
                    }
                    dgamma[idx4(n, l, h, i, j)] = d;
                }
            }
        }
    }
    let gam = |h: usize, i: usize, j: usize| gamma[idx3(n, h, i, j)];
    let mut riemann = vec![0.0; n * n * n * n];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for h in 0..n {
                    let mut v = dgamma[idx4(n, j, h, k, i)] - dgamma[idx4(n, k, h, j, i)];
                    for t in 0..n {
                        v += gam(h, j, t) * gam(t, k, i) - gam(h, k, t) * gam(t, j, i);
                    }
                    riemann[idx4(n, k, j, i, h)] = v;
                }
            }
        }
    }
    // exact antisymmetry in (k, j)
    for k in 0..n {
        for j in 0..k {
            for i in 0..n {
                for h in 0..n {
                    let a = riemann[idx4(n, k, j, i, h)];
                    let b = riemann[idx4(n, j, k, i, h)];
                    let v = 0.5 * (a - b);
                    riemann[idx4(n, k, j, i, h)] = v;
                    riemann[idx4(n, j, k, i, h)] = -v;
                }
            }
        }
        for i in 0..n {
            for h in 0..n {
                riemann[idx4(n, k, k, i, h)] = 0.0;
            }
        }
    }
    let mut ricci = vec![0.0; n * n];
    for k in 0..n {
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += riemann[idx4(n, k, j, i, j)];
            }
            ricci[k * n + i] = acc;
        }
    }
    for k in 0..n {
        for i in 0..k {
            let v = 0.5 * (ricci[k * n + i] + ricci[i * n + k]);
            ricci[k * n + i] = v;
            ricci[i * n + k] = v;
        }
    }
    let mut scalar = 0.0;
    for k in 0..n {
        for i in 0..n {
            scalar += gi(k, i) * ricci[k * n + i];
        }
    }
    Ok(CurvaturePack {
        dim: n,
        g: jet.g.clone(),
        g_inv: g_inv.transpose().as_slice().to_vec(),
        christoffel: gamma,
        riemann,
        ricci,
        scalar,
    })
}

impl CurvaturePack {
    pub fn riemann_at(&self, k: usize, j: usize, i: usize, h: usize) -> f64 {
        self.riemann[idx4(self.dim, k, j, i, h)]
    }

    /// `R_{kjih} = g_{hl} R_{kji}{}^l`.
    pub fn riemann_lowered(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n * n * n];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for h in 0..n {
                        let mut acc = 0.0;
                        for l in 0..n {
                            acc += self.g[h * n + l] * self.riemann[idx4(n, k, j, i, l)];
                        }
                        out[idx4(n, k, j, i, h)] = acc;
                    }
                }
            }
        }
        out
    }

    /// Weyl tensor in the same layout as `riemann`.
    pub fn weyl(&self) -> Result<Vec<f64>> {
        weyl(self)
    }
}

/// `C_{kji}{}^h = R_{kji}{}^h + A_{kji}{}^h − A_{jki}{}^h` with
/// `A_{kji}{}^h = −(Ric_{ki}δ_j^h + g_{ki}Ric_j{}^h)/(n−2) + R g_{ki}δ_j^h/((n−1)(n−2))`.
pub fn weyl(p: &CurvaturePack) -> Result<Vec<f64>> {
    let n = p.dim;
    if n < 4 {
        return Err(Error::WeylBelowFour(n));
    }
    let nf = n as f64;
    let c1 = 1.0 / (nf - 2.0);
    let c2 = p.scalar / ((nf - 1.0) * (nf - 2.0));
    // Ric_j^h = g^{hl} Ric_{jl}
    let mut ric_up = vec![0.0; n * n];
    for j in 0..n {
        for h in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                acc += p.g_inv[h * n + l] * p.ricci[j * n + l];
            }
            ric_up[j * n + h] = acc;
        }
    }
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let a = |k: usize, j: usize, i: usize, h: usize| {
        -c1 * (p.ricci[k * n + i] * delta(j, h) + p.g[k * n + i] * ric_up[j * n + h])
            + c2 * p.g[k * n + i] * delta(j, h)
    };
    let mut out = vec![0.0; n * n * n * n];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for h in 0..n {
                    out[idx4(n, k, j, i, h)] =
                        p.riemann[idx4(n, k, j, i, h)] + (a(k, j, i, h) - a(j, k, i, h));
                }
            }
        }
    }
    Ok(out)
}

/// Metric curvature in one call.
pub fn curvature_at<M: MetricField + ?Sized>(g: &M, x: &[f64]) -> Result<CurvaturePack> {
    curvature_pack(&metric_jets(g, x)?)
}

/// `g + ρ² η ⊗ η`.
#[derive(Debug, Clone)]
pub struct DeformedMetric<G, E> {
    g: G,
    eta: E,
    rho: f64,
}

pub fn deformed_metric<G: MetricField, E: FormField>(
    g: G,
    eta: E,
    rho: f64,
) -> Result<DeformedMetric<G, E>> {
    if eta.degree() != 1 || eta.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: eta.degree(),
        });
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::NonPositiveFactor {
            value: rho,
            point: vec![],
        });
    }
    Ok(DeformedMetric { g, eta, rho })
}

impl<G, E> DeformedMetric<G, E> {
    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl<G: MetricField, E: FormField> MetricField for DeformedMetric<G, E> {
    fn dim(&self) -> usize {
        self.g.dim()
    }
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let mut m = self.g.matrix(x);
        if self.rho == 0.0 {
            return m;
        }
        let eta = self.eta.coefficients(x);
        let r2 = self.rho * self.rho;
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] += eta[i] * eta[j] * r2;
            }
        }
        m
    }
}

/// `f · g` for a positive scalar field `f`.
#[derive(Debug, Clone)]
pub struct ConformalMetric<G, F> {
    g: G,
    f: F,
}

/// Rejects factors that are not positive at any of `samples`.
pub fn conformal_rescale<G: MetricField, F: ScalarField>(
    g: G,
    f: F,
    samples: &[Vec<f64>],
) -> Result<ConformalMetric<G, F>> {
    for x in samples {
        let v: f64 = f.value(x);
        if !(v > 0.0) {
            return Err(Error::NonPositiveFactor {
                value: v,
                point: x.clone(),
            });
        }
    }
    Ok(ConformalMetric { g, f })
}

impl<G: MetricField, F: ScalarField> MetricField for ConformalMetric<G, F> {
    fn dim(&self) -> usize {
        self.g.dim()
    }
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> {
        let f = self.f.value(x);
        self.g.matrix(x).into_iter().map(|v| v * f).collect()
    }
}

/// Euclidean metric on a chart.
#[derive(Debug, Clone, Copy)]
pub struct FlatMetric(pub usize);

impl MetricField for FlatMetric {
    fn dim(&self) -> usize {
        self.0
    }
    fn matrix<S: Real>(&self, _x: &[S]) -> Vec<S> {
        let n = self.0;
        let mut m = vec![S::zero(); n * n];
        for i in 0..n {
            m[i * n + i] = S::one();
        }
        m
    }
}

/// Unit round sphere `S^n` in hyperspherical coordinates `(x¹, …, xⁿ)`,
/// `g = diag(1, sin²x¹, sin²x¹ sin²x², …)`.
#[derive(Debug, Clone, Copy)]
pub struct HypersphericalMetric(pub usize);

impl MetricField for HypersphericalMetric {
    fn dim(&self) -> usize {
        self.0
    }
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.0;
        let mut m = vec![S::zero(); n * n];
        let mut factor = S::one();
        for i in 0..n {
            m[i * n + i] = factor;
            let s = x[i].sin();
            factor *= s * s;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_identity_residual(p: &CurvaturePack) -> f64 {
        let n = p.dim;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for h in 0..n {
                        let dj = if j == h { 1.0 } else { 0.0 };
                        let dk = if k == h { 1.0 } else { 0.0 };
                        let expect = p.g[k * n + i] * dj - p.g[j * n + i] * dk;
                        worst = worst.max((p.riemann_at(k, j, i, h) - expect).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let p = curvature_at(&FlatMetric(3), &[0.1, 0.2, 0.3]).unwrap();
        assert!(p.riemann.iter().all(|&v| v == 0.0));
        assert_eq!(p.scalar, 0.0);
    }

    #[test]
    fn hyperspherical_sphere_satisfies_round_identity() {
        for n in 2..=5 {
            let x: Vec<f64> = (0..n).map(|i| 0.7 + 0.1 * i as f64).collect();
            let p = curvature_at(&HypersphericalMetric(n), &x).unwrap();
            assert!(round_identity_residual(&p) < 1e-10, "n = {n}");
            let nf = n as f64;
            assert!((p.scalar - nf * (nf - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn weyl_of_round_sphere_vanishes() {
        let p = curvature_at(&HypersphericalMetric(5), &[0.4, 1.1, 0.9, 2.0, 0.3]).unwrap();
        assert!(p.weyl().unwrap().iter().all(|v| v.abs() < 1e-10));
        let p3 = curvature_at(&HypersphericalMetric(3), &[0.4, 1.1, 0.9]).unwrap();
        assert_eq!(p3.weyl().unwrap_err(), Error::WeylBelowFour(3));
    }

    #[test]
    fn constant_scaling_divides_scalar_curvature() {
        struct Two;
        impl ScalarField for Two {
            fn dim(&self) -> usize {
                4
            }
            fn value<S: Real>(&self, _x: &[S]) -> S {
                S::from(2.0)
            }
        }
        let x = [0.5, 0.8, 1.3, 0.2];
        let p = curvature_at(&HypersphericalMetric(4), &x).unwrap();
        let scaled = conformal_rescale(HypersphericalMetric(4), Two, &[x.to_vec()]).unwrap();
        let q = curvature_at(&scaled, &x).unwrap();
        assert!((q.scalar - p.scalar / 2.0).abs() < 1e-10);
    }

    #[test]
    fn non_spd_metric_is_rejected() {
        struct Bad;
        impl MetricField for Bad {
            fn dim(&self) -> usize {
                2
            }
            fn matrix<S: Real>(&self, _x: &[S]) -> Vec<S> {
                vec![S::one(), S::zero(), S::zero(), -S::one()]
            }
        }
        assert!(matches!(
            metric_jets(&Bad, &[0.0, 0.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
