//! Top-degree integration over a single chart box.
//!
//! Node sets are enumerated by a flat index and summed in fixed-size chunks;
//! chunk sums are combined left to right, so results are bit-identical for
//! any rayon pool size.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::chart::{ChartDomain, ManifoldSpec};
use crate::geometry::fields::DynForm;

/// Evaluations per reduction chunk; also the MC stream granularity.
pub const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    /// Equispaced nodes on all-periodic boxes.
    PeriodicTrapezoid,
    /// Gauss–Legendre on bounded axes, trapezoid on periodic ones.
    GaussLegendre,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    /// Nodes per axis for grid methods.
    pub nodes: usize,
    /// Sample count for Monte Carlo.
    pub samples: usize,
    pub seed: Option<u64>,
}

impl QuadratureSpec {
    pub fn trapezoid(nodes: usize) -> Self {
        Self {
            method: QuadratureMethod::PeriodicTrapezoid,
            nodes,
            samples: 0,
            seed: None,
        }
    }

    pub fn gauss_legendre(nodes: usize) -> Self {
        Self {
            method: QuadratureMethod::GaussLegendre,
            nodes,
            samples: 0,
            seed: None,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            method: QuadratureMethod::MonteCarlo,
            nodes: 0,
            samples,
            seed: Some(seed),
        }
    }

    pub fn is_grid(&self) -> bool {
        self.method != QuadratureMethod::MonteCarlo
    }

    pub fn validate(&self, domain: &ChartDomain) -> Result<()> {
        match self.method {
            QuadratureMethod::PeriodicTrapezoid if !domain.all_periodic() => {
                let axis = domain.periodic().iter().position(|p| !p).unwrap_or(0);
                Err(Error::NonPeriodicAxis { axis })
            }
            QuadratureMethod::PeriodicTrapezoid | QuadratureMethod::GaussLegendre
                if self.nodes < 2 =>
            {
                Err(Error::InvalidQuadrature(format!(
                    "grid needs at least 2 nodes per axis, got {}",
                    self.nodes
                )))
            }
            QuadratureMethod::MonteCarlo if self.seed.is_none() => Err(Error::InvalidQuadrature(
                "Monte Carlo requires a seed".into(),
            )),
            QuadratureMethod::MonteCarlo if self.samples < 2 => Err(Error::InvalidQuadrature(
                format!("Monte Carlo needs at least 2 samples, got {}", self.samples),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    /// MC standard error, or `|I(N) − I(N/2)|` for grids.
    pub error_estimate: f64,
    pub nodes_used: usize,
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// One-dimensional rule as `(node, weight)` pairs.
fn axis_rule(domain: &ChartDomain, axis: usize, nodes: usize) -> Vec<(f64, f64)> {
    let (a, b) = domain.bounds()[axis];
    if domain.periodic()[axis] {
        let h = (b - a) / nodes as f64;
        (0..nodes).map(|i| (a + h * i as f64, h)).collect()
    } else {
        let rule = GaussLegendre::new(NonZeroUsize::new(nodes).expect("validated node count"));
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        rule.iter()
            .map(|(x, w)| (mid + half * x, half * w))
            .collect()
    }
}

fn grid_sum<F>(domain: &ChartDomain, nodes: usize, f: &F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let n = domain.dim();
    let rules: Vec<Vec<(f64, f64)>> = (0..n).map(|axis| axis_rule(domain, axis, nodes)).collect();
    let total: usize = rules.iter().map(Vec::len).product();
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<Result<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Compensated::default();
            let mut x = vec![0.0; n];
            for flat in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let mut rest = flat;
                let mut w = 1.0;
                for axis in (0..n).rev() {
                    let len = rules[axis].len();
                    let (node, weight) = rules[axis][rest % len];
                    x[axis] = node;
                    w *= weight;
                    rest /= len;
                }
                acc.add(w * finite(f(&x)?, &x)?);
            }
            Ok(acc.total())
        })
        .collect();
    let mut acc = Compensated::default();
    for p in partial {
        acc.add(p?);
    }
    Ok(acc.total())
}

fn finite(v: f64, x: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NotANumber { point: x.to_vec() })
    }
}

fn monte_carlo<F>(domain: &ChartDomain, samples: usize, seed: u64, f: &F) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let n = domain.dim();
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut s1 = Compensated::default();
            let mut s2 = Compensated::default();
            let mut unit = vec![0.0; n];
            for _ in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                for u in unit.iter_mut() {
                    *u = rng.random::<f64>();
                }
                let x = domain.from_unit(&unit, 0.0);
                let v = finite(f(&x)?, &x)?;
                s1.add(v);
                s2.add(v * v);
            }
            Ok((s1.total(), s2.total()))
        })
        .collect();
    let (mut s1, mut s2) = (Compensated::default(), Compensated::default());
    for p in partial {
        let (a, b) = p?;
        s1.add(a);
        s2.add(b);
    }
    let count = samples as f64;
    let mean = s1.total() / count;
    let var = ((s2.total() / count - mean * mean) * count / (count - 1.0)).max(0.0);
    let volume = domain.volume();
    Ok(IntegralResult {
        value: volume * mean,
        error_estimate: volume * (var / count).sqrt(),
        nodes_used: samples,
    })
}

/// Integrates a scalar density over the chart box, times `orientation_sign`.
pub fn integrate_density<F>(m: &ManifoldSpec, q: &QuadratureSpec, f: F) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let domain = &m.domain;
    q.validate(domain)?;
    let raw = match q.method {
        QuadratureMethod::MonteCarlo => {
            monte_carlo(domain, q.samples, q.seed.unwrap_or_default(), &f)?
        }
        _ => {
            let fine = grid_sum(domain, q.nodes, &f)?;
            let coarse = grid_sum(domain, (q.nodes / 2).max(1), &f)?;
            IntegralResult {
                value: fine,
                error_estimate: (fine - coarse).abs(),
                nodes_used: q.nodes.pow(domain.dim() as u32),
            }
        }
    };
    Ok(IntegralResult {
        value: raw.value * m.orientation_sign,
        ..raw
    })
}

/// `∫_M ω` for a top-degree form in chart coordinates; no metric involved.
pub fn integrate_top_form(
    m: &ManifoldSpec,
    omega: &dyn DynForm,
    q: &QuadratureSpec,
) -> Result<IntegralResult> {
    let n = m.dim();
    if omega.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.dim(),
        });
    }
    if omega.degree() != n {
        return Err(Error::NotTopDegree {
            expected: n,
            found: omega.degree(),
        });
    }
    integrate_density(m, q, |x| Ok(omega.eval(x)[0]))
}

/// Results at each level: nodes per axis for grids, sample counts for MC.
pub fn convergence_sweep(
    m: &ManifoldSpec,
    omega: &dyn DynForm,
    method: QuadratureMethod,
    levels: &[usize],
    seed: u64,
) -> Result<Vec<IntegralResult>> {
    if levels.len() < 2 {
        return Err(Error::InvalidQuadrature(
            "convergence sweep needs at least 2 levels".into(),
        ));
    }
    levels
        .iter()
        .map(|&level| {
            let q = match method {
                QuadratureMethod::MonteCarlo => QuadratureSpec::monte_carlo(level, seed),
                QuadratureMethod::GaussLegendre => QuadratureSpec::gauss_legendre(level),
                QuadratureMethod::PeriodicTrapezoid => QuadratureSpec::trapezoid(level),
            };
            integrate_top_form(m, omega, &q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::forms::ConstantForm;
    use std::f64::consts::{PI, TAU};

    fn torus(n: usize) -> ManifoldSpec {
        ManifoldSpec::new("torus", ChartDomain::torus(n))
    }

    #[test]
    fn flat_torus_area() {
        let r = integrate_top_form(
            &torus(2),
            &ConstantForm::volume(2),
            &QuadratureSpec::trapezoid(8),
        )
        .unwrap();
        assert!((r.value - 4.0 * PI * PI).abs() < 1e-12);
        assert_eq!(r.error_estimate, 0.0);
        assert_eq!(r.nodes_used, 64);
    }

    #[test]
    fn trapezoid_rejects_bounded_axis() {
        let m = ManifoldSpec::new(
            "strip",
            ChartDomain::new(vec![(0.0, TAU), (0.0, 1.0)], vec![true, false]).unwrap(),
        );
        let err = integrate_density(&m, &QuadratureSpec::trapezoid(8), |_| Ok(1.0)).unwrap_err();
        assert_eq!(err, Error::NonPeriodicAxis { axis: 1 });
        let ok =
            integrate_density(&m, &QuadratureSpec::gauss_legendre(8), |x| Ok(x[1] * x[1])).unwrap();
        assert!((ok.value - TAU / 3.0).abs() < 1e-13);
    }

    #[test]
    fn nan_reports_node() {
        let err = integrate_density(&torus(1), &QuadratureSpec::trapezoid(4), |x| {
            Ok(if x[0] > 3.0 { f64::NAN } else { 1.0 })
        })
        .unwrap_err();
        match err {
            Error::NotANumber { point } => assert!((point[0] - PI).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn monte_carlo_requires_seed() {
        let q = QuadratureSpec {
            seed: None,
            ..QuadratureSpec::monte_carlo(100, 0)
        };
        assert!(integrate_density(&torus(1), &q, |_| Ok(1.0)).is_err());
    }
}
