use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Coordinate box of a single full-measure chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    bounds: Vec<(f64, f64)>,
    periodic: Vec<bool>,
}

impl ChartDomain {
    pub fn new(bounds: Vec<(f64, f64)>, periodic: Vec<bool>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if bounds.len() != periodic.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                found: periodic.len(),
            });
        }
        for &(a, b) in &bounds {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::OutsideChart { coords: vec![a, b] });
            }
        }
        Ok(Self { bounds, periodic })
    }

    /// `[0, 2π)^n` with every axis periodic.
    pub fn torus(dim: usize) -> Self {
        Self::new(vec![(0.0, std::f64::consts::TAU); dim], vec![true; dim])
            .expect("positive dimension")
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn all_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn width(&self, axis: usize) -> f64 {
        let (a, b) = self.bounds[axis];
        b - a
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    /// Reduce periodic coordinates into `[a, b)`; non-periodic axes untouched.
    pub fn wrap<S: Real>(&self, x: &mut [S]) {
        for (axis, v) in x.iter_mut().enumerate() {
            if self.periodic[axis] {
                let (a, _) = self.bounds[axis];
                let w = self.width(axis);
                let shift = ((v.value() - a) / w).floor();
                if shift != 0.0 {
                    *v -= shift * w;
                }
            }
        }
    }

    /// Whether `x` lies in the closed box after periodic wrapping.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(axis, &v)| {
                v.is_finite()
                    && (self.periodic[axis] || {
                        let (a, b) = self.bounds[axis];
                        let slack = 1e-12 * (b - a);
                        v >= a - slack && v <= b + slack
                    })
            })
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideChart { coords: x.to_vec() })
        }
    }

    /// Affine map from the unit cube, shrunk by `margin` on non-periodic axes.
    pub fn from_unit(&self, unit: &[f64], margin: f64) -> Vec<f64> {
        unit.iter()
            .enumerate()
            .map(|(axis, &t)| {
                let (a, b) = self.bounds[axis];
                let m = if self.periodic[axis] { 0.0 } else { margin };
                a + (b - a) * (m + (1.0 - 2.0 * m) * t)
            })
            .collect()
    }
}

/// A manifold covered by one chart up to a null set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub name: String,
    pub domain: ChartDomain,
    /// Dimension of the ambient space when the zoo supplies an embedding.
    pub embedding_dim: Option<usize>,
    pub orientation_sign: f64,
}

impl ManifoldSpec {
    pub fn new(name: impl Into<String>, domain: ChartDomain) -> Self {
        Self {
            name: name.into(),
            domain,
            embedding_dim: None,
            orientation_sign: 1.0,
        }
    }

    pub fn with_embedding_dim(mut self, dim: usize) -> Self {
        self.embedding_dim = Some(dim);
        self
    }

    pub fn reversed(mut self) -> Self {
        self.orientation_sign = -self.orientation_sign;
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn wrap_reduces_periodic_axes_only() {
        let d = ChartDomain::new(vec![(0.0, TAU), (0.0, 1.0)], vec![true, false]).unwrap();
        let mut x = [TAU + 0.5, 3.0];
        d.wrap(&mut x);
        assert!((x[0] - 0.5).abs() < 1e-15);
        assert_eq!(x[1], 3.0);
        assert!(!d.contains(&x));
        assert!(d.contains(&[-7.0, 0.5]));
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(ChartDomain::new(vec![(1.0, 1.0)], vec![false]).is_err());
        assert!(ChartDomain::new(vec![], vec![]).is_err());
    }
}
