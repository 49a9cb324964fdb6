//! Flat tori `[0, 2π)^n` with coordinate-profile forms and rotation actions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::fields::{ActionMap, FormField, Homotopy, SmoothMap, VectorField};
use crate::real::Real;

/// `c + Σ_k (a_k cos(k u) + b_k sin(k u))`, with `k` starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            cos: vec![],
            sin: vec![],
        }
    }

    pub fn cos_mode(k: usize, amplitude: f64) -> Self {
        let mut cos = vec![0.0; k];
        cos[k - 1] = amplitude;
        Self {
            constant: 0.0,
            cos,
            sin: vec![],
        }
    }

    pub fn sin_mode(k: usize, amplitude: f64) -> Self {
        let mut sin = vec![0.0; k];
        sin[k - 1] = amplitude;
        Self {
            constant: 0.0,
            cos: vec![],
            sin,
        }
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval<S: Real>(&self, u: S) -> S {
        let mut acc = S::from(self.constant);
        for (k, &a) in self.cos.iter().enumerate() {
            if a != 0.0 {
                acc += (u * (k + 1) as f64).cos() * a;
            }
        }
        for (k, &b) in self.sin.iter().enumerate() {
            if b != 0.0 {
                acc += (u * (k + 1) as f64).sin() * b;
            }
        }
        acc
    }

    /// Mean over one period.
    pub fn mean(&self) -> f64 {
        self.constant
    }

    /// Smallest value on a uniform grid of `samples` points.
    pub fn grid_min(&self, samples: usize) -> (f64, f64) {
        (0..samples)
            .map(|i| {
                let u = std::f64::consts::TAU * i as f64 / samples as f64;
                (self.eval(u), u)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((self.constant, 0.0))
    }

    pub fn require_positive(&self) -> Result<()> {
        let (v, at) = self.grid_min(4096);
        if v > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveProfile { value: v, at })
        }
    }
}

/// `η = Σ_i η_i(u^{arg}) du^i`, optionally plus `amplitude · sin(u^{axis}) du^{component}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileOneForm {
    pub dim: usize,
    pub arg_axis: usize,
    pub profiles: Vec<TrigPoly>,
    pub perturbation: Option<Perturbation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub component: usize,
    pub axis: usize,
    pub amplitude: f64,
}

impl ProfileOneForm {
    pub fn new(arg_axis: usize, profiles: Vec<TrigPoly>) -> Self {
        Self {
            dim: profiles.len(),
            arg_axis,
            profiles,
            perturbation: None,
        }
    }

    pub fn perturbed(mut self, p: Perturbation) -> Self {
        self.perturbation = Some(p);
        self
    }
}

impl FormField for ProfileOneForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn degree(&self) -> usize {
        1
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        let u = x[self.arg_axis];
        let mut out: Vec<S> = self.profiles.iter().map(|p| p.eval(u)).collect();
        if let Some(p) = self.perturbation {
            out[p.component] += x[p.axis].sin() * p.amplitude;
        }
        out
    }
}

/// Constant multiple of a coordinate direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateField {
    pub dim: usize,
    pub axis: usize,
    pub scale: f64,
}

impl VectorField for CoordinateField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components<S: Real>(&self, _x: &[S]) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim];
        v[self.axis] = S::from(self.scale);
        v
    }
}

/// `u^{axis} ↦ u^{axis} + speed · θ`; a circle action when `speed` is an integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateRotation {
    pub dim: usize,
    pub axis: usize,
    pub speed: f64,
}

impl ActionMap for CoordinateRotation {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply<S: Real>(&self, theta: S, x: &[S]) -> Vec<S> {
        let mut y = x.to_vec();
        y[self.axis] += theta * self.speed;
        y
    }
}

/// Rotation in `u¹` composed with `u² ↦ −u²` on T², with a reparametrization
/// `θ ↦ θ + s ε sin θ`. Pulls `η ⊗ du¹∧du²` back to its negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedRotation {
    pub epsilon: f64,
}

impl Homotopy for ReflectedRotation {
    fn dim(&self) -> usize {
        2
    }
    fn apply<S: Real>(&self, s: S, theta: S, x: &[S]) -> Vec<S> {
        vec![x[0] + theta + s * theta.sin() * self.epsilon, -x[1]]
    }
}

impl ActionMap for ReflectedRotation {
    fn dim(&self) -> usize {
        2
    }
    fn apply<S: Real>(&self, theta: S, x: &[S]) -> Vec<S> {
        vec![x[0] + theta, -x[1]]
    }
}

/// `u^{target} ↦ u^{target} + ε sin(u^{source})`, a diffeomorphism of the torus
/// isotopic to the identity, with explicit inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineShear {
    pub dim: usize,
    pub target: usize,
    pub source: usize,
    pub epsilon: f64,
}

impl SineShear {
    pub fn inverse(&self) -> Self {
        Self {
            epsilon: -self.epsilon,
            ..*self
        }
    }
}

impl SmoothMap for SineShear {
    fn dim(&self) -> usize {
        self.dim
    }
    fn forward<S: Real>(&self, x: &[S]) -> Vec<S> {
        let mut y = x.to_vec();
        y[self.target] += x[self.source].sin() * self.epsilon;
        y
    }
}

/// Integer linear map of the torus, `u ↦ M u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTorusMap {
    pub dim: usize,
    pub matrix: Vec<f64>,
}

impl SmoothMap for LinearTorusMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn forward<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        (0..n)
            .map(|r| {
                let mut acc = S::zero();
                for c in 0..n {
                    acc += x[c] * self.matrix[r * n + c];
                }
                acc
            })
            .collect()
    }
}

/// `φ⁻¹ ∘ a(θ, ·) ∘ φ` for a shear `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatedAction<A> {
    pub inner: A,
    pub shear: SineShear,
}

impl<A: ActionMap> ActionMap for ConjugatedAction<A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply<S: Real>(&self, theta: S, x: &[S]) -> Vec<S> {
        let y = self.shear.forward(x);
        let z = self.inner.apply(theta, &y);
        self.shear.inverse().forward(&z)
    }
}

/// `T³` contact form `cos u² du¹ + sin 2u² du³` (indices from zero: arg axis 1).
pub fn t3_contact_form() -> ProfileOneForm {
    ProfileOneForm::new(
        1,
        vec![
            TrigPoly::cos_mode(1, 1.0),
            TrigPoly::constant(0.0),
            TrigPoly::sin_mode(2, 1.0),
        ],
    )
}
