//! Field traits in two tiers.
//!
//! The generic tier (`ScalarField`, `VectorField`, `FormField`, `MetricField`,
//! `SmoothMap`, `ActionMap`, `Homotopy`, `Tensor11Field`) is evaluated at any
//! [`Real`] so derivatives come from dual numbers. The `Dyn*` tier is
//! object-safe, works on `f64` only, and is blanket-implemented for every
//! generic field, which lets cases store heterogeneous fields behind `Arc`.
//!
//! Every evaluator is a pure function of its arguments.

use std::sync::Arc;

use num_dual::Dual;

use crate::real::Real;

pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value<S: Real>(&self, x: &[S]) -> S;
}

pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn components<S: Real>(&self, x: &[S]) -> Vec<S>;
}

/// A p-form; `coefficients` returns the C(n, p) canonical components.
pub trait FormField: Send + Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S>;
}

/// Symmetric positive-definite metric, row-major `n × n`.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S>;
}

/// A (1,1) tensor `T^h_i`, row-major with row index `h`.
pub trait Tensor11Field: Send + Sync {
    fn dim(&self) -> usize;
    fn matrix<S: Real>(&self, x: &[S]) -> Vec<S>;
}

/// Chart-to-chart map stored as a lift to the covering box.
pub trait SmoothMap: Send + Sync {
    fn dim(&self) -> usize;
    fn forward<S: Real>(&self, x: &[S]) -> Vec<S>;
}

/// Circle action `a(θ, x)`, 2π-periodic in θ.
pub trait ActionMap: Send + Sync {
    fn dim(&self) -> usize;
    fn apply<S: Real>(&self, theta: S, x: &[S]) -> Vec<S>;
}

/// Smooth family of loops of maps `F(s, θ, x)`, 2π-periodic in θ.
pub trait Homotopy: Send + Sync {
    fn dim(&self) -> usize;
    fn apply<S: Real>(&self, s: S, theta: S, x: &[S]) -> Vec<S>;
}

/// Value and Jacobian `J[ν * n + j] = ∂f^ν/∂x^j` of a smooth map.
pub fn map_jacobian<M: SmoothMap + ?Sized, S: Real>(f: &M, x: &[S]) -> (Vec<S>, Vec<S>) {
    let n = x.len();
    let mut value = Vec::new();
    let mut jac = vec![S::zero(); n * n];
    for j in 0..n {
        let out = f.forward(&crate::real::seeded(x, j));
        if j == 0 {
            value = out.iter().map(|d| d.re).collect();
        }
        for (nu, d) in out.iter().enumerate() {
            jac[nu * n + j] = d.eps;
        }
    }
    (value, jac)
}

/// Same as [`map_jacobian`] for `a(θ, ·)`.
pub fn action_jacobian<A: ActionMap + ?Sized, S: Real>(
    a: &A,
    theta: S,
    x: &[S],
) -> (Vec<S>, Vec<S>) {
    let n = x.len();
    let mut value = Vec::new();
    let mut jac = vec![S::zero(); n * n];
    let th = Dual::from_re(theta);
    for j in 0..n {
        let out = a.apply(th, &crate::real::seeded(x, j));
        if j == 0 {
            value = out.iter().map(|d| d.re).collect();
        }
        for (nu, d) in out.iter().enumerate() {
            jac[nu * n + j] = d.eps;
        }
    }
    (value, jac)
}

/// `∂_θ a(θ, x)`.
pub fn action_velocity<A: ActionMap + ?Sized, S: Real>(a: &A, theta: S, x: &[S]) -> Vec<S> {
    let xs: Vec<Dual<S>> = x.iter().map(|&v| Dual::from_re(v)).collect();
    a.apply(Dual::new(theta, S::one()), &xs)
        .iter()
        .map(|d| d.eps)
        .collect()
}

// ---------------------------------------------------------------------------
// Object-safe f64 tier
// ---------------------------------------------------------------------------

pub trait DynScalar: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

pub trait DynVector: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

pub trait DynForm: Send + Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

pub trait DynMetric: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

pub trait DynTensor11: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

pub trait DynMap: Send + Sync {
    fn dim(&self) -> usize;
    fn forward(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>);
}

pub trait DynAction: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, theta: f64, x: &[f64]) -> Vec<f64>;
    /// `(a(θ, x), ∂a/∂x)`, Jacobian row-major with row = output component.
    fn jacobian(&self, theta: f64, x: &[f64]) -> (Vec<f64>, Vec<f64>);
    /// `∂_θ a(θ, x)`.
    fn velocity(&self, theta: f64, x: &[f64]) -> Vec<f64>;
    /// Generator `ξ = ∂_θ a(θ, x)|_{θ=0}`.
    fn generator(&self, x: &[f64]) -> Vec<f64> {
        self.velocity(0.0, x)
    }
}

/// Jets of a homotopy at one `(s, θ, x)`.
#[derive(Debug, Clone)]
pub struct HomotopyJet {
    pub value: Vec<f64>,
    /// `∂F/∂x`, row-major.
    pub jacobian: Vec<f64>,
    pub d_theta: Vec<f64>,
    pub d_s: Vec<f64>,
    pub d_theta_d_s: Vec<f64>,
    /// `∂_θ ∂F/∂x`, row-major.
    pub d_theta_jacobian: Vec<f64>,
}

pub trait DynHomotopy: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, s: f64, theta: f64, x: &[f64]) -> Vec<f64>;
    fn jet(&self, s: f64, theta: f64, x: &[f64]) -> HomotopyJet;
}

impl<T: ScalarField> DynScalar for T {
    fn dim(&self) -> usize {
        ScalarField::dim(self)
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.value(x)
    }
}

impl<T: VectorField> DynVector for T {
    fn dim(&self) -> usize {
        VectorField::dim(self)
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components(x)
    }
}

impl<T: FormField> DynForm for T {
    fn dim(&self) -> usize {
        FormField::dim(self)
    }
    fn degree(&self) -> usize {
        FormField::degree(self)
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.coefficients(x)
    }
}

impl<T: MetricField> DynMetric for T {
    fn dim(&self) -> usize {
        MetricField::dim(self)
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.matrix(x)
    }
}

impl<T: Tensor11Field> DynTensor11 for T {
    fn dim(&self) -> usize {
        Tensor11Field::dim(self)
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        Tensor11Field::matrix(self, x)
    }
}

impl<T: SmoothMap> DynMap for T {
    fn dim(&self) -> usize {
        SmoothMap::dim(self)
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        SmoothMap::forward(self, x)
    }
    fn jacobian(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        map_jacobian(self, x)
    }
}

impl<T: ActionMap> DynAction for T {
    fn dim(&self) -> usize {
        ActionMap::dim(self)
    }
    fn apply(&self, theta: f64, x: &[f64]) -> Vec<f64> {
        ActionMap::apply(self, theta, x)
    }
    fn jacobian(&self, theta: f64, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        action_jacobian(self, theta, x)
    }
    fn velocity(&self, theta: f64, x: &[f64]) -> Vec<f64> {
        action_velocity(self, theta, x)
    }
}

impl<T: Homotopy> DynHomotopy for T {
    fn dim(&self) -> usize {
        Homotopy::dim(self)
    }
    fn apply(&self, s: f64, theta: f64, x: &[f64]) -> Vec<f64> {
        Homotopy::apply(self, s, theta, x)
    }
    fn jet(&self, s: f64, theta: f64, x: &[f64]) -> HomotopyJet {
        type D2 = Dual<Dual<f64>>;
        let n = x.len();
        // inner seed: s or x^j; outer seed: θ
        let lift = |inner_s: f64, inner_x: Option<usize>| {
            let ss = D2::new(Dual::new(s, inner_s), Dual::from_re(0.0));
            let th = D2::new(Dual::from_re(theta), Dual::from_re(1.0));
            let xs: Vec<D2> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let e = if inner_x == Some(i) { 1.0 } else { 0.0 };
                    D2::new(Dual::new(v, e), Dual::from_re(0.0))
                })
                .collect();
            Homotopy::apply(self, ss, th, &xs)
        };
        let out_s = lift(1.0, None);
        let value = out_s.iter().map(|d| d.re.re).collect();
        let d_s = out_s.iter().map(|d| d.re.eps).collect();
        let d_theta = out_s.iter().map(|d| d.eps.re).collect();
        let d_theta_d_s = out_s.iter().map(|d| d.eps.eps).collect();
        let mut jacobian = vec![0.0; n * n];
        let mut d_theta_jacobian = vec![0.0; n * n];
        for j in 0..n {
            let out = lift(0.0, Some(j));
            for (nu, d) in out.iter().enumerate() {
                jacobian[nu * n + j] = d.re.eps;
                d_theta_jacobian[nu * n + j] = d.eps.eps;
            }
        }
        HomotopyJet {
            value,
            jacobian,
            d_theta,
            d_s,
            d_theta_d_s,
            d_theta_jacobian,
        }
    }
}

macro_rules! forward_generic {
    ($($ptr:ty),*) => {$(
        impl<T: ScalarField + ?Sized> ScalarField for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn value<S: Real>(&self, x: &[S]) -> S { (**self).value(x) }
        }
        impl<T: VectorField + ?Sized> VectorField for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn components<S: Real>(&self, x: &[S]) -> Vec<S> { (**self).components(x) }
        }
        impl<T: FormField + ?Sized> FormField for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn degree(&self) -> usize { (**self).degree() }
            fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> { (**self).coefficients(x) }
        }
        impl<T: MetricField + ?Sized> MetricField for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> { (**self).matrix(x) }
        }
        impl<T: Tensor11Field + ?Sized> Tensor11Field for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn matrix<S: Real>(&self, x: &[S]) -> Vec<S> { (**self).matrix(x) }
        }
        impl<T: SmoothMap + ?Sized> SmoothMap for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn forward<S: Real>(&self, x: &[S]) -> Vec<S> { (**self).forward(x) }
        }
        impl<T: ActionMap + ?Sized> ActionMap for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn apply<S: Real>(&self, theta: S, x: &[S]) -> Vec<S> { (**self).apply(theta, x) }
        }
        impl<T: Homotopy + ?Sized> Homotopy for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn apply<S: Real>(&self, s: S, theta: S, x: &[S]) -> Vec<S> {
                (**self).apply(s, theta, x)
            }
        }
    )*};
}

forward_generic!(&T, Arc<T>);
