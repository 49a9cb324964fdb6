//! Scalar abstraction shared by every differentiable field.
//!
//! Field evaluators are written once, generically over [`Real`], and run on
//! plain `f64` or on (nested) forward-mode dual numbers. One level of nesting
//! gives first derivatives, two levels give exact second derivatives.

use num_dual::{Dual, DualNum};

pub use num_dual::Dual as DualNumber;

/// Numbers a field evaluator may be called with.
pub trait Real: DualNum<Primitive = f64> + Copy + Send + Sync {
    /// Value part, discarding every derivative component.
    #[inline]
    fn value(&self) -> f64 {
        self.re()
    }
}

impl<T> Real for T where T: DualNum<Primitive = f64> + Copy + Send + Sync {}

#[inline]
pub fn constant<S: Real>(value: f64) -> S {
    S::from(value)
}

/// Lift a point into dual numbers with a unit tangent along `direction`.
pub fn seeded<S: Real>(x: &[S], direction: usize) -> Vec<Dual<S>> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let eps = if i == direction { S::one() } else { S::zero() };
            Dual::new(v, eps)
        })
        .collect()
}

/// Lift a point into dual numbers with an arbitrary tangent vector.
pub fn with_tangent<S: Real>(x: &[S], tangent: &[S]) -> Vec<Dual<S>> {
    x.iter()
        .zip(tangent)
        .map(|(&v, &t)| Dual::new(v, t))
        .collect()
}

/// Values and partial derivatives of a vector-valued function.
///
/// Returns `(values, partials)` with `partials[i][c] = ∂_i f_c`.
pub fn partials<S, F>(x: &[S], f: F) -> (Vec<S>, Vec<Vec<S>>)
where
    S: Real,
    F: Fn(&[Dual<S>]) -> Vec<Dual<S>>,
{
    let mut values = Vec::new();
    let mut derivatives = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let out = f(&seeded(x, i));
        if i == 0 {
            values = out.iter().map(|d| d.re).collect();
        }
        derivatives.push(out.iter().map(|d| d.eps).collect());
    }
    if x.is_empty() {
        values = f(&[]).iter().map(|d| d.re).collect();
    }
    (values, derivatives)
}

/// Values and second derivatives by nested duals.
///
/// `hessian[(k * n + l) * m + c] = ∂_k ∂_l f_c`, exactly symmetric in (k, l).
/// `gradient[k * m + c] = ∂_k f_c`.
pub struct SecondJet {
    pub values: Vec<f64>,
    pub gradient: Vec<f64>,
    pub hessian: Vec<f64>,
}

pub fn second_jet<F>(x: &[f64], f: F) -> SecondJet
where
    F: Fn(&[Dual<Dual<f64>>]) -> Vec<Dual<Dual<f64>>>,
{
    let n = x.len();
    let mut values = Vec::new();
    let mut gradient = Vec::new();
    let mut hessian = Vec::new();
    let mut m = 0;
    for k in 0..n {
        for l in k..n {
            let point: Vec<Dual<Dual<f64>>> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let inner = Dual::new(v, if i == k { 1.0 } else { 0.0 });
                    let outer_eps = Dual::new(if i == l { 1.0 } else { 0.0 }, 0.0);
                    Dual::new(inner, outer_eps)
                })
                .collect();
            let out = f(&point);
            if values.is_empty() {
                m = out.len();
                values = out.iter().map(|d| d.re.re).collect();
                gradient = vec![0.0; n * m];
                hessian = vec![0.0; n * n * m];
            }
            for (c, d) in out.iter().enumerate() {
                gradient[k * m + c] = d.re.eps;
                gradient[l * m + c] = d.eps.re;
                hessian[(k * n + l) * m + c] = d.eps.eps;
                hessian[(l * n + k) * m + c] = d.eps.eps;
            }
        }
    }
    SecondJet {
        values,
        gradient,
        hessian,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partials_of_product() {
        let (v, d) = partials(&[2.0, 3.0], |x| vec![x[0] * x[1], x[0].sin()]);
        assert_eq!(v, vec![6.0, 2f64.sin()]);
        assert_eq!(d[0], vec![3.0, 2f64.cos()]);
        assert_eq!(d[1], vec![2.0, 0.0]);
    }

    #[test]
    fn second_jet_matches_closed_form() {
        // f = x² y + sin(y)
        let jet = second_jet(&[1.5, 0.7], |x| vec![x[0] * x[0] * x[1] + x[1].sin()]);
        let (x, y) = (1.5f64, 0.7f64);
        assert!((jet.values[0] - (x * x * y + y.sin())).abs() < 1e-15);
        assert!((jet.gradient[0] - 2.0 * x * y).abs() < 1e-14);
        assert!((jet.gradient[1] - (x * x + y.cos())).abs() < 1e-14);
        assert!((jet.hessian[0] - 2.0 * y).abs() < 1e-14);
        assert!((jet.hessian[1] - 2.0 * x).abs() < 1e-14);
        assert_eq!(jet.hessian[1], jet.hessian[2]);
        assert!((jet.hessian[3] + y.sin()).abs() < 1e-14);
    }
}
