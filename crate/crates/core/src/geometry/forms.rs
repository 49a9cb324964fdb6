//! Exterior calculus on canonical component arrays and lazy form combinators.
//!
//! Each combinator is itself a [`FormField`], so compositions such as
//! `d(i_X ω)` are differentiated exactly by nesting dual numbers.

use num_dual::Dual;

use super::basis::{binomial, increasing_tuples, rank, signed_component, sort_with_sign};
use super::chart::ChartDomain;
use super::fields::{map_jacobian, FormField, ScalarField, SmoothMap, VectorField};
use super::linalg::det;
use crate::error::{Error, Result};
use crate::real::{seeded, Real};

/// Canonical components of `a ∧ b`.
pub fn wedge_coefficients<S: Real>(n: usize, p: usize, a: &[S], q: usize, b: &[S]) -> Vec<S> {
    let tuples = increasing_tuples(n, p + q);
    let mut out = vec![S::zero(); tuples.len()];
    for (slot, k) in tuples.iter().enumerate() {
        let mut acc = S::zero();
        // each p-subset of K, with its complement, is one shuffle
        for choice in increasing_tuples(p + q, p) {
            let left: Vec<usize> = choice.iter().map(|&c| k[c]).collect();
            let right: Vec<usize> = (0..p + q)
                .filter(|c| !choice.contains(c))
                .map(|c| k[c])
                .collect();
            let order: Vec<usize> = choice
                .iter()
                .copied()
                .chain((0..p + q).filter(|c| !choice.contains(c)))
                .collect();
            let sign = sort_with_sign(&order).map_or(0.0, |(_, s)| s);
            let term = a[rank(n, &left)] * b[rank(n, &right)];
            if sign > 0.0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        out[slot] = acc;
    }
    out
}

/// Canonical components of `i_X a` for a degree-`p` form, `p ≥ 1`.
pub fn interior_coefficients<S: Real>(n: usize, p: usize, x: &[S], a: &[S]) -> Vec<S> {
    increasing_tuples(n, p - 1)
        .into_iter()
        .map(|rest| {
            let mut acc = S::zero();
            let mut idx = Vec::with_capacity(p);
            for (j, &xj) in x.iter().enumerate() {
                idx.clear();
                idx.push(j);
                idx.extend_from_slice(&rest);
                acc += xj * signed_component(n, a, &idx);
            }
            acc
        })
        .collect()
}

/// Canonical components of `d a` from the partials `da[i][c] = ∂_i a_c`.
pub fn exterior_coefficients<S: Real>(n: usize, p: usize, da: &[Vec<S>]) -> Vec<S> {
    increasing_tuples(n, p + 1)
        .into_iter()
        .map(|k| {
            let mut acc = S::zero();
            for r in 0..=p {
                let rest: Vec<usize> = k
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != r)
                    .map(|(_, &v)| v)
                    .collect();
                let term = da[k[r]][rank(n, &rest)];
                if r % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        })
        .collect()
}

/// Canonical components of `f*a` given `a` at `f(x)` and `J = ∂f/∂x`.
///
/// `(f*a)_I = Σ_K a_K det(J[K, I])`, one minor per canonical pair.
pub fn pullback_coefficients<S: Real>(n: usize, p: usize, jac: &[S], a_at_fx: &[S]) -> Vec<S> {
    if p == 0 {
        return a_at_fx.to_vec();
    }
    if p == n {
        return vec![a_at_fx[0] * det(n, jac)];
    }
    let tuples = increasing_tuples(n, p);
    let mut minor = vec![S::zero(); p * p];
    tuples
        .iter()
        .map(|cols| {
            let mut acc = S::zero();
            for (kr, rows) in tuples.iter().enumerate() {
                for (a, &r) in rows.iter().enumerate() {
                    for (b, &c) in cols.iter().enumerate() {
                        minor[a * p + b] = jac[r * n + c];
                    }
                }
                acc += a_at_fx[kr] * det(p, &minor);
            }
            acc
        })
        .collect()
}

fn check_degree(degree: usize, dim: usize) -> Result<()> {
    if degree > dim {
        Err(Error::DegreeOverflow { degree, dim })
    } else {
        Ok(())
    }
}

/// A form with constant canonical coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantForm {
    dim: usize,
    degree: usize,
    coefficients: Vec<f64>,
}

impl ConstantForm {
    pub fn new(dim: usize, degree: usize, coefficients: Vec<f64>) -> Result<Self> {
        check_degree(degree, dim)?;
        let expected = binomial(dim, degree);
        if coefficients.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: coefficients.len(),
            });
        }
        Ok(Self {
            dim,
            degree,
            coefficients,
        })
    }

    /// `du^{i₁} ∧ … ∧ du^{i_p}` for an arbitrary index list.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let p = indices.len();
        check_degree(p, dim)?;
        let mut coefficients = vec![0.0; binomial(dim, p)];
        if let Some((sorted, sign)) = sort_with_sign(indices) {
            if let Some(&bad) = sorted.iter().find(|&&i| i >= dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: bad + 1,
                });
            }
            coefficients[rank(dim, &sorted)] = sign;
        }
        Ok(Self {
            dim,
            degree: p,
            coefficients,
        })
    }

    /// Coordinate volume form `du¹ ∧ … ∧ duⁿ`.
    pub fn volume(dim: usize) -> Self {
        Self {
            dim,
            degree: dim,
            coefficients: vec![1.0],
        }
    }
}

impl FormField for ConstantForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn coefficients<S: Real>(&self, _x: &[S]) -> Vec<S> {
        self.coefficients.iter().map(|&c| S::from(c)).collect()
    }
}

/// A scalar field viewed as a 0-form.
#[derive(Debug, Clone)]
pub struct FunctionForm<F>(pub F);

impl<F: ScalarField> FormField for FunctionForm<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn degree(&self) -> usize {
        0
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        vec![self.0.value(x)]
    }
}

#[derive(Debug, Clone)]
pub struct Wedge<A, B> {
    a: A,
    b: B,
}

pub fn wedge<A: FormField, B: FormField>(a: A, b: B) -> Result<Wedge<A, B>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    check_degree(a.degree() + b.degree(), a.dim())?;
    Ok(Wedge { a, b })
}

impl<A: FormField, B: FormField> FormField for Wedge<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn degree(&self) -> usize {
        self.a.degree() + self.b.degree()
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        wedge_coefficients(
            self.dim(),
            self.a.degree(),
            &self.a.coefficients(x),
            self.b.degree(),
            &self.b.coefficients(x),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExteriorDerivative<A> {
    a: A,
}

pub fn exterior_derivative<A: FormField>(a: A) -> Result<ExteriorDerivative<A>> {
    check_degree(a.degree() + 1, a.dim())?;
    Ok(ExteriorDerivative { a })
}

impl<A: FormField> FormField for ExteriorDerivative<A> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn degree(&self) -> usize {
        self.a.degree() + 1
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let da: Vec<Vec<S>> = (0..n)
            .map(|i| {
                self.a
                    .coefficients::<Dual<S>>(&seeded(x, i))
                    .iter()
                    .map(|d| d.eps)
                    .collect()
            })
            .collect();
        exterior_coefficients(n, self.a.degree(), &da)
    }
}

#[derive(Debug, Clone)]
pub struct InteriorProduct<X, A> {
    x: X,
    a: A,
}

pub fn interior_product<X: VectorField, A: FormField>(x: X, a: A) -> Result<InteriorProduct<X, A>> {
    if a.degree() == 0 {
        return Err(Error::InteriorOfFunction);
    }
    if x.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: x.dim(),
        });
    }
    Ok(InteriorProduct { x, a })
}

impl<X: VectorField, A: FormField> FormField for InteriorProduct<X, A> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn degree(&self) -> usize {
        self.a.degree() - 1
    }
    fn coefficients<S: Real>(&self, p: &[S]) -> Vec<S> {
        interior_coefficients(
            self.dim(),
            self.a.degree(),
            &self.x.components(p),
            &self.a.coefficients(p),
        )
    }
}

/// Pullback of a form along a smooth map, wrapping periodic axes of the image.
#[derive(Debug, Clone)]
pub struct Pullback<F, A> {
    f: F,
    a: A,
    domain: Option<ChartDomain>,
}

pub fn pullback<F: SmoothMap, A: FormField>(f: F, a: A) -> Pullback<F, A> {
    Pullback { f, a, domain: None }
}

impl<F: SmoothMap, A: FormField> Pullback<F, A> {
    pub fn within(mut self, domain: ChartDomain) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Evaluation that rejects images outside the chart closure.
    pub fn eval_checked(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(domain) = &self.domain {
            domain.check(&self.f.forward(x))?;
        }
        Ok(self.coefficients(x))
    }
}

impl<F: SmoothMap, A: FormField> FormField for Pullback<F, A> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn degree(&self) -> usize {
        self.a.degree()
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        let (mut y, jac) = map_jacobian(&self.f, x);
        if let Some(domain) = &self.domain {
            domain.wrap(&mut y);
        }
        pullback_coefficients(self.dim(), self.degree(), &jac, &self.a.coefficients(&y))
    }
}

/// `L_X a = d(i_X a) + i_X(d a)`; for functions `L_X f = X f`.
#[derive(Debug, Clone)]
pub struct LieDerivative<X, A> {
    x: X,
    a: A,
}

pub fn lie_derivative<X: VectorField, A: FormField>(x: X, a: A) -> Result<LieDerivative<X, A>> {
    if x.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: x.dim(),
        });
    }
    Ok(LieDerivative { x, a })
}

impl<X: VectorField, A: FormField> FormField for LieDerivative<X, A> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn degree(&self) -> usize {
        self.a.degree()
    }
    fn coefficients<S: Real>(&self, p: &[S]) -> Vec<S> {
        let n = self.dim();
        let deg = self.degree();
        // i_X(d a)
        let mut out = if deg < n {
            let da: Vec<Vec<S>> = (0..n)
                .map(|i| {
                    self.a
                        .coefficients::<Dual<S>>(&seeded(p, i))
                        .iter()
                        .map(|d| d.eps)
                        .collect()
                })
                .collect();
            let d_a = exterior_coefficients(n, deg, &da);
            interior_coefficients(n, deg + 1, &self.x.components(p), &d_a)
        } else {
            vec![S::zero(); 1]
        };
        // d(i_X a)
        if deg > 0 {
            let d_iota: Vec<Vec<S>> = (0..n)
                .map(|i| {
                    let q = seeded(p, i);
                    interior_coefficients(n, deg, &self.x.components(&q), &self.a.coefficients(&q))
                        .iter()
                        .map(|d| d.eps)
                        .collect()
                })
                .collect();
            for (o, v) in out
                .iter_mut()
                .zip(exterior_coefficients(n, deg - 1, &d_iota))
            {
                *o += v;
            }
        }
        out
    }
}

/// `f · a` for a scalar field `f`.
#[derive(Debug, Clone)]
pub struct Scaled<F, A> {
    f: F,
    a: A,
}

pub fn scaled<F: ScalarField, A: FormField>(f: F, a: A) -> Scaled<F, A> {
    Scaled { f, a }
}

impl<F: ScalarField, A: FormField> FormField for Scaled<F, A> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn degree(&self) -> usize {
        self.a.degree()
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        let f = self.f.value(x);
        self.a.coefficients(x).into_iter().map(|c| c * f).collect()
    }
}

/// `a + b` for forms of equal degree.
#[derive(Debug, Clone)]
pub struct Sum<A, B> {
    a: A,
    b: B,
}

pub fn sum<A: FormField, B: FormField>(a: A, b: B) -> Result<Sum<A, B>> {
    if a.dim() != b.dim() || a.degree() != b.degree() {
        return Err(Error::DimensionMismatch {
            expected: a.degree(),
            found: b.degree(),
        });
    }
    Ok(Sum { a, b })
}

impl<A: FormField, B: FormField> FormField for Sum<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn degree(&self) -> usize {
        self.a.degree()
    }
    fn coefficients<S: Real>(&self, x: &[S]) -> Vec<S> {
        self.a
            .coefficients(x)
            .into_iter()
            .zip(self.b.coefficients(x))
            .map(|(u, v)| u + v)
            .collect()
    }
}

/// Canonical components read at an arbitrary ordering.
pub fn component<A: FormField>(a: &A, x: &[f64], indices: &[usize]) -> f64 {
    signed_component(a.dim(), &a.coefficients(x), indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_of_basis_one_forms() {
        let w = wedge(
            ConstantForm::basis(2, &[0]).unwrap(),
            ConstantForm::basis(2, &[1]).unwrap(),
        )
        .unwrap();
        assert_eq!(w.coefficients(&[0.3, 0.4]), vec![1.0]);
        let w = wedge(
            ConstantForm::basis(2, &[1]).unwrap(),
            ConstantForm::basis(2, &[0]).unwrap(),
        )
        .unwrap();
        assert_eq!(w.coefficients(&[0.3, 0.4]), vec![-1.0]);
    }

    #[test]
    fn degree_overflow_is_rejected() {
        let a = ConstantForm::basis(2, &[0, 1]).unwrap();
        let b = ConstantForm::basis(2, &[0]).unwrap();
        assert_eq!(
            wedge(a.clone(), b).unwrap_err(),
            Error::DegreeOverflow { degree: 3, dim: 2 }
        );
        assert!(exterior_derivative(a).is_err());
    }

    #[test]
    fn interior_of_basis_two_form() {
        struct E0;
        impl VectorField for E0 {
            fn dim(&self) -> usize {
                2
            }
            fn components<S: Real>(&self, _x: &[S]) -> Vec<S> {
                vec![S::one(), S::zero()]
            }
        }
        let i = interior_product(E0, ConstantForm::volume(2)).unwrap();
        assert_eq!(i.coefficients(&[0.0, 0.0]), vec![0.0, 1.0]);
        assert_eq!(
            interior_product(E0, ConstantForm::new(2, 0, vec![1.0]).unwrap())
                .err()
                .unwrap(),
            Error::InteriorOfFunction
        );
    }

    #[test]
    fn component_sign_reconstruction() {
        let w = ConstantForm::new(3, 2, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(component(&w, &[0.0; 3], &[2, 1]), -3.0);
        assert_eq!(component(&w, &[0.0; 3], &[0, 0]), 0.0);
    }
}
