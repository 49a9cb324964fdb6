//! Small dense linear algebra generic over [`Real`].
//!
//! Matrices are row-major `n × n` slices. Pivot selection uses value parts only,
//! so derivative components follow the same elimination path as the values.

use crate::real::Real;

/// Determinant by partial-pivoting elimination.
pub fn det<S: Real>(n: usize, a: &[S]) -> S {
    match n {
        0 => S::one(),
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {
            let mut m = a.to_vec();
            let mut d = S::one();
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&r, &s| {
                        m[r * n + col]
                            .value()
                            .abs()
                            .total_cmp(&m[s * n + col].value().abs())
                    })
                    .unwrap();
                if m[pivot * n + col].value() == 0.0 {
                    return S::zero();
                }
                if pivot != col {
                    for c in 0..n {
                        m.swap(pivot * n + c, col * n + c);
                    }
                    d = -d;
                }
                let p = m[col * n + col];
                d *= p;
                let inv = p.recip();
                for r in col + 1..n {
                    let f = m[r * n + col] * inv;
                    for c in col..n {
                        let t = m[col * n + c];
                        m[r * n + c] -= f * t;
                    }
                }
            }
            d
        }
    }
}

/// LU factorization with partial pivoting.
pub struct Lu<S> {
    n: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Real> Lu<S> {
    /// Returns `None` when a pivot's value part is below `tiny` relative to the row scale.
    pub fn new(n: usize, a: &[S], tiny: f64) -> Option<Self> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().map(|v| v.value().abs()).fold(0.0, f64::max);
        if scale == 0.0 && n > 0 {
            return None;
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    lu[r * n + col]
                        .value()
                        .abs()
                        .total_cmp(&lu[s * n + col].value().abs())
                })
                .unwrap();
            if lu[pivot * n + col].value().abs() <= tiny * scale {
                return None;
            }
            if pivot != col {
                for c in 0..n {
                    lu.swap(pivot * n + c, col * n + c);
                }
                perm.swap(pivot, col);
            }
            let inv = lu[col * n + col].recip();
            for r in col + 1..n {
                let f = lu[r * n + col] * inv;
                lu[r * n + col] = f;
                for c in col + 1..n {
                    let t = lu[col * n + c];
                    lu[r * n + c] -= f * t;
                }
            }
        }
        Some(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let t = self.lu[r * n + c] * x[c];
                x[r] -= t;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let t = self.lu[r * n + c] * x[c];
                x[r] -= t;
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }

    pub fn inverse(&self) -> Vec<S> {
        let n = self.n;
        let mut inv = vec![S::zero(); n * n];
        for c in 0..n {
            let mut e = vec![S::zero(); n];
            e[c] = S::one();
            let col = self.solve(&e);
            for r in 0..n {
                inv[r * n + c] = col[r];
            }
        }
        inv
    }
}

/// `a · b` for row-major `n × n` matrices.
pub fn matmul<S: Real>(n: usize, a: &[S], b: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); n * n];
    for r in 0..n {
        for k in 0..n {
            let a_rk = a[r * n + k];
            for c in 0..n {
                out[r * n + c] += a_rk * b[k * n + c];
            }
        }
    }
    out
}

/// `a · v` for a row-major `n × n` matrix.
pub fn matvec<S: Real>(n: usize, a: &[S], v: &[S]) -> Vec<S> {
    (0..n)
        .map(|r| {
            let mut acc = S::zero();
            for c in 0..n {
                acc += a[r * n + c] * v[c];
            }
            acc
        })
        .collect()
}

/// Smallest eigenvalue of a symmetric `f64` matrix.
pub fn min_symmetric_eigenvalue(n: usize, a: &[f64]) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    m.symmetric_eigenvalues().min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_dual::Dual;

    #[test]
    fn determinant_agrees_across_sizes() {
        let a: [f64; 16] = [
            2.0, 1.0, 0.5, 0.3, -1.0, 3.0, 0.2, 0.1, 0.0, 0.4, 1.5, -0.7, 1.1, 0.0, 0.6, 2.2,
        ];
        let reference = nalgebra::DMatrix::from_row_slice(4, 4, &a).determinant();
        assert!((det(4, &a) - reference).abs() < 1e-12);
        let b: [f64; 9] = [1.0, 2.0, 3.0, 0.0, 1.0, 4.0, 5.0, 6.0, 0.0];
        assert!((det(3, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lu_solves_and_inverts() {
        let a: [f64; 9] = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let lu = Lu::new(3, &a, 1e-14).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let back = matvec(3, &a, &x);
        for (u, v) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((u - v).abs() < 1e-13);
        }
        let id = matmul(3, &a, &lu.inverse());
        for r in 0..3 {
            for c in 0..3 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((id[r * 3 + c] - e).abs() < 1e-13);
            }
        }
        assert!(Lu::new(2, &[1.0, 2.0, 2.0, 4.0], 1e-12).is_none());
    }

    #[test]
    fn determinant_derivative_is_trace_of_adjugate() {
        // d/dt det(A + tE_00) = cofactor(0,0)
        let a: [f64; 16] = [
            2.0, 1.0, 0.5, 0.3, -1.0, 3.0, 0.2, 0.1, 0.0, 0.4, 1.5, -0.7, 1.1, 0.0, 0.6, 2.2,
        ];
        let dual: Vec<Dual<f64>> = a
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::new(v, if i == 0 { 1.0 } else { 0.0 }))
            .collect();
        let minor = [3.0, 0.2, 0.1, 0.4, 1.5, -0.7, 0.0, 0.6, 2.2];
        assert!((det(4, &dual).eps - det(3, &minor)).abs() < 1e-12);
    }
}
