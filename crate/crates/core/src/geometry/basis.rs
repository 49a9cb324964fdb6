//! Canonical index sets for antisymmetric components.
//!
//! A p-form on an n-dimensional chart stores C(n, p) numbers, one per strictly
//! increasing index tuple, in lexicographic order. Components at any other
//! ordering are recovered as `sign * canonical`.

use crate::real::Real;

pub fn binomial(n: usize, p: usize) -> usize {
    if p > n {
        return 0;
    }
    let p = p.min(n - p);
    let mut acc = 1usize;
    for i in 0..p {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Strictly increasing p-tuples of `0..n` in lexicographic order.
pub fn increasing_tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, p));
    if p > n {
        return out;
    }
    let mut current: Vec<usize> = (0..p).collect();
    loop {
        out.push(current.clone());
        // advance the rightmost index that still has room
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - p + i {
                current[i] += 1;
                for j in i + 1..p {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lexicographic rank of a strictly increasing tuple.
pub fn rank(n: usize, tuple: &[usize]) -> usize {
    let p = tuple.len();
    let mut r = 0;
    let mut start = 0;
    for (slot, &value) in tuple.iter().enumerate() {
        for skipped in start..value {
            r += binomial(n - skipped - 1, p - slot - 1);
        }
        start = value + 1;
    }
    r
}

/// Sort `indices` and return the permutation sign, or `None` on a repeat.
pub fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = indices.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Sign of a permutation of `0..len`, given as the image list.
pub fn permutation_sign(perm: &[usize]) -> f64 {
    sort_with_sign(perm).map_or(0.0, |(_, s)| s)
}

/// All permutations of `0..len` in lexicographic order.
pub fn permutations(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..len).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (1..len).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..len)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

/// Component of an antisymmetric array at an arbitrary index ordering.
pub fn signed_component<S: Real>(n: usize, coefficients: &[S], indices: &[usize]) -> S {
    match sort_with_sign(indices) {
        None => S::zero(),
        Some((sorted, sign)) => {
            let c = coefficients[rank(n, &sorted)];
            if sign > 0.0 {
                c
            } else {
                -c
            }
        }
    }
}
