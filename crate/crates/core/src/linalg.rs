//! Small dense linear algebra over exact and floating scalars.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det_bareiss(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

pub fn det_i64(m: &[Vec<i64>]) -> BigInt {
    let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    det_bareiss(&big)
}

/// Exact solution of `a x = b`, or `None` if `a` is singular.
pub fn solve_rational(a: &[Vec<i64>], b: &[i64]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            row.iter()
                .chain(core::iter::once(&bi))
                .map(|&x| BigRational::from_integer(x.into()))
                .collect()
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&r| !m[r][k].is_zero())?;
        m.swap(k, p);
        let inv = m[k][k].recip();
        for v in m[k][k..].iter_mut() {
            *v *= &inv;
        }
        let pivot = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == k || row[k].is_zero() {
                continue;
            }
            let f = row[k].clone();
            for j in k..=n {
                row[j] -= &f * &pivot[j];
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Floating solution by partial pivoting.
pub fn solve_f64(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| r.iter().copied().chain(core::iter::once(bi)).collect())
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| libm::fabs(m[x][k]).total_cmp(&libm::fabs(m[y][k])))?;
        if m[p][k] == 0.0 {
            return None;
        }
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..=n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

/// Floating determinant by partial pivoting.
pub fn det_f64(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| libm::fabs(m[x][k]).total_cmp(&libm::fabs(m[y][k])))
            .expect("nonempty");
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(k, p);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// Permanent of a nonnegative integer matrix by Ryser's formula.
pub fn permanent(w: &[Vec<usize>]) -> BigInt {
    let n = w.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut total = BigInt::zero();
    for mask in 1u64..(1 << n) {
        let mut prod = BigInt::one();
        for row in w {
            let s: usize = (0..n).filter(|&j| mask >> j & 1 == 1).map(|j| row[j]).sum();
            prod *= s;
            if prod.is_zero() {
                break;
            }
        }
        if (n - mask.count_ones() as usize) % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    total
}
