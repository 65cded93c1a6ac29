//! Fixed 4×4 arithmetic; 3×3 connections are embedded with a zero last row
//! and column.

use crate::real::Real;

pub type Mat4<T> = [[T; 4]; 4];
pub type Vec4<T> = [T; 4];

pub fn zero<T: Real>() -> Mat4<T> {
    [[T::zero(); 4]; 4]
}

pub fn identity<T: Real>() -> Mat4<T> {
    let mut m = zero();
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = T::one();
    }
    m
}

pub fn mul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut c = zero();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..4 {
                c[i][j] = c[i][j] + aik * b[k][j];
            }
        }
    }
    c
}

pub fn apply<T: Real>(a: &Mat4<T>, v: &Vec4<T>) -> Vec4<T> {
    std::array::from_fn(|i| (0..4).fold(T::zero(), |s, k| s + a[i][k] * v[k]))
}

/// `Σ w_k m_k`.
pub fn blend<T: Real>(ms: [&Mat4<T>; 4], w: [T; 4]) -> Mat4<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).fold(T::zero(), |s, k| s + w[k] * ms[k][i][j])))
}

pub fn axpy_v<T: Real>(y: &Vec4<T>, c: T, x: &Vec4<T>) -> Vec4<T> {
    std::array::from_fn(|i| y[i] + c * x[i])
}

pub fn axpy_m<T: Real>(y: &Mat4<T>, c: T, x: &Mat4<T>) -> Mat4<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| y[i][j] + c * x[i][j]))
}

/// Determinant of the leading `n × n` block by partial pivoting.
pub fn det<T: Real>(m: &Mat4<T>, n: usize) -> T {
    let mut a = *m;
    let mut d = T::one();
    for c in 0..n {
        let p = (c..n).max_by(|&r, &s| a[r][c].abs().partial_cmp(&a[s][c].abs()).unwrap()).unwrap();
        if a[p][c] == T::zero() {
            return T::zero();
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d = d * a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] = a[r][k] - f * a[c][k];
            }
        }
    }
    d
}

pub fn dist_identity<T: Real>(m: &Mat4<T>) -> T {
    let mut s = T::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let e = if i == j { v - T::one() } else { v };
            s = s + e * e;
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_product() {
        let a: Mat4<f64> = [[2.0, 1.0, 0.0, 0.0], [0.0, 3.0, 0.0, 0.0], [1.0, 0.0, 1.0, 4.0], [0.0, 0.0, 2.0, 1.0]];
        assert!((det(&a, 4) - 2.0 * 3.0 * (1.0 - 8.0)).abs() < 1e-12);
        assert!((det(&a, 2) - 6.0).abs() < 1e-12);
        assert_eq!(mul(&a, &identity()), a);
        assert_eq!(dist_identity(&identity::<f64>()), 0.0);
    }
}
