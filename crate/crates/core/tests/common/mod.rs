//! Independent dense oracles shared by the integration tests.
#![allow(dead_code)]

use itvolt::{Complex, SymBanded};

pub type Dense = Vec<Vec<Complex>>;

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn to_dense(m: &SymBanded) -> Dense {
    let d = m.order();
    (0..d)
        .map(|i| (0..d).map(|j| c(m.get(i, j), 0.0)).collect())
        .collect()
}

pub fn identity(d: usize) -> Dense {
    (0..d)
        .map(|i| (0..d).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn matvec(a: &Dense, v: &[Complex]) -> Vec<Complex> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// `e^{-iHt}` by Taylor series with scaling and squaring.
pub fn expm_dense(h: &SymBanded, t: f64) -> Dense {
    let d = h.order();
    let a: Dense = to_dense(h)
        .into_iter()
        .map(|row| row.into_iter().map(|z| z * c(0.0, -t)).collect())
        .collect();
    let norm = a
        .iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a: Dense = a
        .into_iter()
        .map(|row| row.into_iter().map(|z| z * scale).collect())
        .collect();
    let mut result = identity(d);
    let mut term = identity(d);
    for k in 1..=30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Dense, mut b: Vec<Complex>) -> Vec<Complex> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap())
            .unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
    }
    let mut x = vec![c(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    x
}

pub fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Symmetric banded matrix with entries drawn by `entry`.
pub fn banded(d: usize, b: usize, mut entry: impl FnMut() -> f64) -> SymBanded {
    let mut m = SymBanded::zeros(d, b).unwrap();
    for j in 0..d {
        for k in 0..=b.min(d - 1 - j) {
            m.set(j + k, j, entry());
        }
    }
    m
}
