//! Real symmetric banded matrices acting on complex vectors.
//!
//! Storage is the lower band in column-major order: entry `(i, j)` with
//! `0 <= i - j <= b` lives at `bands[j * (b + 1) + (i - j)]`. Slots that fall
//! past the end of the matrix (`i >= d`) are kept at zero.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::Complex;

/// Largest order accepted by [`eigendecompose`].
pub const DENSE_EIG_LIMIT: usize = 512;

const MAX_QL_SWEEPS: usize = 60;

/// A column of complex amplitudes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexVector(Vec<Complex>);

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex::new(0.0, 0.0); len])
    }

    /// Unit vector `e_k` of length `len`.
    pub fn basis(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[k] = Complex::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        values.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    pub fn into_inner(self) -> Vec<Complex> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other>`, conjugating `self`.
    pub fn dot(&self, other: &[Complex]) -> Complex {
        dot(&self.0, other)
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: Complex, x: &[Complex]) {
        axpy(&mut self.0, a, x);
    }

    pub fn scale(&mut self, a: Complex) {
        for z in self.0.iter_mut() {
            *z *= a;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖self - other‖_2`.
    pub fn distance(&self, other: &[Complex]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for ComplexVector {
    type Target = [Complex];
    fn deref(&self) -> &[Complex] {
        &self.0
    }
}

impl DerefMut for ComplexVector {
    fn deref_mut(&mut self) -> &mut [Complex] {
        &mut self.0
    }
}

impl From<Vec<Complex>> for ComplexVector {
    fn from(v: Vec<Complex>) -> Self {
        Self(v)
    }
}

impl FromIterator<Complex> for ComplexVector {
    fn from_iter<I: IntoIterator<Item = Complex>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

pub(crate) fn norm_sqr(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn dot(u: &[Complex], v: &[Complex]) -> Complex {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub(crate) fn axpy(y: &mut [Complex], a: Complex, x: &[Complex]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Real symmetric banded matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    order: usize,
    half_bandwidth: usize,
    bands: Vec<f64>,
}

impl SymBanded {
    /// Wrap raw lower-band storage of length `(b + 1) * d`.
    pub fn new(order: usize, half_bandwidth: usize, bands: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("matrix order must be positive"));
        }
        if half_bandwidth >= order {
            return Err(Error::InvalidArgument("half bandwidth must be below the order"));
        }
        let expected = (half_bandwidth + 1) * order;
        if bands.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: bands.len(),
            });
        }
        let mut m = Self {
            order,
            half_bandwidth,
            bands,
        };
        // Padding slots below the last row must not carry data.
        for j in 0..order {
            for k in 1..=half_bandwidth {
                if j + k >= order {
                    m.bands[j * (half_bandwidth + 1) + k] = 0.0;
                }
            }
        }
        Ok(m)
    }

    pub fn zeros(order: usize, half_bandwidth: usize) -> Result<Self> {
        Self::new(
            order,
            half_bandwidth,
            vec![0.0; (half_bandwidth + 1) * order],
        )
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(diag.len(), 0, diag.to_vec())
    }

    /// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Result<Self> {
        let d = diag.len();
        if d < 2 {
            return Err(Error::InvalidArgument("tridiagonal matrix needs order >= 2"));
        }
        if off.len() != d - 1 {
            return Err(Error::DimensionMismatch {
                expected: d - 1,
                found: off.len(),
            });
        }
        let mut m = Self::zeros(d, 1)?;
        for i in 0..d {
            m.bands[2 * i] = diag[i];
            if i + 1 < d {
                m.bands[2 * i + 1] = off[i];
            }
        }
        Ok(m)
    }

    /// Build from a dense row-major symmetric matrix, checking the band.
    pub fn from_dense(order: usize, half_bandwidth: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != order * order {
            return Err(Error::DimensionMismatch {
                expected: order * order,
                found: dense.len(),
            });
        }
        let mut m = Self::zeros(order, half_bandwidth)?;
        for i in 0..order {
            for j in 0..order {
                let a = dense[i * order + j];
                if a != dense[j * order + i] || (i.abs_diff(j) > half_bandwidth && a != 0.0) {
                    return Err(Error::NotBanded { row: i, col: j });
                }
                if i >= j && i - j <= half_bandwidth {
                    m.bands[j * (half_bandwidth + 1) + (i - j)] = a;
                }
            }
        }
        Ok(m)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.order;
        let mut out = vec![0.0; d * d];
        for j in 0..d {
            for k in 0..=self.half_bandwidth.min(d - 1 - j) {
                let a = self.bands[j * (self.half_bandwidth + 1) + k];
                out[(j + k) * d + j] = a;
                out[j * d + j + k] = a;
            }
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i >= self.order || i - j > self.half_bandwidth {
            0.0
        } else {
            self.bands[j * (self.half_bandwidth + 1) + (i - j)]
        }
    }

    /// Set `(i, j)` and its mirror. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i < self.order && i - j <= self.half_bandwidth, "entry outside band");
        self.bands[j * (self.half_bandwidth + 1) + (i - j)] = value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.order)
            .map(|j| self.bands[j * (self.half_bandwidth + 1)])
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.bands.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `self + alpha * other`, widened to the larger bandwidth.
    pub fn add_scaled(&self, alpha: f64, other: &SymBanded) -> Result<SymBanded> {
        if other.order != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: other.order,
            });
        }
        let b = self.half_bandwidth.max(other.half_bandwidth);
        let mut out = SymBanded::zeros(self.order, b)?;
        for j in 0..self.order {
            for k in 0..=b {
                if j + k < self.order {
                    out.bands[j * (b + 1) + k] = self.get(j + k, j) + alpha * other.get(j + k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex]) -> Result<ComplexVector> {
        if v.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: v.len(),
            });
        }
        let mut out = ComplexVector::zeros(self.order);
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    /// `out = M v`; lengths must already match.
    pub(crate) fn matvec_into(&self, v: &[Complex], out: &mut [Complex]) {
        let d = self.order;
        let b = self.half_bandwidth;
        debug_assert!(v.len() == d && out.len() == d);
        for j in 0..d {
            out[j] = v[j] * self.bands[j * (b + 1)];
        }
        for j in 0..d {
            let col = &self.bands[j * (b + 1)..(j + 1) * (b + 1)];
            let vj = v[j];
            let mut acc = Complex::new(0.0, 0.0);
            for k in 1..=b.min(d - 1 - j) {
                let a = col[k];
                out[j + k] += vj * a;
                acc += v[j + k] * a;
            }
            out[j] += acc;
        }
    }

    /// Gershgorin enclosure `[l, u]` of the spectrum.
    pub fn eigen_extent(&self) -> (f64, f64) {
        let d = self.order;
        let b = self.half_bandwidth;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..d {
            let mut radius = 0.0;
            for j in i.saturating_sub(b)..=(i + b).min(d - 1) {
                if j != i {
                    radius += self.get(i, j).abs();
                }
            }
            let c = self.get(i, i);
            lo = lo.min(c - radius);
            hi = hi.max(c + radius);
        }
        (lo, hi)
    }

    /// Factor `I + alpha * M` with banded partial pivoting.
    pub fn factor_shifted(&self, alpha: Complex) -> Result<ShiftedLu> {
        ShiftedLu::new(self, alpha)
    }

    /// Solve `(I + alpha * M) x = rhs`.
    pub fn solve_shifted(&self, alpha: Complex, rhs: &[Complex]) -> Result<ComplexVector> {
        if rhs.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: rhs.len(),
            });
        }
        if alpha == Complex::new(0.0, 0.0) {
            return Ok(ComplexVector::from(rhs.to_vec()));
        }
        self.factor_shifted(alpha)?.solve(rhs)
    }
}

/// Free-function form of [`SymBanded::matvec`].
pub fn matvec(m: &SymBanded, v: &[Complex]) -> Result<ComplexVector> {
    m.matvec(v)
}

/// Free-function form of [`SymBanded::solve_shifted`].
pub fn solve_shifted(m: &SymBanded, alpha: Complex, rhs: &[Complex]) -> Result<ComplexVector> {
    m.solve_shifted(alpha, rhs)
}

/// Free-function form of [`SymBanded::eigen_extent`].
pub fn eigen_extent(m: &SymBanded) -> (f64, f64) {
    m.eigen_extent()
}

/// LU factors of a complex banded matrix `I + alpha * M`.
///
/// Rows are stored in windows of width `3b + 1` starting at column `i - b`;
/// row interchanges let the upper factor grow to bandwidth `2b`.
#[derive(Debug, Clone)]
pub struct ShiftedLu {
    order: usize,
    half_bandwidth: usize,
    rows: Vec<Complex>,
    lower: Vec<Complex>,
    pivots: Vec<usize>,
}

impl ShiftedLu {
    fn new(m: &SymBanded, alpha: Complex) -> Result<Self> {
        let d = m.order;
        let b = m.half_bandwidth;
        let width = 3 * b + 1;
        let mut lu = Self {
            order: d,
            half_bandwidth: b,
            rows: vec![Complex::new(0.0, 0.0); d * width],
            lower: vec![Complex::new(0.0, 0.0); d * b.max(1)],
            pivots: vec![0; d],
        };
        let mut anorm: f64 = 0.0;
        for i in 0..d {
            for j in i.saturating_sub(b)..=(i + b).min(d - 1) {
                let mut a = alpha * m.get(i, j);
                if i == j {
                    a += 1.0;
                }
                anorm = anorm.max(a.norm());
                *lu.at(i, j) = a;
            }
        }
        let threshold = f64::EPSILON * anorm;

        for k in 0..d {
            let last = (k + b).min(d - 1);
            let mut p = k;
            let mut best = lu.at(k, k).norm();
            for i in k + 1..=last {
                let v = lu.at(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > threshold) {
                return Err(Error::Singular { pivot: k });
            }
            lu.pivots[k] = p;
            let right = (k + 2 * b).min(d - 1);
            if p != k {
                for j in k..=right {
                    let tmp = *lu.at(k, j);
                    *lu.at(k, j) = *lu.at(p, j);
                    *lu.at(p, j) = tmp;
                }
            }
            let pivot = *lu.at(k, k);
            for i in k + 1..=last {
                let factor = *lu.at(i, k) / pivot;
                lu.lower[k * b + (i - k - 1)] = factor;
                *lu.at(i, k) = Complex::new(0.0, 0.0);
                if factor != Complex::new(0.0, 0.0) {
                    for j in k + 1..=right {
                        let u = *lu.at(k, j);
                        *lu.at(i, j) -= factor * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut Complex {
        let b = self.half_bandwidth;
        let width = 3 * b + 1;
        debug_assert!(j + b >= i && j <= i + 2 * b);
        &mut self.rows[i * width + (j + b - i)]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex {
        let b = self.half_bandwidth;
        self.rows[i * (3 * b + 1) + (j + b - i)]
    }

    pub fn solve(&self, rhs: &[Complex]) -> Result<ComplexVector> {
        let d = self.order;
        let b = self.half_bandwidth;
        if rhs.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        for k in 0..d {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + b).min(d - 1) {
                x[i] -= self.lower[k * b + (i - k - 1)] * xk;
            }
        }
        for k in (0..d).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + 2 * b).min(d - 1) {
                acc -= self.get(k, j) * x[j];
            }
            x[k] = acc / self.get(k, k);
        }
        Ok(ComplexVector::from(x))
    }
}

/// Eigenpairs of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Row-major `d x d`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Component `i` of eigenvector `k`.
    pub fn vector_entry(&self, i: usize, k: usize) -> f64 {
        self.vectors[i * self.values.len() + k]
    }

    /// `Q diag(g(λ)) Q^T v` for a complex spectral function `g`.
    pub fn apply_function(&self, v: &[Complex], g: impl Fn(f64) -> Complex) -> ComplexVector {
        let d = self.values.len();
        let mut coeffs = vec![Complex::new(0.0, 0.0); d];
        for (i, vi) in v.iter().enumerate() {
            let row = &self.vectors[i * d..(i + 1) * d];
            for (c, q) in coeffs.iter_mut().zip(row) {
                *c += vi * q;
            }
        }
        for (c, &lambda) in coeffs.iter_mut().zip(&self.values) {
            *c *= g(lambda);
        }
        (0..d)
            .map(|i| {
                let row = &self.vectors[i * d..(i + 1) * d];
                row.iter().zip(&coeffs).map(|(q, c)| c * q).sum()
            })
            .collect()
    }
}

/// Full eigendecomposition of a banded matrix up to [`DENSE_EIG_LIMIT`].
pub fn eigendecompose(m: &SymBanded) -> Result<EigenDecomposition> {
    if m.order > DENSE_EIG_LIMIT {
        return Err(Error::TooLargeForDense {
            order: m.order,
            limit: DENSE_EIG_LIMIT,
        });
    }
    let d = m.order;
    if m.half_bandwidth <= 1 {
        let diag: Vec<f64> = (0..d).map(|i| m.get(i, i)).collect();
        let off: Vec<f64> = (0..d.saturating_sub(1)).map(|i| m.get(i + 1, i)).collect();
        return tridiagonal_eigen(&diag, &off);
    }
    let mut v = m.to_dense();
    let mut diag = vec![0.0; d];
    let mut sub = vec![0.0; d];
    householder_tridiagonalize(d, &mut v, &mut diag, &mut sub);
    implicit_ql(d, &mut v, &mut diag, &mut sub)?;
    Ok(sorted(d, diag, v))
}

/// Eigendecomposition of the symmetric tridiagonal matrix with main diagonal
/// `diag` and sub-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<EigenDecomposition> {
    let d = diag.len();
    if d == 0 || off.len() + 1 != d {
        return Err(Error::InvalidArgument("tridiagonal shape"));
    }
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let mut dd = diag.to_vec();
    // QL expects e[i] to couple i-1 and i.
    let mut e = vec![0.0; d];
    e[1..d].copy_from_slice(off);
    implicit_ql(d, &mut v, &mut dd, &mut e)?;
    Ok(sorted(d, dd, v))
}

fn sorted(d: usize, values: Vec<f64>, v: Vec<f64>) -> EigenDecomposition {
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut vectors = vec![0.0; d * d];
    for (new_k, &old_k) in idx.iter().enumerate() {
        for i in 0..d {
            vectors[i * d + new_k] = v[i * d + old_k];
        }
    }
    EigenDecomposition {
        values: idx.iter().map(|&k| values[k]).collect(),
        vectors,
    }
}

/// Householder reduction of the dense symmetric `v` (row-major) to
/// tridiagonal form. On exit `v` holds the accumulated orthogonal transform,
/// `d` the diagonal and `e[i]` the sub-diagonal entry between `i - 1` and `i`.
fn householder_tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    macro_rules! m {
        ($i:expr, $j:expr) => {
            v[($i) * n + ($j)]
        };
    }
    for j in 0..n {
        d[j] = m!(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = m!(i - 1, j);
                m!(i, j) = 0.0;
                m!(j, i) = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                m!(j, i) = f;
                g = e[j] + m!(j, j) * f;
                for k in j + 1..i {
                    g += m!(k, j) * d[k];
                    e[k] += m!(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    m!(k, j) -= f * e[k] + g * d[k];
                }
                d[j] = m!(i - 1, j);
                m!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        m!(n - 1, i) = m!(i, i);
        m!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = m!(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += m!(k, i + 1) * m!(k, j);
                }
                for k in 0..=i {
                    m!(k, j) -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            m!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = m!(n - 1, j);
        m!(n - 1, j) = 0.0;
    }
    m!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating the
/// rotations into `v`. `e[i]` couples `i - 1` and `i` on entry.
fn implicit_ql(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence("implicit QL"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * hk;
                        v[k * n + i] = c * v[k * n + i] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
