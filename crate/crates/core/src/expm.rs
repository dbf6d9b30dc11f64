//! Action of `e^{-iHΔt}` on a vector for real symmetric banded `H`.
//!
//! Four strategies are available: full diagonalization, a Lanczos
//! (Krylov) approximation, a Chebyshev expansion with Bessel coefficients,
//! and the closed form for `2 x 2` matrices.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::bandmat::{self, eigendecompose, tridiagonal_eigen, ComplexVector, EigenDecomposition, SymBanded};
use crate::error::{Error, Result};
use crate::specfun::bessel_jn_table;
use crate::Complex;

/// Krylov breakdown threshold relative to `‖v‖`.
const LANCZOS_BREAKDOWN: f64 = 1e-14;
/// Spectral widths below this are treated as `H = c I`.
const DEGENERATE_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosParams {
    pub tol: f64,
    pub max_iters: usize,
    pub reorth_depth: usize,
}

impl Default for LanczosParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 30,
            reorth_depth: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevParams {
    pub coeff_tol: f64,
    pub max_terms: usize,
}

impl Default for ChebyshevParams {
    fn default() -> Self {
        Self {
            coeff_tol: 1e-15,
            max_terms: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpmBackend {
    Diagonalization,
    Lanczos(LanczosParams),
    Chebyshev(ChebyshevParams),
    /// Closed form, valid only for order-2 matrices.
    AnalyticTwoLevel,
}

impl ExpmBackend {
    pub fn validate(&self, order: usize) -> Result<()> {
        match *self {
            ExpmBackend::Diagonalization if order > bandmat::DENSE_EIG_LIMIT => {
                Err(Error::TooLargeForDense {
                    order,
                    limit: bandmat::DENSE_EIG_LIMIT,
                })
            }
            ExpmBackend::Lanczos(p) if !(p.tol > 0.0) || p.max_iters == 0 => {
                Err(Error::InvalidArgument("Lanczos needs tol > 0 and max_iters >= 1"))
            }
            ExpmBackend::Chebyshev(p) if !(p.coeff_tol > 0.0) || p.max_terms == 0 => Err(
                Error::InvalidArgument("Chebyshev needs coeff_tol > 0 and max_terms >= 1"),
            ),
            ExpmBackend::AnalyticTwoLevel if order != 2 => {
                Err(Error::InvalidArgument("analytic exponential needs a 2x2 matrix"))
            }
            _ => Ok(()),
        }
    }
}

/// Per-call bookkeeping returned by [`PreparedExponential::apply_with_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ApplyStats {
    /// Krylov vectors or Chebyshev terms used (0 for direct backends).
    pub steps: usize,
    /// False when an iterative backend stopped on its cap.
    pub converged: bool,
}

#[derive(Debug, Clone)]
enum Prepared {
    Diagonal(EigenDecomposition),
    Lanczos(LanczosParams),
    Chebyshev {
        params: ChebyshevParams,
        lower: f64,
        upper: f64,
    },
    TwoLevel {
        center: f64,
        delta: f64,
        coupling: f64,
    },
}

/// A backend bound to one matrix `H`; reusable across time steps.
#[derive(Debug, Clone)]
pub struct PreparedExponential {
    h: SymBanded,
    prepared: Prepared,
}

/// Free-function form of [`PreparedExponential::new`].
pub fn prepare(h: SymBanded, backend: &ExpmBackend) -> Result<PreparedExponential> {
    PreparedExponential::new(h, backend)
}

impl PreparedExponential {
    pub fn new(h: SymBanded, backend: &ExpmBackend) -> Result<Self> {
        backend.validate(h.order())?;
        let prepared = match *backend {
            ExpmBackend::Diagonalization => Prepared::Diagonal(eigendecompose(&h)?),
            ExpmBackend::Lanczos(p) => Prepared::Lanczos(p),
            ExpmBackend::Chebyshev(params) => {
                let (lower, upper) = h.eigen_extent();
                Prepared::Chebyshev {
                    params,
                    lower,
                    upper,
                }
            }
            ExpmBackend::AnalyticTwoLevel => {
                let (p, q, e) = (h.get(0, 0), h.get(1, 1), h.get(1, 0));
                Prepared::TwoLevel {
                    center: 0.5 * (p + q),
                    delta: 0.5 * (p - q),
                    coupling: e,
                }
            }
        };
        Ok(Self { h, prepared })
    }

    pub fn matrix(&self) -> &SymBanded {
        &self.h
    }

    pub fn order(&self) -> usize {
        self.h.order()
    }

    pub fn eigen(&self) -> Option<&EigenDecomposition> {
        match &self.prepared {
            Prepared::Diagonal(e) => Some(e),
            _ => None,
        }
    }

    /// Spectral enclosure used by the Chebyshev backend.
    pub fn spectral_bounds(&self) -> Option<(f64, f64)> {
        match self.prepared {
            Prepared::Chebyshev { lower, upper, .. } => Some((lower, upper)),
            _ => None,
        }
    }

    pub fn apply(&self, dt: f64, v: &[Complex]) -> Result<ComplexVector> {
        self.apply_with_stats(dt, v).map(|(out, _)| out)
    }

    pub fn apply_with_stats(&self, dt: f64, v: &[Complex]) -> Result<(ComplexVector, ApplyStats)> {
        if v.len() != self.h.order() {
            return Err(Error::DimensionMismatch {
                expected: self.h.order(),
                found: v.len(),
            });
        }
        let exact = ApplyStats {
            steps: 0,
            converged: true,
        };
        if dt == 0.0 {
            return Ok((ComplexVector::from(v.to_vec()), exact));
        }
        match &self.prepared {
            Prepared::Diagonal(eig) => Ok((
                eig.apply_function(v, |lambda| Complex::from_polar(1.0, -lambda * dt)),
                exact,
            )),
            Prepared::TwoLevel {
                center,
                delta,
                coupling,
            } => Ok((two_level(*center, *delta, *coupling, dt, v), exact)),
            Prepared::Lanczos(p) => lanczos(&self.h, p, dt, v),
            Prepared::Chebyshev {
                params,
                lower,
                upper,
            } => chebyshev(&self.h, params, *lower, *upper, dt, v),
        }
    }
}

/// `e^{-iHt}` for `H = c I + δ σ_z + e σ_x`.
fn two_level(center: f64, delta: f64, coupling: f64, dt: f64, v: &[Complex]) -> ComplexVector {
    let omega = delta.hypot(coupling);
    let phase = Complex::from_polar(1.0, -center * dt);
    let (s, c) = (omega * dt).sin_cos();
    let (sz, sx) = if omega > 0.0 {
        (s * delta / omega, s * coupling / omega)
    } else {
        (0.0, 0.0)
    };
    let i = Complex::new(0.0, 1.0);
    let m00 = Complex::new(c, 0.0) - i * sz;
    let m11 = Complex::new(c, 0.0) + i * sz;
    let m01 = -i * sx;
    ComplexVector::from(vec![
        phase * (m00 * v[0] + m01 * v[1]),
        phase * (m01 * v[0] + m11 * v[1]),
    ])
}

fn lanczos(
    h: &SymBanded,
    params: &LanczosParams,
    dt: f64,
    v: &[Complex],
) -> Result<(ComplexVector, ApplyStats)> {
    let d = h.order();
    let v_norm = bandmat::norm_sqr(v).sqrt();
    if v_norm == 0.0 {
        return Ok((
            ComplexVector::zeros(d),
            ApplyStats {
                steps: 0,
                converged: true,
            },
        ));
    }
    let max_k = params.max_iters.min(d);
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(max_k);
    let mut q0 = ComplexVector::from(v.to_vec());
    q0.scale(Complex::new(1.0 / v_norm, 0.0));
    basis.push(q0);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_k);
    let mut beta: Vec<f64> = Vec::with_capacity(max_k);
    let mut previous: Vec<Complex> = Vec::new();
    let mut w = ComplexVector::zeros(d);
    let mut converged = false;
    let coeffs = loop {
        let k = basis.len();
        h.matvec_into(&basis[k - 1], &mut w);
        let a = basis[k - 1].dot(&w).re;
        w.axpy(Complex::new(-a, 0.0), &basis[k - 1]);
        if k > 1 {
            w.axpy(Complex::new(-beta[k - 2], 0.0), &basis[k - 2]);
        }
        for q in basis[k.saturating_sub(params.reorth_depth)..].iter() {
            let c = q.dot(&w);
            w.axpy(-c, q);
        }
        alpha.push(a);

        let coeffs = krylov_coefficients(&alpha, &beta, dt)?;
        if k > 1 {
            let mut diff = 0.0;
            for (j, c) in coeffs.iter().enumerate() {
                let prev = previous.get(j).copied().unwrap_or_default();
                diff += (c - prev).norm_sqr();
            }
            if diff.sqrt() < params.tol {
                converged = true;
            }
        }
        let b = w.norm();
        if b < LANCZOS_BREAKDOWN {
            // Invariant subspace: the projection is exact.
            converged = true;
        }
        if converged || k == max_k {
            break coeffs;
        }
        beta.push(b);
        let mut next = w.clone();
        next.scale(Complex::new(1.0 / b, 0.0));
        basis.push(next);
        previous = coeffs;
    };
    let mut out = ComplexVector::zeros(d);
    for (q, c) in basis.iter().zip(&coeffs) {
        out.axpy(c * v_norm, q);
    }
    Ok((
        out,
        ApplyStats {
            steps: basis.len(),
            converged: converged || max_k == d,
        },
    ))
}

/// `e^{-i T dt} e_1` for the Lanczos tridiagonal `T`.
fn krylov_coefficients(alpha: &[f64], beta: &[f64], dt: f64) -> Result<Vec<Complex>> {
    let eig = tridiagonal_eigen(alpha, &beta[..alpha.len() - 1])?;
    let m = alpha.len();
    let mut e1 = vec![Complex::new(0.0, 0.0); m];
    e1[0] = Complex::new(1.0, 0.0);
    Ok(eig
        .apply_function(&e1, |lambda| Complex::from_polar(1.0, -lambda * dt))
        .into_inner())
}

fn chebyshev(
    h: &SymBanded,
    params: &ChebyshevParams,
    lower: f64,
    upper: f64,
    dt: f64,
    v: &[Complex],
) -> Result<(ComplexVector, ApplyStats)> {
    let d = h.order();
    let width = upper - lower;
    if width < DEGENERATE_WIDTH {
        let c = 0.5 * (lower + upper);
        let mut out = ComplexVector::from(v.to_vec());
        out.scale(Complex::from_polar(1.0, -c * dt));
        return Ok((
            out,
            ApplyStats {
                steps: 1,
                converged: true,
            },
        ));
    }
    // e^{-iHt} = e^{-i(Δ/2 + ℓ)t} Σ (2 - δ_{n0}) J_n(Δt/2) φ_n, with
    // φ_0 = v, φ_1 = -iXv, φ_{n+1} = -2iXφ_n + φ_{n-1} and X = H_norm.
    let x = 0.5 * width * dt;
    let ax = x.abs();
    let phase = Complex::from_polar(1.0, -(0.5 * width + lower) * dt);
    let scale = 2.0 / width;
    let shift = 2.0 * lower / width + 1.0;
    let normalized = |u: &[Complex], out: &mut ComplexVector| {
        h.matvec_into(u, out);
        for (o, ui) in out.iter_mut().zip(u) {
            *o = *o * scale - ui * shift;
        }
    };

    let mut orders = (ax + 10.0 * ax.cbrt() + 40.0).ceil() as usize;
    let cap = params.max_terms - 1;
    let mut table = bessel_jn_table(ax, orders.min(cap))?;
    let coefficient = |table: &crate::specfun::BesselTable, n: usize| {
        let j = table.get(n);
        let signed = if x < 0.0 && n % 2 == 1 { -j } else { j };
        if n == 0 {
            signed
        } else {
            2.0 * signed
        }
    };

    let minus_i = Complex::new(0.0, -1.0);
    let mut out = ComplexVector::from(v.to_vec());
    out.scale(phase * coefficient(&table, 0));
    if params.max_terms == 1 {
        return Ok((
            out,
            ApplyStats {
                steps: 1,
                converged: coefficient(&table, 0).abs() < params.coeff_tol,
            },
        ));
    }
    let mut prev = ComplexVector::from(v.to_vec());
    let mut cur = ComplexVector::zeros(d);
    normalized(v, &mut cur);
    cur.scale(minus_i);
    let mut scratch = ComplexVector::zeros(d);
    let mut n = 1;
    let mut converged = false;
    loop {
        if n > table.max_order() {
            orders = (2 * orders).min(cap);
            table = bessel_jn_table(ax, orders)?;
        }
        let a = coefficient(&table, n);
        out.axpy(phase * a, &cur);
        // Oscillating J_n can dip below the threshold before n passes x.
        if a.abs() < params.coeff_tol && n as f64 > ax {
            converged = true;
            break;
        }
        if n == cap {
            break;
        }
        normalized(&cur, &mut scratch);
        for (s, p) in scratch.iter_mut().zip(prev.iter()) {
            *s = *s * Complex::new(0.0, -2.0) + p;
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut scratch);
        n += 1;
    }
    Ok((
        out,
        ApplyStats {
            steps: n + 1,
            converged,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(rng: &mut ChaCha8Rng, d: usize, b: usize) -> SymBanded {
        let mut m = SymBanded::zeros(d, b).unwrap();
        for j in 0..d {
            for k in 0..=b {
                if j + k < d {
                    m.set(j + k, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        m
    }

    fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> ComplexVector {
        (0..d)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn swap2(e: f64) -> SymBanded {
        SymBanded::tridiagonal(&[0.0, 0.0], &[e]).unwrap()
    }

    #[test]
    fn zero_time_is_identity_for_all_backends() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_banded(&mut rng, 2, 1);
        let v = random_vector(&mut rng, 2);
        for backend in [
            ExpmBackend::Diagonalization,
            ExpmBackend::Lanczos(LanczosParams::default()),
            ExpmBackend::Chebyshev(ChebyshevParams::default()),
            ExpmBackend::AnalyticTwoLevel,
        ] {
            let p = prepare(h.clone(), &backend).unwrap();
            assert_eq!(p.apply(0.0, &v).unwrap(), v);
        }
    }

    #[test]
    fn analytic_rotation() {
        let e_mid = 0.37;
        let dt = 2.3;
        let p = prepare(swap2(e_mid), &ExpmBackend::AnalyticTwoLevel).unwrap();
        let v = [Complex::new(0.6, 0.1), Complex::new(-0.2, 0.7)];
        let out = p.apply(dt, &v).unwrap();
        let (s, c) = (e_mid * dt).sin_cos();
        let mi = Complex::new(0.0, -s);
        assert!((out[0] - (v[0] * c + mi * v[1])).norm() < 1e-15);
        assert!((out[1] - (mi * v[0] + v[1] * c)).norm() < 1e-15);
    }

    #[test]
    fn analytic_handles_general_symmetric() {
        let h = SymBanded::tridiagonal(&[0.4, -1.3], &[0.8]).unwrap();
        let a = prepare(h.clone(), &ExpmBackend::AnalyticTwoLevel).unwrap();
        let d = prepare(h, &ExpmBackend::Diagonalization).unwrap();
        let v = [Complex::new(0.3, -0.2), Complex::new(0.1, 0.9)];
        for &dt in &[-3.0, 0.5, 7.0] {
            let x = a.apply(dt, &v).unwrap();
            let y = d.apply(dt, &v).unwrap();
            assert!(x.distance(&y) < 1e-14);
        }
    }

    #[test]
    fn analytic_rejects_larger_matrices() {
        let h = SymBanded::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(prepare(h, &ExpmBackend::AnalyticTwoLevel).is_err());
    }

    #[test]
    fn prepare_diagonal_and_chebyshev() {
        let p = prepare(
            SymBanded::diagonal(&[1.0, 2.0]).unwrap(),
            &ExpmBackend::Diagonalization,
        )
        .unwrap();
        let e = p.eigen().unwrap();
        assert_eq!(e.values, vec![1.0, 2.0]);
        assert_eq!(e.vector_entry(0, 0).abs(), 1.0);
        let c = prepare(swap2(1.0), &ExpmBackend::Chebyshev(ChebyshevParams::default())).unwrap();
        assert_eq!(c.spectral_bounds(), Some((-1.0, 1.0)));
    }

    #[test]
    fn lanczos_and_chebyshev_match_diagonalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let h = random_banded(&mut rng, 50, 2);
        let v = random_vector(&mut rng, 50);
        let exact = prepare(h.clone(), &ExpmBackend::Diagonalization)
            .unwrap()
            .apply(0.7, &v)
            .unwrap();
        let lan = prepare(
            h.clone(),
            &ExpmBackend::Lanczos(LanczosParams {
                tol: 1e-12,
                max_iters: 30,
                reorth_depth: 5,
            }),
        )
        .unwrap()
        .apply(0.7, &v)
        .unwrap();
        assert!(lan.distance(&exact) < 1e-10, "lanczos {}", lan.distance(&exact));
        let cheb = prepare(
            h,
            &ExpmBackend::Chebyshev(ChebyshevParams {
                coeff_tol: 1e-15,
                max_terms: 1000,
            }),
        )
        .unwrap()
        .apply(0.7, &v)
        .unwrap();
        assert!(cheb.distance(&exact) < 1e-12, "chebyshev {}", cheb.distance(&exact));
    }

    #[test]
    fn chebyshev_negative_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let h = random_banded(&mut rng, 30, 3);
        let v = random_vector(&mut rng, 30);
        let diag = prepare(h.clone(), &ExpmBackend::Diagonalization).unwrap();
        let cheb = prepare(h, &ExpmBackend::Chebyshev(ChebyshevParams::default())).unwrap();
        for &dt in &[-0.01, -1.3, -12.0] {
            let a = cheb.apply(dt, &v).unwrap();
            let b = diag.apply(dt, &v).unwrap();
            assert!(a.distance(&b) < 1e-12 * v.norm() * (1.0 + dt.abs()), "dt={dt}");
        }
    }

    #[test]
    fn chebyshev_degenerate_spectrum() {
        let h = SymBanded::diagonal(&[2.5; 4]).unwrap();
        let p = prepare(h, &ExpmBackend::Chebyshev(ChebyshevParams::default())).unwrap();
        let v = ComplexVector::basis(4, 2);
        let out = p.apply(0.4, &v).unwrap();
        assert!((out[2] - Complex::from_polar(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn chebyshev_flags_truncation_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let h = random_banded(&mut rng, 10, 1);
        let v = random_vector(&mut rng, 10);
        let p = prepare(
            h,
            &ExpmBackend::Chebyshev(ChebyshevParams {
                coeff_tol: 1e-15,
                max_terms: 5,
            }),
        )
        .unwrap();
        let (_, stats) = p.apply_with_stats(10.0, &v).unwrap();
        assert!(!stats.converged);
        assert_eq!(stats.steps, 5);
    }

    #[test]
    fn lanczos_breakdown_on_eigenvector() {
        let h = SymBanded::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let p = prepare(h, &ExpmBackend::Lanczos(LanczosParams::default())).unwrap();
        let v = ComplexVector::basis(3, 1);
        let (out, stats) = p.apply_with_stats(0.9, &v).unwrap();
        assert_eq!(stats.steps, 1);
        assert!(stats.converged);
        assert!((out[1] - Complex::from_polar(1.0, -1.8)).norm() < 1e-15);
    }

    #[test]
    fn lanczos_zero_vector() {
        let h = SymBanded::diagonal(&[1.0, 2.0]).unwrap();
        let p = prepare(h, &ExpmBackend::Lanczos(LanczosParams::default())).unwrap();
        let out = p.apply(1.0, &[Complex::new(0.0, 0.0); 2]).unwrap();
        assert_eq!(out, ComplexVector::zeros(2));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let h = SymBanded::diagonal(&[1.0, 2.0]).unwrap();
        let bad = ExpmBackend::Lanczos(LanczosParams {
            tol: 0.0,
            ..Default::default()
        });
        assert!(prepare(h.clone(), &bad).is_err());
        let bad = ExpmBackend::Chebyshev(ChebyshevParams {
            coeff_tol: 1e-15,
            max_terms: 0,
        });
        assert!(prepare(h.clone(), &bad).is_err());
        let p = prepare(h, &ExpmBackend::Diagonalization).unwrap();
        assert!(p.apply(1.0, &[Complex::new(1.0, 0.0)]).is_err());
    }
}
