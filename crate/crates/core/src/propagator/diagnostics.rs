//! Iteration-matrix diagnostics: assembled `A_j`, spectral radii and the
//! Gershgorin row-sum bound.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::interval::IntervalOperators;
use super::{grid_point, interval_count, HamiltonianModel};
use crate::bandmat::ComplexVector;
use crate::dense::{DenseLu, DenseMatrix};
use crate::error::{Error, Result};
use crate::expm::ExpmBackend;
use crate::quadrature::{lagrange_weight_matrix, NodeKind, NodeSet, WeightMatrix};
use crate::Complex;

/// Largest `d(n-1)` for which `A_j` is assembled.
pub const DIAGNOSTIC_CAP: usize = 4096;
const POWER_SEED: u64 = 0x5eed_a11e;
const POWER_TOL: f64 = 1e-6;
const POWER_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    /// False when power iteration stagnated and `value` is a Gelfand
    /// (geometric-mean growth) estimate.
    pub converged: bool,
}

/// Dense `A_j` with block `(p, l) = -i w_{p,l} e^{-iH_j(t_p-t_l)} V_j(t_l)`
/// for `p, l = 2..n`.
pub fn jacobi_iteration_matrix(ops: &IntervalOperators<'_>, weights: &WeightMatrix) -> Result<DenseMatrix> {
    let d = ops.order();
    let n = ops.points();
    let size = d * (n - 1);
    if size > DIAGNOSTIC_CAP {
        return Err(Error::DiagnosticTooLarge {
            order: size,
            cap: DIAGNOSTIC_CAP,
        });
    }
    let t = ops.nodes.nodes();
    let mut a = DenseMatrix::zeros(size, size);
    let mut column = ComplexVector::zeros(d);
    for l in 1..n {
        let v = ops.v_scalars[l];
        if v == 0.0 {
            continue;
        }
        for k in 0..d {
            for (i, c) in column.iter_mut().enumerate() {
                *c = Complex::new(v * ops.coupling.get(i, k), 0.0);
            }
            for p in 1..n {
                let w = weights.get(p, l);
                if w == 0.0 {
                    continue;
                }
                let e = ops.expm.apply(t[p] - t[l], &column)?;
                for (i, z) in e.iter().enumerate() {
                    a.set((p - 1) * d + i, (l - 1) * d + k, Complex::new(0.0, -w) * z);
                }
            }
        }
    }
    Ok(a)
}

/// `max_i Σ_j |a_ij|`, an upper bound on the spectral radius.
pub fn gershgorin_bound(a: &DenseMatrix) -> f64 {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest eigenvalue modulus by power iteration from a seeded random start.
pub fn spectral_radius(a: &DenseMatrix) -> SpectralEstimate {
    power_iteration(a.cols(), |x| a.matvec(x).expect("square matrix"))
}

/// `ρ((I - L)^{-1} U)`, the Gauss-Seidel analogue of `ρ(A_j)`, where `L`
/// holds the blocks `l <= p` of `A_j` and `U` the blocks `l > p`.
pub fn gs_spectral_radius(a: &DenseMatrix, block: usize) -> Result<SpectralEstimate> {
    let size = a.rows();
    if a.cols() != size || block == 0 || size % block != 0 {
        return Err(Error::InvalidArgument("matrix is not square in whole blocks"));
    }
    let blocks = size / block;
    let diagonal: Vec<DenseLu> = (0..blocks)
        .map(|p| {
            let mut m = a.block(p * block, p * block, block);
            for i in 0..block {
                for j in 0..block {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    m.set(i, j, Complex::new(delta, 0.0) - m.get(i, j));
                }
            }
            m.lu()
        })
        .collect::<Result<_>>()?;
    Ok(power_iteration(size, |x| {
        let mut z = alloc::vec![Complex::new(0.0, 0.0); size];
        for p in 0..blocks {
            let mut rhs = Vec::with_capacity(block);
            for i in 0..block {
                let row = a.row(p * block + i);
                // U x from the strictly upper blocks, L z from the finished ones.
                let upper: Complex = row[(p + 1) * block..].iter().zip(&x[(p + 1) * block..]).map(|(a, b)| a * b).sum();
                let lower: Complex = row[..p * block].iter().zip(&z[..p * block]).map(|(a, b)| a * b).sum();
                rhs.push(upper + lower);
            }
            let zp = diagonal[p].solve(&rhs).expect("block size matches");
            z[p * block..(p + 1) * block].copy_from_slice(&zp);
        }
        z
    }))
}

fn power_iteration(size: usize, mut apply: impl FnMut(&[Complex]) -> Vec<Complex>) -> SpectralEstimate {
    if size == 0 {
        return SpectralEstimate {
            value: 0.0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut x: Vec<Complex> = (0..size)
        .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut x);
    let mut previous = f64::NAN;
    let mut log_growth = 0.0;
    for step in 1..=POWER_MAX_STEPS {
        let mut y = apply(&x);
        let growth = normalize(&mut y);
        if growth == 0.0 || !growth.is_finite() {
            return SpectralEstimate {
                value: growth,
                converged: growth == 0.0,
            };
        }
        if (growth - previous).abs() <= POWER_TOL * growth {
            return SpectralEstimate {
                value: growth,
                converged: true,
            };
        }
        if step > POWER_MAX_STEPS / 2 {
            log_growth += growth.ln();
        }
        previous = growth;
        x = y;
    }
    SpectralEstimate {
        value: (log_growth / (POWER_MAX_STEPS - POWER_MAX_STEPS / 2) as f64).exp(),
        converged: false,
    }
}

fn normalize(x: &mut [Complex]) -> f64 {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        x.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

/// `ρ(A_j)` on every interval of `[t0, t_final]`, independent of whether a
/// stationary iteration would converge there.
pub fn interval_radii(
    model: &HamiltonianModel,
    t0: f64,
    t_final: f64,
    dt: f64,
    n: usize,
    node_kind: NodeKind,
    backend: &ExpmBackend,
) -> Result<Vec<SpectralEstimate>> {
    let count = interval_count(t0, t_final, dt)?;
    let reference = NodeSet::new(node_kind, n, t0, t0 + dt)?;
    let weights = lagrange_weight_matrix(&reference, n)?;
    (0..count)
        .map(|j| {
            let nodes = reference.translated(grid_point(t0, t_final, dt, j, count));
            let ops = IntervalOperators::new(model, nodes, backend)?;
            Ok(spectral_radius(&jacobi_iteration_matrix(&ops, &weights)?))
        })
        .collect()
}
