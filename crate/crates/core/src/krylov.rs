//! Unrestarted GMRES for matrix-free complex operators.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::bandmat::{axpy, dot, norm_sqr};
use crate::error::Result;
use crate::Complex;

/// Arnoldi breakdown threshold relative to `‖b‖`.
const HAPPY_BREAKDOWN: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<Complex>,
    /// Arnoldi steps taken (one operator application each).
    pub iterations: usize,
    /// Least-squares residual `‖b - Ax_k‖ / ‖b‖` after each step.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl GmresOutcome {
    pub fn relative_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(1.0)
    }
}

/// Solves `A x = b` from `x_0 = 0`, stopping once the relative residual
/// drops below `tol` or after `max_iters` steps.
///
/// Arnoldi uses modified Gram-Schmidt; the Hessenberg least-squares problem
/// is reduced with complex Givens rotations.
pub fn gmres<F>(mut apply: F, b: &[Complex], tol: f64, max_iters: usize) -> Result<GmresOutcome>
where
    F: FnMut(&[Complex], &mut [Complex]) -> Result<()>,
{
    let n = b.len();
    let beta = norm_sqr(b).sqrt();
    let zero = Complex::new(0.0, 0.0);
    if beta == 0.0 {
        return Ok(GmresOutcome {
            x: vec![zero; n],
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
        });
    }
    let max_iters = max_iters.min(n).max(1);
    let mut basis: Vec<Vec<Complex>> = Vec::with_capacity(max_iters + 1);
    basis.push(b.iter().map(|z| z / beta).collect());
    // Column k of the rotated Hessenberg matrix lives in r[k][..=k].
    let mut r: Vec<Vec<Complex>> = Vec::with_capacity(max_iters);
    let mut cs: Vec<f64> = Vec::with_capacity(max_iters);
    let mut sn: Vec<Complex> = Vec::with_capacity(max_iters);
    let mut g = vec![Complex::new(beta, 0.0)];
    let mut history = Vec::with_capacity(max_iters);
    let mut converged = false;
    let mut w = vec![zero; n];

    for k in 0..max_iters {
        apply(&basis[k], &mut w)?;
        let mut h = vec![zero; k + 2];
        for (j, q) in basis.iter().enumerate() {
            h[j] = dot(q, &w);
            axpy(&mut w, -h[j], q);
        }
        let h_next = norm_sqr(&w).sqrt();
        h[k + 1] = Complex::new(h_next, 0.0);

        for j in 0..k {
            let (c, s) = (cs[j], sn[j]);
            let top = h[j] * c + s * h[j + 1];
            h[j + 1] = -s.conj() * h[j] + h[j + 1] * c;
            h[j] = top;
        }
        let (c, s, rho) = givens(h[k], h[k + 1]);
        h[k] = rho;
        h.truncate(k + 1);
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = gk * c;
        g.push(-s.conj() * gk);
        r.push(h);

        let rel = g[k + 1].norm() / beta;
        history.push(rel);
        if rel < tol {
            converged = true;
            break;
        }
        if h_next <= HAPPY_BREAKDOWN * beta {
            break;
        }
        basis.push(w.iter().map(|z| z / h_next).collect());
    }

    let m = r.len();
    let mut y = vec![zero; m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for j in i + 1..m {
            acc -= r[j][i] * y[j];
        }
        y[i] = acc / r[i][i];
    }
    let mut x = vec![zero; n];
    for (q, yj) in basis.iter().zip(&y) {
        axpy(&mut x, *yj, q);
    }
    Ok(GmresOutcome {
        x,
        iterations: m,
        residual_history: history,
        converged,
    })
}

/// Rotation `[c s; -s̄ c]` mapping `(a, b)` to `(ρ, 0)`.
fn givens(a: Complex, b: Complex) -> (f64, Complex, Complex) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex::new(0.0, 0.0), a);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb, Complex::new(nb, 0.0));
    }
    let r = na.hypot(nb);
    let phase = a / na;
    (na / r, phase * b.conj() / r, phase * r)
}
