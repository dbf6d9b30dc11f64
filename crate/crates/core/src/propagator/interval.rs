//! One interval of the discretized Volterra system.
//!
//! The sums `Σ_l w_{p,l} e^{-iH_j(t_p-t_l)} u_l` are evaluated in the
//! factored form `e^{-iH_j(t_p-τ_j)} Σ_l w_{p,l} e^{-iH_j(τ_j-t_l)} u_l`,
//! which needs `2(n-1)` exponential applications per sweep instead of
//! `n(n-1)`. [`volterra_rhs`] keeps the term-by-term form.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{HamiltonianModel, SolverSettings, Scheme, DIVERGENCE_FACTOR};
use crate::bandmat::{axpy, norm_sqr, ComplexVector, SymBanded};
use crate::error::{Error, Result};
use crate::expm::{ExpmBackend, PreparedExponential};
use crate::krylov::gmres;
use crate::quadrature::{NodeSet, WeightMatrix};
use crate::Complex;

const MINUS_I: Complex = Complex::new(0.0, -1.0);

/// Per-interval operators: midpoint Hamiltonian, kernel scalars and the
/// prepared exponential of `H_j`.
#[derive(Debug, Clone)]
pub struct IntervalOperators<'a> {
    pub start: f64,
    pub end: f64,
    pub f_mid: f64,
    pub coupling: &'a SymBanded,
    pub nodes: NodeSet,
    /// `f(t_i) - f_mid` at each node.
    pub v_scalars: Vec<f64>,
    pub expm: PreparedExponential,
}

impl<'a> IntervalOperators<'a> {
    pub fn new(model: &'a HamiltonianModel, nodes: NodeSet, backend: &ExpmBackend) -> Result<Self> {
        let (start, end) = (nodes.start(), nodes.end());
        let f_mid = model.pulse_at(0.5 * (start + end));
        let h_j = model.h0.add_scaled(f_mid, &model.coupling)?;
        let v_scalars = nodes.nodes().iter().map(|&t| model.pulse_at(t) - f_mid).collect();
        Ok(Self {
            start,
            end,
            f_mid,
            coupling: &model.coupling,
            nodes,
            v_scalars,
            expm: PreparedExponential::new(h_j, backend)?,
        })
    }

    pub fn order(&self) -> usize {
        self.expm.order()
    }

    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    fn time(&self, p: usize) -> f64 {
        self.nodes.nodes()[p]
    }

    /// `V_j(t_l) ψ`, or `None` when `V_j(t_l) = 0`.
    fn kernel(&self, l: usize, psi: &[Complex]) -> Option<ComplexVector> {
        let v = self.v_scalars[l];
        if v == 0.0 {
            return None;
        }
        let mut out = ComplexVector::zeros(psi.len());
        self.coupling.matvec_into(psi, &mut out);
        out.scale(Complex::new(v, 0.0));
        Some(out)
    }

    /// `e^{-iH_j(τ_j - t_l)} V_j(t_l) ψ`.
    fn pulled_back(&self, l: usize, psi: &[Complex]) -> Result<Option<ComplexVector>> {
        match self.kernel(l, psi) {
            Some(u) => self.expm.apply(self.start - self.time(l), &u).map(Some),
            None => Ok(None),
        }
    }

    /// `-i e^{-iH_j(t_p-τ_j)} Σ_l w_{p,l} y_l` over pulled-back sources,
    /// omitting index `skip`.
    fn correction(
        &self,
        weights: &WeightMatrix,
        p: usize,
        sources: &[Option<ComplexVector>],
        skip: Option<usize>,
    ) -> Result<Option<ComplexVector>> {
        let d = self.order();
        let mut acc: Option<ComplexVector> = None;
        for (l, y) in sources.iter().enumerate() {
            let w = weights.get(p, l);
            if Some(l) == skip || w == 0.0 {
                continue;
            }
            if let Some(y) = y {
                acc.get_or_insert_with(|| ComplexVector::zeros(d))
                    .axpy(Complex::new(w, 0.0), y);
            }
        }
        match acc {
            Some(z) => {
                let mut out = self.expm.apply(self.time(p) - self.start, &z)?;
                out.scale(MINUS_I);
                Ok(Some(out))
            }
            None => Ok(None),
        }
    }
}

/// Node values `ψ(t_1..t_n)` on one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateSet {
    pub values: Vec<ComplexVector>,
    pub iteration: usize,
    pub diverged: bool,
}

impl IterateSet {
    pub fn last(&self) -> &ComplexVector {
        self.values.last().expect("at least two nodes")
    }

    pub fn into_last(mut self) -> ComplexVector {
        self.values.pop().expect("at least two nodes")
    }

    /// `max_p ‖ψ_p - other_p‖`.
    pub fn max_distance(&self, other: &IterateSet) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max(a.distance(b)))
    }

    fn check_divergence(&mut self, reference_norm: f64) {
        let limit = DIVERGENCE_FACTOR * reference_norm;
        self.diverged = self
            .values
            .iter()
            .any(|v| !v.is_finite() || !(v.norm() <= limit));
    }
}

/// Outcome of [`converge_interval`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalReport {
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    /// Last `max_p ‖ψ^{(k)}(t_p) - ψ^{(k-1)}(t_p)‖` (stationary schemes).
    pub final_update_norm: f64,
    /// Relative GMRES residual.
    pub residual_norm: Option<f64>,
    pub residual_history: Vec<f64>,
    /// Update norms per sweep (stationary schemes).
    pub update_history: Vec<f64>,
    pub rho_estimate: Option<f64>,
    pub wall_time: Option<Duration>,
}

/// `ψ^{(0)}(t_i) = e^{-iH_j(t_i-τ_j)} ψ(τ_j)`.
pub fn inhomogeneous_term(ops: &IntervalOperators<'_>, psi_start: &[Complex]) -> Result<IterateSet> {
    let mut values = Vec::with_capacity(ops.points());
    values.push(ComplexVector::from(psi_start.to_vec()));
    for p in 1..ops.points() {
        values.push(ops.expm.apply(ops.time(p) - ops.start, psi_start)?);
    }
    Ok(IterateSet {
        values,
        iteration: 0,
        diverged: false,
    })
}

/// Right side of the discretized equation at node `p`, assembled term by
/// term from `g` (the inhomogeneous term) and the iterate `iter`.
pub fn volterra_rhs(
    ops: &IntervalOperators<'_>,
    weights: &WeightMatrix,
    g: &IterateSet,
    iter: &IterateSet,
    p: usize,
) -> Result<ComplexVector> {
    let mut out = g.values[p].clone();
    for l in 0..ops.points() {
        let w = weights.get(p, l);
        if w == 0.0 {
            continue;
        }
        if let Some(u) = ops.kernel(l, &iter.values[l]) {
            let term = ops.expm.apply(ops.time(p) - ops.time(l), &u)?;
            out.axpy(MINUS_I * w, &term);
        }
    }
    Ok(out)
}

fn pulled_back_all(ops: &IntervalOperators<'_>, values: &[ComplexVector]) -> Result<Vec<Option<ComplexVector>>> {
    values
        .iter()
        .enumerate()
        .map(|(l, psi)| ops.pulled_back(l, psi))
        .collect()
}

/// One Jacobi sweep: every node from the previous iterate.
pub fn jacobi_step(
    ops: &IntervalOperators<'_>,
    weights: &WeightMatrix,
    g: &IterateSet,
    iter: &IterateSet,
) -> Result<IterateSet> {
    let sources = pulled_back_all(ops, &iter.values)?;
    let mut values = Vec::with_capacity(ops.points());
    values.push(iter.values[0].clone());
    for p in 1..ops.points() {
        let mut next = g.values[p].clone();
        if let Some(c) = ops.correction(weights, p, &sources, None)? {
            next.axpy(Complex::new(1.0, 0.0), &c);
        }
        values.push(next);
    }
    let mut out = IterateSet {
        values,
        iteration: iter.iteration + 1,
        diverged: false,
    };
    out.check_divergence(iter.values[0].norm());
    Ok(out)
}

/// One Gauss-Seidel sweep in ascending node order, solving
/// `(I + i w_pp V_j(t_p)) ψ_p = rhs` at each node.
pub fn gauss_seidel_step(
    ops: &IntervalOperators<'_>,
    weights: &WeightMatrix,
    g: &IterateSet,
    iter: &IterateSet,
) -> Result<IterateSet> {
    let mut values = iter.values.clone();
    let mut sources = pulled_back_all(ops, &values)?;
    for p in 1..ops.points() {
        let mut rhs = g.values[p].clone();
        if let Some(c) = ops.correction(weights, p, &sources, Some(p))? {
            rhs.axpy(Complex::new(1.0, 0.0), &c);
        }
        let alpha = Complex::new(0.0, weights.get(p, p) * ops.v_scalars[p]);
        values[p] = ops.coupling.solve_shifted(alpha, &rhs).map_err(|e| match e {
            Error::Singular { pivot } => Error::SingularShiftedSystem { node: p, pivot },
            other => other,
        })?;
        sources[p] = ops.pulled_back(p, &values[p])?;
    }
    let mut out = IterateSet {
        values,
        iteration: iter.iteration + 1,
        diverged: false,
    };
    out.check_divergence(iter.values[0].norm());
    Ok(out)
}

/// Matrix-free `out = A_j x` for the stacked nodes `2..n`.
pub fn apply_iteration_operator(
    ops: &IntervalOperators<'_>,
    weights: &WeightMatrix,
    x: &[Complex],
    out: &mut [Complex],
) -> Result<()> {
    let d = ops.order();
    let n = ops.points();
    let size = d * (n - 1);
    if x.len() != size || out.len() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: if x.len() != size { x.len() } else { out.len() },
        });
    }
    let mut sources = vec![None; n];
    for l in 1..n {
        sources[l] = ops.pulled_back(l, &x[(l - 1) * d..l * d])?;
    }
    out.fill(Complex::new(0.0, 0.0));
    for p in 1..n {
        if let Some(c) = ops.correction(weights, p, &sources, None)? {
            axpy(&mut out[(p - 1) * d..p * d], Complex::new(1.0, 0.0), &c);
        }
    }
    Ok(())
}

/// Solves `(I - A_j) x = b` for the stacked nodes `2..n` with GMRES.
pub fn gmres_solve(
    ops: &IntervalOperators<'_>,
    weights: &WeightMatrix,
    psi_start: &[Complex],
    settings: &SolverSettings,
) -> Result<(IterateSet, IntervalReport)> {
    let d = ops.order();
    let n = ops.points();
    let g = inhomogeneous_term(ops, psi_start)?;
    let first: Vec<Option<ComplexVector>> = {
        let mut s = vec![None; n];
        s[0] = ops.kernel(0, psi_start);
        s
    };
    let mut b = Vec::with_capacity(d * (n - 1));
    for p in 1..n {
        let mut bp = g.values[p].clone();
        if let Some(c) = ops.correction(weights, p, &first, None)? {
            bp.axpy(Complex::new(1.0, 0.0), &c);
        }
        b.extend_from_slice(&bp);
    }

    let cap = settings.iteration_cap(n).min(d * (n - 1));
    let outcome = gmres(
        |x, out| {
            apply_iteration_operator(ops, weights, x, out)?;
            for (o, xi) in out.iter_mut().zip(x) {
                *o = xi - *o;
            }
            Ok(())
        },
        &b,
        settings.tol,
        cap,
    )?;

    let mut values = Vec::with_capacity(n);
    values.push(ComplexVector::from(psi_start.to_vec()));
    for p in 1..n {
        values.push(ComplexVector::from(outcome.x[(p - 1) * d..p * d].to_vec()));
    }
    let mut iterate = IterateSet {
        values,
        iteration: outcome.iterations,
        diverged: false,
    };
    iterate.check_divergence(norm_sqr(psi_start).sqrt());
    let report = IntervalReport {
        iterations: outcome.iterations,
        converged: outcome.converged && !iterate.diverged,
        diverged: iterate.diverged,
        residual_norm: Some(outcome.relative_residual()),
        residual_history: outcome.residual_history,
        ..IntervalReport::default()
    };
    Ok((iterate, report))
}

/// Iterates one interval to convergence under `settings`.
pub fn converge_interval(
    ops: &IntervalOperators<'_>,
    weights: &WeightMatrix,
    psi_start: &[Complex],
    settings: &SolverSettings,
) -> Result<(IterateSet, IntervalReport)> {
    if weights.len() != ops.points() {
        return Err(Error::DimensionMismatch {
            expected: ops.points(),
            found: weights.len(),
        });
    }
    #[cfg(feature = "std")]
    let clock = std::time::Instant::now();
    let (iterate, mut report) = match settings.scheme {
        Scheme::Gmres => gmres_solve(ops, weights, psi_start, settings)?,
        Scheme::Jacobi | Scheme::GaussSeidel => {
            let g = inhomogeneous_term(ops, psi_start)?;
            let step = match settings.scheme {
                Scheme::Jacobi => jacobi_step,
                _ => gauss_seidel_step,
            };
            let cap = settings.iteration_cap(ops.points());
            let mut current = g.clone();
            let mut report = IntervalReport::default();
            loop {
                let next = step(ops, weights, &g, &current)?;
                let update = next.max_distance(&current);
                report.update_history.push(update);
                report.final_update_norm = update;
                report.iterations = next.iteration;
                current = next;
                if current.diverged {
                    report.diverged = true;
                    break;
                }
                if update < settings.tol {
                    report.converged = true;
                    break;
                }
                if current.iteration >= cap {
                    break;
                }
            }
            (current, report)
        }
    };
    #[cfg(feature = "std")]
    {
        report.wall_time = Some(clock.elapsed());
    }
    #[cfg(not(feature = "std"))]
    let _ = &mut report;
    Ok((iterate, report))
}
