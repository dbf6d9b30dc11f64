//! Interval-by-interval Volterra propagation.
//!
//! On each `[τ_j, τ_{j+1}]` the Hamiltonian is split as
//! `H(t) = H_j + V_j(t)` with `H_j = H0 + f(t_mid) W` and
//! `V_j(t) = (f(t) - f(t_mid)) W`. The node values `ψ(t_2..t_n)` then solve
//!
//! ```text
//! ψ(t_p) = e^{-iH_j(t_p-τ_j)} ψ(τ_j) - i Σ_l w_{p,l} e^{-iH_j(t_p-t_l)} V_j(t_l) ψ(t_l)
//! ```
//!
//! which [`interval`] iterates with Jacobi, Gauss-Seidel or GMRES, and
//! [`diagnostics`] analyses through the iteration matrix `A_j`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::bandmat::{ComplexVector, SymBanded};
use crate::error::{Error, Result};
use crate::expm::ExpmBackend;
use crate::quadrature::{lagrange_weight_matrix, NodeKind, NodeSet};
use crate::Complex;

pub mod diagnostics;
pub mod interval;

pub use diagnostics::{
    gershgorin_bound, gs_spectral_radius, interval_radii, jacobi_iteration_matrix,
    spectral_radius, SpectralEstimate,
};
pub use interval::{
    apply_iteration_operator, converge_interval, gauss_seidel_step, gmres_solve, inhomogeneous_term, jacobi_step,
    volterra_rhs, IntervalOperators, IntervalReport, IterateSet,
};

/// Node norms above this multiple of `‖ψ(τ_j)‖` count as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Scalar pulse `f(t)`.
pub type Pulse = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `H(t) = H0 + f(t) W`.
#[derive(Clone)]
pub struct HamiltonianModel {
    pub h0: SymBanded,
    pub coupling: SymBanded,
    pub pulse: Pulse,
    /// Whether [`ExpmBackend::AnalyticTwoLevel`] applies to `H(t)`.
    pub analytic_expm: bool,
}

impl fmt::Debug for HamiltonianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianModel")
            .field("h0", &self.h0)
            .field("coupling", &self.coupling)
            .field("analytic_expm", &self.analytic_expm)
            .finish_non_exhaustive()
    }
}

impl HamiltonianModel {
    pub fn new(
        h0: SymBanded,
        coupling: SymBanded,
        pulse: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if h0.order() != coupling.order() {
            return Err(Error::DimensionMismatch {
                expected: h0.order(),
                found: coupling.order(),
            });
        }
        let analytic_expm = h0.order() == 2;
        Ok(Self {
            h0,
            coupling,
            pulse: Arc::new(pulse),
            analytic_expm,
        })
    }

    pub fn order(&self) -> usize {
        self.h0.order()
    }

    pub fn pulse_at(&self, t: f64) -> f64 {
        (self.pulse)(t)
    }

    /// `H0 + f(t) W`.
    pub fn at(&self, t: f64) -> Result<SymBanded> {
        self.h0.add_scaled(self.pulse_at(t), &self.coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Jacobi,
    GaussSeidel,
    Gmres,
}

impl Scheme {
    /// Update-norm tolerance for the stationary schemes, relative residual
    /// for GMRES.
    pub fn default_tol(self) -> f64 {
        match self {
            Scheme::Jacobi | Scheme::GaussSeidel => 1e-10,
            Scheme::Gmres => 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub scheme: Scheme,
    pub tol: f64,
    /// `None` means `2n - 2`.
    pub max_iters: Option<usize>,
    /// Compute `ρ(A_j)` on every interval.
    pub diagnostics: bool,
    pub node_kind: NodeKind,
    /// Inner Gauss-Legendre order for the weights; `None` means `n`.
    pub quad_order: Option<usize>,
}

impl SolverSettings {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            tol: scheme.default_tol(),
            max_iters: None,
            diagnostics: false,
            node_kind: NodeKind::GaussLobatto,
            quad_order: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.diagnostics = on;
        self
    }

    pub fn with_node_kind(mut self, kind: NodeKind) -> Self {
        self.node_kind = kind;
        self
    }

    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(2 * n - 2).max(1)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive"));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidArgument("max_iters must be at least 1"));
        }
        Ok(())
    }
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self::new(Scheme::Jacobi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    /// Some interval hit its iteration cap; propagation continued.
    MaxIter,
    Diverged,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIter => "max-iter",
            RunStatus::Diverged => "diverged",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub status: RunStatus,
    pub intervals: Vec<IntervalReport>,
    /// Largest iteration count over all intervals.
    pub k_max: usize,
    /// `max_j ρ(A_j)` when diagnostics are enabled.
    pub rho_max: Option<f64>,
    /// Only measured with the `std` feature.
    pub wall_time: Option<Duration>,
}

impl PropagationReport {
    pub(crate) fn empty() -> Self {
        Self {
            status: RunStatus::Converged,
            intervals: Vec::new(),
            k_max: 0,
            rho_max: None,
            wall_time: None,
        }
    }

    pub fn diverged(&self) -> bool {
        self.status == RunStatus::Diverged
    }

    fn absorb(&mut self, r: IntervalReport) {
        self.k_max = self.k_max.max(r.iterations);
        if let Some(rho) = r.rho_estimate {
            self.rho_max = Some(self.rho_max.map_or(rho, |m: f64| m.max(rho)));
        }
        if r.diverged {
            self.status = RunStatus::Diverged;
        } else if !r.converged && self.status == RunStatus::Converged {
            self.status = RunStatus::MaxIter;
        }
        self.intervals.push(r);
    }
}

/// States at the propagation points `τ_0 = t0, τ_1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub times: Vec<f64>,
    pub states: Vec<ComplexVector>,
    pub report: PropagationReport,
}

impl Propagation {
    pub fn final_state(&self) -> &ComplexVector {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Number of equal intervals of width `dt` covering `[t0, t_final]`.
pub(crate) fn interval_count(t0: f64, t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument("step must be positive and finite"));
    }
    if !(t_final >= t0) {
        return Err(Error::InvalidArgument("final time precedes the start time"));
    }
    let ratio = (t_final - t0) / dt;
    let count = (ratio + 0.5) as usize;
    if (ratio - count as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::NonIntegralIntervals(ratio));
    }
    Ok(count)
}

/// Start of interval `j`; the last end point is pinned to `t_final`.
pub(crate) fn grid_point(t0: f64, t_final: f64, dt: f64, j: usize, count: usize) -> f64 {
    if j == count {
        t_final
    } else {
        t0 + j as f64 * dt
    }
}

/// Propagates `psi0` from `t0` to `t_final` with `n` nodes per interval.
///
/// A diverged interval, or a state whose norm exceeds `1e6 ‖ψ0‖`, stops the
/// run; the returned trajectory then ends at the last accepted point and the
/// report status is `Diverged`.
#[allow(clippy::too_many_arguments)]
pub fn propagate(
    model: &HamiltonianModel,
    psi0: &[Complex],
    t0: f64,
    t_final: f64,
    dt: f64,
    n: usize,
    settings: &SolverSettings,
    backend: &ExpmBackend,
) -> Result<Propagation> {
    #[cfg(feature = "std")]
    let clock = std::time::Instant::now();
    settings.validate()?;
    if psi0.len() != model.order() {
        return Err(Error::DimensionMismatch {
            expected: model.order(),
            found: psi0.len(),
        });
    }
    backend.validate(model.order())?;
    let count = interval_count(t0, t_final, dt)?;
    let reference = NodeSet::new(settings.node_kind, n, t0, t0 + dt)?;
    let weights = lagrange_weight_matrix(&reference, settings.quad_order.unwrap_or(n))?;

    let mut times = Vec::with_capacity(count + 1);
    let mut states = Vec::with_capacity(count + 1);
    times.push(t0);
    states.push(ComplexVector::from(psi0.to_vec()));
    let run_limit = DIVERGENCE_FACTOR * states[0].norm();
    let mut report = PropagationReport::empty();
    for j in 0..count {
        let a = grid_point(t0, t_final, dt, j, count);
        let nodes = reference.translated(a);
        let ops = IntervalOperators::new(model, nodes, backend)?;
        let start = states.last().expect("non-empty");
        let (iterate, mut interval) = converge_interval(&ops, &weights, start, settings)?;
        if settings.diagnostics {
            let a_j = jacobi_iteration_matrix(&ops, &weights)?;
            interval.rho_estimate = Some(spectral_radius(&a_j).value);
        }
        let next = iterate.into_last();
        // Growth spread over many intervals never trips the per-interval test.
        if !next.is_finite() || !(next.norm() <= run_limit) {
            interval.diverged = true;
            interval.converged = false;
        }
        let diverged = interval.diverged;
        report.absorb(interval);
        if diverged {
            break;
        }
        times.push(grid_point(t0, t_final, dt, j + 1, count));
        states.push(next);
    }
    #[cfg(feature = "std")]
    {
        report.wall_time = Some(clock.elapsed());
    }
    Ok(Propagation {
        times,
        states,
        report,
    })
}

/// Builder over [`propagate`].
#[derive(Debug, Clone)]
pub struct Propagator {
    model: HamiltonianModel,
    settings: SolverSettings,
    backend: ExpmBackend,
    points: usize,
    dt: f64,
}

impl Propagator {
    pub fn new(model: HamiltonianModel) -> Self {
        let backend = if model.analytic_expm {
            ExpmBackend::AnalyticTwoLevel
        } else {
            ExpmBackend::Diagonalization
        };
        Self {
            model,
            settings: SolverSettings::default(),
            backend,
            points: 6,
            dt: 1.0,
        }
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.settings.scheme = scheme;
        self.settings.tol = scheme.default_tol();
        self
    }

    pub fn settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn backend(mut self, backend: ExpmBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn points(mut self, n: usize) -> Self {
        self.points = n;
        self
    }

    pub fn step(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.settings.tol = tol;
        self
    }

    pub fn diagnostics(mut self, on: bool) -> Self {
        self.settings.diagnostics = on;
        self
    }

    pub fn run(&self, psi0: &[Complex], t0: f64, t_final: f64) -> Result<Propagation> {
        propagate(
            &self.model,
            psi0,
            t0,
            t_final,
            self.dt,
            self.points,
            &self.settings,
            &self.backend,
        )
    }
}
