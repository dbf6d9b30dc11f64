//! Benchmark systems with analytic oracles.
//!
//! - [`TwoLevelModel`]: a two-level atom in the rotating wave
//!   approximation, `H(t) = ½E0 sin²(πt/T) σ_x`.
//! - [`OscillatorModel`]: a linearly driven harmonic oscillator in the
//!   eigenbasis of the unforced oscillator, truncated to `m` states. Its
//!   populations follow a Poisson law whose mean comes from the classical
//!   forced trajectory.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::bandmat::{ComplexVector, SymBanded};
use crate::error::{Error, Result};
use crate::propagator::{HamiltonianModel, Propagation};
use crate::quadrature::gauss_legendre_rule;
use crate::Complex;

/// Tail bound used when the population series is truncated automatically.
pub const SERIES_TAIL: f64 = 1e-12;
/// Checkpoint times may overshoot `[0, T]` by this much.
const TIME_SLACK: f64 = 1e-9;
/// Above this Poisson mean `P_0 = e^{-μ}` is tracked in log form.
const LOG_DOMAIN_MEAN: f64 = 600.0;

fn check_positive(value: f64, what: &'static str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(what))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelModel {
    pub e0: f64,
    pub t_final: f64,
}

impl TwoLevelModel {
    pub fn new(e0: f64, t_final: f64) -> Result<Self> {
        check_positive(e0, "field amplitude must be positive")?;
        check_positive(t_final, "final time must be positive")?;
        Ok(Self { e0, t_final })
    }

    pub fn pulse(&self, t: f64) -> f64 {
        let s = (PI * t / self.t_final).sin();
        0.5 * self.e0 * s * s
    }

    pub fn hamiltonian(&self) -> HamiltonianModel {
        let h0 = SymBanded::zeros(2, 1).expect("valid shape");
        let swap = SymBanded::tridiagonal(&[0.0, 0.0], &[1.0]).expect("valid shape");
        let me = *self;
        let mut model = HamiltonianModel::new(h0, swap, move |t| me.pulse(t)).expect("equal orders");
        model.analytic_expm = true;
        model
    }

    pub fn initial_state(&self) -> ComplexVector {
        ComplexVector::basis(2, 0)
    }

    pub fn amplitudes(&self, t: f64) -> (Complex, Complex) {
        two_level_analytic(t, self.e0, self.t_final)
    }
}

/// `(c_g, c_e) = (cos φ, -i sin φ)` with `φ = (E0/4)(t - (T/2π) sin(2πt/T))`.
pub fn two_level_analytic(t: f64, e0: f64, t_final: f64) -> (Complex, Complex) {
    let phi = 0.25 * e0 * (t - t_final / (2.0 * PI) * (2.0 * PI * t / t_final).sin());
    let (s, c) = phi.sin_cos();
    (Complex::new(c, 0.0), Complex::new(0.0, -s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorModel {
    pub e0: f64,
    pub t_final: f64,
    pub omega0: f64,
    /// Basis size `m`.
    pub states: usize,
}

impl OscillatorModel {
    pub fn new(e0: f64, t_final: f64, omega0: f64, states: usize) -> Result<Self> {
        check_positive(e0, "field amplitude must be positive")?;
        check_positive(t_final, "final time must be positive")?;
        if !omega0.is_finite() || omega0 < 0.0 {
            return Err(Error::InvalidArgument("driving frequency must be non-negative"));
        }
        if states < 2 {
            return Err(Error::InvalidArgument("oscillator needs at least two states"));
        }
        Ok(Self {
            e0,
            t_final,
            omega0,
            states,
        })
    }

    pub fn pulse(&self, t: f64) -> f64 {
        let s = (PI * t / self.t_final).sin();
        self.e0 * s * s * (self.omega0 * t).cos()
    }

    /// `H0 = diag(n + ½)`, `W` the position operator (`√(n/2)` between
    /// states `n-1` and `n`).
    pub fn hamiltonian(&self) -> HamiltonianModel {
        let m = self.states;
        let diag: Vec<f64> = (0..m).map(|n| n as f64 + 0.5).collect();
        let off: Vec<f64> = (1..m).map(|n| (0.5 * n as f64).sqrt()).collect();
        let h0 = SymBanded::new(m, 1, {
            let mut bands = vec![0.0; 2 * m];
            for (n, e) in diag.iter().enumerate() {
                bands[2 * n] = *e;
            }
            bands
        })
        .expect("valid shape");
        let w = SymBanded::tridiagonal(&vec![0.0; m], &off).expect("valid shape");
        let me = *self;
        HamiltonianModel::new(h0, w, move |t| me.pulse(t)).expect("equal orders")
    }

    pub fn initial_state(&self) -> ComplexVector {
        ComplexVector::basis(self.states, 0)
    }

    pub fn trajectory(&self, t: f64) -> ClassicalTrajectory {
        classical_trajectory(t, self.e0, self.t_final, self.omega0)
    }
}

/// Classical forced oscillator `x'' + x = -E(t)` from rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalTrajectory {
    pub t: f64,
    pub x: f64,
    pub p: f64,
}

impl ClassicalTrajectory {
    /// Poisson mean `μ = (x² + p²)/2 = 2|h|²`, `h = (x + ip)/2`.
    pub fn mean_quanta(&self) -> f64 {
        0.5 * (self.x * self.x + self.p * self.p)
    }
}

/// `∫_0^t e^{iαs} ds`, written so that small `αt` loses no precision.
fn oscillatory_integral(alpha: f64, t: f64) -> Complex {
    let theta = alpha * t;
    if theta == 0.0 {
        return Complex::new(t, 0.0);
    }
    let half = (0.5 * theta).sin();
    Complex::new(theta.sin() / theta, 2.0 * half * half / theta) * t
}

/// `z = p + ix = -e^{it} ∫_0^t e^{-is} E(s) ds` in closed form.
///
/// `e^{-is} E(s)` expands into six exponentials `c_k e^{iα_k s}`; the
/// resonant `α = 0` case integrates to `t`.
pub fn classical_trajectory(t: f64, e0: f64, t_final: f64, omega0: f64) -> ClassicalTrajectory {
    let big_omega = 2.0 * PI / t_final;
    let mut integral = Complex::new(0.0, 0.0);
    for sigma in [1.0, -1.0] {
        let base = sigma * omega0 - 1.0;
        integral += oscillatory_integral(base, t) * (0.25 * e0);
        integral -= oscillatory_integral(base + big_omega, t) * (0.125 * e0);
        integral -= oscillatory_integral(base - big_omega, t) * (0.125 * e0);
    }
    finish_trajectory(t, integral)
}

/// The same trajectory by compounded Gauss-Legendre panels (order 20,
/// panel length `<= π/4`).
pub fn classical_trajectory_quadrature(t: f64, e0: f64, t_final: f64, omega0: f64) -> ClassicalTrajectory {
    let model = OscillatorModel {
        e0,
        t_final,
        omega0,
        states: 2,
    };
    let panels = (t / (0.25 * PI)).ceil().max(1.0) as usize;
    let width = t / panels as f64;
    let mut integral = Complex::new(0.0, 0.0);
    if t > 0.0 {
        let (nodes, weights) = gauss_legendre_rule(20, 0.0, width).expect("order 20 rule");
        for k in 0..panels {
            let a = k as f64 * width;
            for (&s, &w) in nodes.iter().zip(&weights) {
                let s = a + s;
                integral += Complex::from_polar(w * model.pulse(s), -s);
            }
        }
    }
    finish_trajectory(t, integral)
}

fn finish_trajectory(t: f64, integral: Complex) -> ClassicalTrajectory {
    let z = -Complex::from_polar(1.0, t) * integral;
    ClassicalTrajectory { t, x: z.im, p: z.re }
}

/// `P_0..=P_{n_max}` with `P_0 = e^{-μ}` and `P_n = P_{n-1} μ / n`.
pub fn population_probabilities(traj: &ClassicalTrajectory, n_max: usize) -> Vec<f64> {
    let mu = traj.mean_quanta();
    let mut out = Vec::with_capacity(n_max + 1);
    if mu == 0.0 {
        out.push(1.0);
        out.resize(n_max + 1, 0.0);
        return out;
    }
    if mu < LOG_DOMAIN_MEAN {
        let mut p = (-mu).exp();
        out.push(p);
        for n in 1..=n_max {
            p *= mu / n as f64;
            out.push(p);
        }
    } else {
        let ln_mu = mu.ln();
        let mut log_p = -mu;
        out.push(log_p.exp());
        for n in 1..=n_max {
            log_p += ln_mu - (n as f64).ln();
            out.push(log_p.exp());
        }
    }
    out
}

/// Smallest `n_max` such that `Σ_{n > n_max} P_n (n + ½)² <= tail`.
///
/// Weighting by `E_n²` makes the cut safe for the second moment as well as
/// for the norm.
pub fn truncation_order(traj: &ClassicalTrajectory, tail: f64) -> usize {
    let mu = traj.mean_quanta();
    if mu == 0.0 {
        return 0;
    }
    let mut p = (-mu).exp();
    let log_start = mu >= LOG_DOMAIN_MEAN;
    let mut log_p = -mu;
    let mut n = 0usize;
    loop {
        let next = n + 1;
        let p_next = if log_start {
            log_p += mu.ln() - (next as f64).ln();
            log_p.exp()
        } else {
            p * mu / next as f64
        };
        let e_next = next as f64 + 0.5;
        // For next > μ the weighted terms decay at least geometrically with
        // ratio r = μ/(next+1) · ((next+1.5)/(next+0.5))².
        let ratio = mu / (next + 1) as f64 * ((e_next + 1.0) / e_next).powi(2);
        if next as f64 > mu && ratio < 1.0 && p_next * e_next * e_next / (1.0 - ratio) <= tail {
            return n;
        }
        p = p_next;
        n = next;
    }
}

/// `⟨H⟩ = |x_0 + ip_0|²/2 + ½`.
pub fn energy_expectation(traj: &ClassicalTrajectory) -> f64 {
    traj.mean_quanta() + 0.5
}

/// `(Σ P_n E_n² - (Σ P_n E_n)², ⟨H⟩ - ½)` on the series truncated with
/// [`truncation_order`].
pub fn energy_variance_check(traj: &ClassicalTrajectory) -> (f64, f64) {
    let n_max = truncation_order(traj, SERIES_TAIL);
    let probs = population_probabilities(traj, n_max);
    let energy = |n: usize| n as f64 + 0.5;
    // The series is renormalized: a common rounding factor on every P_n
    // would otherwise enter the variance scaled by ⟨H⟩².
    let total: f64 = probs.iter().sum();
    let mean = probs.iter().enumerate().map(|(n, p)| p * energy(n)).sum::<f64>() / total;
    let spread: f64 = probs
        .iter()
        .enumerate()
        .map(|(n, p)| p * (energy(n) - mean).powi(2))
        .sum();
    (spread / total, energy_expectation(traj) - 0.5)
}

/// Worst-case errors over the propagation points. `INF` entries mean the
/// run diverged or produced a non-finite state.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMetrics {
    /// `max` over `eps_sol_states`.
    pub eps_sol: f64,
    /// Two-level: ground and excited population errors. Oscillator: the
    /// ground-state population error.
    pub eps_sol_states: Vec<f64>,
    /// `max_j |1 - ‖ψ(τ_j)‖²|`.
    pub eps_norm: f64,
    pub k_max: usize,
}

impl ErrorMetrics {
    pub fn infinite(states: usize, k_max: usize) -> Self {
        Self {
            eps_sol: f64::INFINITY,
            eps_sol_states: vec![f64::INFINITY; states],
            eps_norm: f64::INFINITY,
            k_max,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.eps_sol.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Benchmark {
    TwoLevel(TwoLevelModel),
    Oscillator(OscillatorModel),
}

impl Benchmark {
    pub fn hamiltonian(&self) -> HamiltonianModel {
        match self {
            Benchmark::TwoLevel(m) => m.hamiltonian(),
            Benchmark::Oscillator(m) => m.hamiltonian(),
        }
    }

    pub fn initial_state(&self) -> ComplexVector {
        match self {
            Benchmark::TwoLevel(m) => m.initial_state(),
            Benchmark::Oscillator(m) => m.initial_state(),
        }
    }

    pub fn t_final(&self) -> f64 {
        match self {
            Benchmark::TwoLevel(m) => m.t_final,
            Benchmark::Oscillator(m) => m.t_final,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Benchmark::TwoLevel(_) => 2,
            Benchmark::Oscillator(m) => m.states,
        }
    }

    /// Exact populations of states `0..count` at `t`.
    pub fn oracle_populations(&self, t: f64, count: usize) -> Vec<f64> {
        match self {
            Benchmark::TwoLevel(m) => {
                let (g, e) = m.amplitudes(t);
                let mut out = vec![g.norm_sqr(), e.norm_sqr()];
                out.truncate(count);
                out
            }
            Benchmark::Oscillator(m) => {
                population_probabilities(&m.trajectory(t), count.saturating_sub(1)).into_iter().take(count).collect()
            }
        }
    }

    fn check_alignment(&self, run: &Propagation) -> Result<()> {
        if run.times.len() != run.states.len() {
            return Err(Error::DimensionMismatch {
                expected: run.times.len(),
                found: run.states.len(),
            });
        }
        let t_final = self.t_final();
        let mut previous = f64::NEG_INFINITY;
        for (index, &time) in run.times.iter().enumerate() {
            let inside = time >= -TIME_SLACK * t_final && time <= t_final * (1.0 + TIME_SLACK);
            if !inside || time < previous {
                return Err(Error::CheckpointMisaligned { index, time });
            }
            previous = time;
        }
        Ok(())
    }

    pub fn compute_metrics(&self, run: &Propagation) -> Result<ErrorMetrics> {
        self.check_alignment(run)?;
        let tracked = match self {
            Benchmark::TwoLevel(_) => 2,
            Benchmark::Oscillator(_) => 1,
        };
        let k_max = run.report.k_max;
        if run.report.diverged() || run.states.iter().any(|s| !s.is_finite()) {
            return Ok(ErrorMetrics::infinite(tracked, k_max));
        }
        let mut states = vec![0.0f64; tracked];
        let mut eps_norm = 0.0f64;
        for (&t, psi) in run.times.iter().zip(&run.states) {
            let exact = self.oracle_populations(t, tracked);
            for (e, (c, p)) in states.iter_mut().zip(psi.iter().zip(&exact)) {
                *e = e.max((c.norm_sqr() - p).abs());
            }
            eps_norm = eps_norm.max((1.0 - psi.norm_sqr()).abs());
        }
        Ok(ErrorMetrics {
            eps_sol: states.iter().copied().fold(0.0, f64::max),
            eps_sol_states: states,
            eps_norm,
            k_max,
        })
    }

    /// Mean over `n = 1..=n_states` of `max_j ||c_n(τ_j)|² - P_n(τ_j)|`.
    pub fn per_state_error(&self, run: &Propagation, n_states: usize) -> Result<f64> {
        self.check_alignment(run)?;
        if n_states == 0 || n_states >= self.order() {
            return Err(Error::InvalidArgument("state count must lie in 1..m"));
        }
        if run.report.diverged() {
            return Ok(f64::INFINITY);
        }
        let mut worst = vec![0.0f64; n_states];
        for (&t, psi) in run.times.iter().zip(&run.states) {
            let exact = self.oracle_populations(t, n_states + 1);
            for (n, w) in worst.iter_mut().enumerate() {
                *w = w.max((psi[n + 1].norm_sqr() - exact[n + 1]).abs());
            }
        }
        Ok(worst.iter().sum::<f64>() / n_states as f64)
    }
}
