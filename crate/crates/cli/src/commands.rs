//! Subcommand bodies.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use itvolt::models::{energy_expectation, energy_variance_check, population_probabilities};
use itvolt::propagator::interval_radii;
use itvolt::quadrature::NodeKind;
use itvolt::{
    propagate, reference_propagate, Benchmark, ComplexVector, HamiltonianModel, OscillatorModel,
    Propagation, ReferenceMethod, RunStatus, SolverSettings, TwoLevelModel,
};

use crate::config::{ExpmKind, ModelKind, ModelParams, RunConfig, SolverKind};
use crate::row::{format_float, ResultRow, RowStatus};

/// The model, benchmark oracle and initial state described by `config`.
pub fn build(params: &ModelParams) -> Result<(HamiltonianModel, Benchmark, ComplexVector)> {
    Ok(match params.model {
        ModelKind::TwoLevel => {
            let m = TwoLevelModel::new(params.e0, params.t_final)?;
            (m.hamiltonian(), Benchmark::TwoLevel(m), m.initial_state())
        }
        ModelKind::Oscillator => {
            let m = OscillatorModel::new(params.e0, params.t_final, params.omega0, params.states)?;
            (m.hamiltonian(), Benchmark::Oscillator(m), m.initial_state())
        }
    })
}

fn solve_once(config: &RunConfig, model: &HamiltonianModel, psi0: &ComplexVector) -> Result<Propagation> {
    let run = match config.solver {
        SolverKind::Itvolt(scheme) => {
            let mut settings = SolverSettings::new(scheme).with_tol(config.tol);
            if let Some(k) = config.max_iters {
                settings = settings.with_max_iters(k);
            }
            propagate(model, psi0, 0.0, config.params.t_final, config.dt, config.points, &settings, &config.backend())?
        }
        _ => {
            let stride = ((config.checkpoint / config.dt).round() as usize).max(1);
            reference_propagate(&reference_method(config), model, psi0, 0.0, config.params.t_final, config.dt, stride)?
        }
    };
    Ok(run)
}

fn reference_method(config: &RunConfig) -> ReferenceMethod {
    match config.solver {
        SolverKind::Sil => ReferenceMethod::ShortIterativeLanczos(config.lanczos),
        SolverKind::ChebyshevProp => ReferenceMethod::ChebyshevPropagator(config.chebyshev),
        _ => ReferenceMethod::Rk4,
    }
}

fn row_expm(config: &RunConfig) -> Option<ExpmKind> {
    match config.solver {
        SolverKind::Itvolt(_) => Some(config.expm),
        SolverKind::Sil => Some(ExpmKind::Lanczos),
        SolverKind::ChebyshevProp => Some(ExpmKind::Chebyshev),
        SolverKind::Rk4 => None,
    }
}

fn base_row(config: &RunConfig) -> ResultRow {
    let itvolt = matches!(config.solver, SolverKind::Itvolt(_));
    ResultRow {
        model: config.params.model,
        solver: config.solver,
        expm: row_expm(config),
        e0: config.params.e0,
        t_final: config.params.t_final,
        omega0: config.params.omega0,
        states: config.params.order(),
        dt: config.dt,
        points: itvolt.then_some(config.points),
        tol: config.tol,
        max_iters: config.max_iters,
        eps_sol: f64::INFINITY,
        eps_states: Vec::new(),
        eps_norm: f64::INFINITY,
        k_max: 0,
        rho_max: None,
        wall_time_seconds: 0.0,
        status: RowStatus::Failed,
        repeats: config.repeats,
    }
}

/// Runs `config` `repeats` times and reports the metrics of the last run
/// with the mean wall time.
pub fn run(config: &RunConfig) -> Result<(ResultRow, Propagation)> {
    let (model, bench, psi0) = build(&config.params)?;
    let mut total = 0.0;
    let mut last = None;
    for _ in 0..config.repeats {
        let clock = Instant::now();
        let run = solve_once(config, &model, &psi0)?;
        total += clock.elapsed().as_secs_f64();
        last = Some(run);
    }
    let run = last.context("repeat count must be positive")?;
    let metrics = bench.compute_metrics(&run)?;
    let mut row = base_row(config);
    row.eps_sol = metrics.eps_sol;
    row.eps_states = metrics.eps_sol_states;
    row.eps_norm = metrics.eps_norm;
    row.k_max = metrics.k_max;
    row.wall_time_seconds = total / config.repeats as f64;
    row.status = match run.report.status {
        RunStatus::Converged => RowStatus::Converged,
        RunStatus::MaxIter => RowStatus::MaxIter,
        RunStatus::Diverged => RowStatus::Diverged,
    };
    if config.diagnostics {
        if let SolverKind::Itvolt(_) = config.solver {
            let radii = interval_radii(&model, 0.0, config.params.t_final, config.dt, config.points, NodeKind::GaussLobatto, &config.backend())?;
            row.rho_max = Some(radii.iter().map(|r| r.value).fold(0.0, f64::max));
        }
    }
    Ok((row, run))
}

/// One row per sweep entry. Rows whose solver fails are kept with status
/// `error`; the error is returned alongside for reporting.
pub fn table(configs: &[RunConfig]) -> Vec<(ResultRow, Option<anyhow::Error>)> {
    configs
        .iter()
        .map(|config| match run(config) {
            Ok((row, _)) => (row, None),
            Err(e) => (base_row(config), Some(e)),
        })
        .collect()
}

/// `t, norm, eps, |c_k|^2 ...` at every recorded point.
pub fn write_trajectory<W: Write>(out: W, config: &RunConfig, run: &Propagation) -> Result<()> {
    let (_, bench, _) = build(&config.params)?;
    let tracked = match config.params.model {
        ModelKind::TwoLevel => 2,
        ModelKind::Oscillator => 1,
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "norm".to_string(), "eps".to_string()];
    header.extend((0..tracked).map(|k| format!("population_{k}")));
    w.write_record(&header)?;
    for (&t, psi) in run.times.iter().zip(&run.states) {
        let exact = bench.oracle_populations(t, tracked);
        let populations: Vec<f64> = psi.iter().take(tracked).map(|c| c.norm_sqr()).collect();
        let eps = populations.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mut record = vec![format_float(t), format_float(psi.norm()), format_float(eps)];
        record.extend(populations.into_iter().map(format_float));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn sample_times(t_final: f64, spacing: Option<f64>) -> Vec<f64> {
    let count = match spacing {
        Some(dt) => (t_final / dt).round().max(1.0) as usize,
        None => 1000,
    };
    (0..=count).map(|k| t_final * k as f64 / count as f64).collect()
}

/// `t, E(t)` for the configured model.
pub fn pulse_data<W: Write>(out: W, params: &ModelParams, spacing: Option<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "pulse"])?;
    let pulse: Box<dyn Fn(f64) -> f64> = match params.model {
        ModelKind::TwoLevel => {
            let m = TwoLevelModel::new(params.e0, params.t_final)?;
            Box::new(move |t| m.pulse(t))
        }
        ModelKind::Oscillator => {
            let m = OscillatorModel::new(params.e0, params.t_final, params.omega0, params.states)?;
            Box::new(move |t| m.pulse(t))
        }
    };
    for t in sample_times(params.t_final, spacing) {
        w.write_record([format_float(t), format_float(pulse(t))])?;
    }
    w.flush()?;
    Ok(())
}

/// Two-level field amplitudes plotted when no `e0` is given.
pub const TWO_LEVEL_CURVES: [f64; 2] = [2.0 * PI / 9000.0, 10.0 * PI / 9000.0];

/// Analytic curves: two-level populations, or the oscillator's classical
/// trajectory with its energy moments and ground-state population.
pub fn oracle_data<W: Write>(out: W, params: &ModelParams, amplitudes: &[f64], spacing: Option<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let times = sample_times(params.t_final, spacing);
    match params.model {
        ModelKind::TwoLevel => {
            w.write_record(["e0", "t", "ground", "excited"])?;
            for &e0 in amplitudes {
                let m = TwoLevelModel::new(e0, params.t_final)?;
                for &t in &times {
                    let (g, e) = m.amplitudes(t);
                    w.write_record([format_float(e0), format_float(t), format_float(g.norm_sqr()), format_float(e.norm_sqr())])?;
                }
            }
        }
        ModelKind::Oscillator => {
            w.write_record(["t", "x", "p", "energy", "variance", "ground"])?;
            let m = OscillatorModel::new(params.e0, params.t_final, params.omega0, params.states)?;
            for &t in &times {
                let traj = m.trajectory(t);
                let (variance, _) = energy_variance_check(&traj);
                let ground = population_probabilities(&traj, 0)[0];
                w.write_record([
                    format_float(t),
                    format_float(traj.x),
                    format_float(traj.p),
                    format_float(energy_expectation(&traj)),
                    format_float(variance),
                    format_float(ground),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
