mod common;

use common::{banded, c, expm_dense, matvec, max_diff, solve, to_dense, Dense};
use itvolt::dense::DenseMatrix;
use itvolt::models::Benchmark;
use itvolt::propagator::{
    converge_interval, gershgorin_bound, gs_spectral_radius, inhomogeneous_term, interval_radii,
    jacobi_iteration_matrix, jacobi_step, spectral_radius, volterra_rhs, IntervalOperators,
};
use itvolt::quadrature::{lagrange_weight_matrix, NodeKind, NodeSet};
use itvolt::{
    propagate, Complex, ComplexVector, ExpmBackend, HamiltonianModel, RunStatus, Scheme,
    SolverSettings, SymBanded, TwoLevelModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCHEMES: [Scheme; 3] = [Scheme::Jacobi, Scheme::GaussSeidel, Scheme::Gmres];

fn pulse(t: f64) -> f64 {
    0.8 * (1.7 * t).sin() + 0.3
}

fn random_model(seed: u64, d: usize, b: usize) -> HamiltonianModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = banded(d, b, || rng.gen_range(-1.0..1.0));
    let w = banded(d, b, || rng.gen_range(-0.5..0.5));
    HamiltonianModel::new(h0, w, pulse).unwrap()
}

fn random_state(seed: u64, d: usize) -> ComplexVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: ComplexVector = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.norm();
    v.iter().map(|z| z / norm).collect()
}

fn tight(scheme: Scheme) -> SolverSettings {
    SolverSettings::new(scheme).with_tol(1e-14).with_max_iters(200)
}

/// `E(t) V ψ` with `V = (f(s) - f_mid) W`, as a dense block.
fn kernel_block(model: &HamiltonianModel, h_mid: &SymBanded, f_mid: f64, t: f64, s: f64) -> Dense {
    let e = expm_dense(h_mid, t);
    let w = to_dense(&model.coupling);
    common::matmul(&e, &w)
        .into_iter()
        .map(|row| row.into_iter().map(|z| z * (pulse(s) - f_mid)).collect())
        .collect()
}

/// Dense solve of the collocation system for nodes `2..n` given the
/// integration weights `w[p][l]`.
fn dense_interval(model: &HamiltonianModel, psi0: &[Complex], times: &[f64], w: &[Vec<f64>]) -> Vec<Complex> {
    let d = psi0.len();
    let n = times.len();
    let tau = times[0];
    let f_mid = pulse(0.5 * (tau + times[n - 1]));
    let h_mid = model.h0.add_scaled(f_mid, &model.coupling).unwrap();
    let size = d * (n - 1);
    let mut a: Dense = vec![vec![c(0.0, 0.0); size]; size];
    let mut b = vec![c(0.0, 0.0); size];
    for p in 1..n {
        let free = matvec(&expm_dense(&h_mid, times[p] - tau), psi0);
        let first = matvec(&kernel_block(model, &h_mid, f_mid, times[p] - times[0], times[0]), psi0);
        for i in 0..d {
            b[(p - 1) * d + i] = free[i] - c(0.0, w[p][0]) * first[i];
            a[(p - 1) * d + i][(p - 1) * d + i] = c(1.0, 0.0);
        }
        for l in 1..n {
            let k = kernel_block(model, &h_mid, f_mid, times[p] - times[l], times[l]);
            for i in 0..d {
                for j in 0..d {
                    a[(p - 1) * d + i][(l - 1) * d + j] += c(0.0, w[p][l]) * k[i][j];
                }
            }
        }
    }
    solve(a, b)
}

#[test]
fn two_point_rule_is_the_implicit_trapezoid() {
    let model = random_model(1, 3, 1);
    let psi0 = random_state(2, 3);
    let (t0, h) = (0.4, 0.3);
    // (I + i h/2 V(t1)) ψ1 = E(h) (I - i h/2 V(t0)) ψ0
    let expected = dense_interval(&model, &psi0, &[t0, t0 + h], &[vec![0.0, 0.0], vec![h / 2.0, h / 2.0]]);
    for scheme in SCHEMES {
        let run = propagate(&model, &psi0, t0, t0 + h, h, 2, &tight(scheme), &ExpmBackend::Diagonalization).unwrap();
        assert_eq!(run.report.status, RunStatus::Converged, "{scheme:?}");
        assert!(max_diff(run.final_state(), &expected) < 1e-13, "{scheme:?}");
    }
}

#[test]
fn three_point_interval_matches_dense_solve() {
    let model = random_model(3, 4, 2);
    let psi0 = random_state(4, 4);
    let (t0, h) = (1.1, 0.5);
    let times = [t0, t0 + h / 2.0, t0 + h];
    let w = vec![
        vec![0.0, 0.0, 0.0],
        vec![5.0 * h / 24.0, h / 3.0, -h / 24.0],
        vec![h / 6.0, 2.0 * h / 3.0, h / 6.0],
    ];
    let x = dense_interval(&model, &psi0, &times, &w);
    for scheme in SCHEMES {
        let run = propagate(&model, &psi0, t0, t0 + h, h, 3, &tight(scheme), &ExpmBackend::Diagonalization).unwrap();
        assert!(max_diff(run.final_state(), &x[4..]) < 1e-13, "{scheme:?}");
    }
}

#[test]
fn converged_nodes_satisfy_the_discrete_equation() {
    let model = random_model(5, 6, 2);
    let psi0 = random_state(6, 6);
    let nodes = NodeSet::gauss_lobatto(7, 0.0, 0.6).unwrap();
    let weights = lagrange_weight_matrix(&nodes, 7).unwrap();
    let ops = IntervalOperators::new(&model, nodes, &ExpmBackend::Diagonalization).unwrap();
    let g = inhomogeneous_term(&ops, &psi0).unwrap();
    for scheme in SCHEMES {
        let (iter, report) = converge_interval(&ops, &weights, &psi0, &tight(scheme)).unwrap();
        assert!(report.converged, "{scheme:?}");
        for p in 1..7 {
            let rhs = volterra_rhs(&ops, &weights, &g, &iter, p).unwrap();
            assert!(rhs.distance(&iter.values[p]) < 1e-13, "{scheme:?} node {p}");
        }
    }
}

#[test]
fn schemes_agree_over_many_intervals() {
    let model = random_model(7, 8, 2);
    let psi0 = random_state(8, 8);
    let runs: Vec<_> = SCHEMES
        .iter()
        .map(|&s| propagate(&model, &psi0, 0.0, 5.0, 0.5, 8, &tight(s), &ExpmBackend::Diagonalization).unwrap())
        .collect();
    assert_eq!(runs[0].times.len(), 11);
    for run in &runs[1..] {
        for (a, b) in run.states.iter().zip(&runs[0].states) {
            assert!(a.distance(b) < 1e-12);
        }
    }
    // Each scheme works with every exponential backend.
    for backend in [ExpmBackend::Lanczos(Default::default()), ExpmBackend::Chebyshev(Default::default())] {
        let run = propagate(&model, &psi0, 0.0, 5.0, 0.5, 8, &tight(Scheme::GaussSeidel), &backend).unwrap();
        assert!(run.final_state().distance(runs[0].final_state()) < 1e-10);
    }
}

#[test]
fn infinite_tolerance_stops_after_one_sweep() {
    let model = random_model(9, 4, 1);
    let psi0 = random_state(10, 4);
    let settings = SolverSettings::new(Scheme::Jacobi).with_tol(f64::INFINITY);
    let run = propagate(&model, &psi0, 0.0, 0.8, 0.8, 5, &settings, &ExpmBackend::Diagonalization).unwrap();
    assert_eq!(run.report.k_max, 1);
    let nodes = NodeSet::gauss_lobatto(5, 0.0, 0.8).unwrap();
    let weights = lagrange_weight_matrix(&nodes, 5).unwrap();
    let ops = IntervalOperators::new(&model, nodes, &ExpmBackend::Diagonalization).unwrap();
    let g = inhomogeneous_term(&ops, &psi0).unwrap();
    let once = jacobi_step(&ops, &weights, &g, &g).unwrap();
    assert!(once.last().distance(run.final_state()) < 1e-15);
}

#[test]
fn constant_pulse_needs_a_single_sweep() {
    let h0 = SymBanded::tridiagonal(&[0.5, -0.2, 1.0], &[0.3, 0.1]).unwrap();
    let w = SymBanded::tridiagonal(&[0.0, 0.0, 0.0], &[1.0, 1.0]).unwrap();
    let model = HamiltonianModel::new(h0, w, |_| 0.7).unwrap();
    let psi0 = random_state(11, 3);
    let h = model.at(0.0).unwrap();
    let expected = matvec(&expm_dense(&h, 2.0), &psi0);
    for scheme in [Scheme::Jacobi, Scheme::GaussSeidel] {
        let run = propagate(&model, &psi0, 0.0, 2.0, 0.5, 6, &SolverSettings::new(scheme), &ExpmBackend::Diagonalization).unwrap();
        assert_eq!(run.report.k_max, 1);
        assert!(max_diff(run.final_state(), &expected) < 1e-13);
    }
}

#[test]
fn spectral_radius_predicts_stationary_divergence() {
    let m = TwoLevelModel::new(2.0 * std::f64::consts::PI / 9.0, 9000.0).unwrap();
    let h = m.hamiltonian();
    let bench = Benchmark::TwoLevel(m);
    for (dt, n, stable) in [(100.0, 6, true), (500.0, 24, true), (1000.0, 12, false)] {
        let radii = interval_radii(&h, 0.0, m.t_final, dt, n, NodeKind::GaussLobatto, &ExpmBackend::AnalyticTwoLevel).unwrap();
        let rho = radii.iter().map(|r| r.value).fold(0.0, f64::max);
        assert_eq!(rho < 1.0, stable, "({dt},{n}) rho {rho}");
        let run = propagate(&h, &m.initial_state(), 0.0, m.t_final, dt, n, &SolverSettings::new(Scheme::Jacobi), &ExpmBackend::AnalyticTwoLevel).unwrap();
        assert_eq!(run.report.diverged(), !stable);
        let metrics = bench.compute_metrics(&run).unwrap();
        assert_eq!(metrics.is_infinite(), !stable);
    }
}

#[test]
fn assembled_operator_radius_and_bound() {
    let mut a = DenseMatrix::zeros(2, 2);
    a.set(0, 0, c(0.3, 0.0));
    a.set(1, 1, c(-0.9, 0.0));
    let rho = spectral_radius(&a);
    assert!((rho.value - 0.9).abs() < 1e-6 && rho.converged);
    assert!(spectral_radius(&DenseMatrix::zeros(3, 3)).value == 0.0);

    let model = random_model(12, 2, 1);
    let nodes = NodeSet::gauss_lobatto(3, 0.0, 1.5).unwrap();
    let weights = lagrange_weight_matrix(&nodes, 3).unwrap();
    let ops = IntervalOperators::new(&model, nodes, &ExpmBackend::Diagonalization).unwrap();
    let a = jacobi_iteration_matrix(&ops, &weights).unwrap();
    assert_eq!(a.rows(), 4);
    // Middle node is the midpoint, so its kernel and column block vanish.
    for i in 0..4 {
        for j in 0..2 {
            assert_eq!(a.get(i, j), c(0.0, 0.0));
        }
    }
    let rho = spectral_radius(&a).value;
    assert!(rho <= gershgorin_bound(&a) + 1e-12);
    // Block (2, 2) is the only non-zero diagonal block, and U has nothing
    // feeding it, so the Gauss-Seidel radius is zero.
    let gs = gs_spectral_radius(&a, 2).unwrap();
    assert!(gs.value < 1e-12);

    let zero = HamiltonianModel::new(model.h0.clone(), model.coupling.clone(), |_| 1.0).unwrap();
    let ops = IntervalOperators::new(&zero, NodeSet::gauss_lobatto(4, 0.0, 1.0).unwrap(), &ExpmBackend::Diagonalization).unwrap();
    let weights = lagrange_weight_matrix(&ops.nodes, 4).unwrap();
    assert_eq!(jacobi_iteration_matrix(&ops, &weights).unwrap().max_abs(), 0.0);
}

#[test]
fn invalid_requests_are_rejected() {
    let model = random_model(13, 3, 1);
    let psi0 = random_state(14, 3);
    let settings = SolverSettings::new(Scheme::Gmres);
    let backend = ExpmBackend::Diagonalization;
    assert!(propagate(&model, &psi0, 0.0, 1.0, 0.3, 4, &settings, &backend).is_err());
    assert!(propagate(&model, &psi0, 0.0, 1.0, 0.5, 1, &settings, &backend).is_err());
    assert!(propagate(&model, &psi0[..2], 0.0, 1.0, 0.5, 4, &settings, &backend).is_err());
    assert!(propagate(&model, &psi0, 0.0, 1.0, 0.5, 4, &settings, &ExpmBackend::AnalyticTwoLevel).is_err());
}
