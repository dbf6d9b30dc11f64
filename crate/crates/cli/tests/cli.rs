use std::path::Path;
use std::process::{Command, Output};

use itvolt_cli::commands;
use itvolt_cli::{read_rows, write_rows, ModelKind, RowStatus, Settings, SolverKind};

fn itvolt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itvolt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn settings(text: &str) -> Settings {
    Settings::parse(text).unwrap()
}

#[test]
fn run_prints_one_row() {
    let out = itvolt(&["run", "--solver", "itvolt-jacobi", "--dt", "100", "--points", "3", "--repeats", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.solver.to_string(), "itvolt-jacobi");
    assert!((row.eps_sol - 5.0e-3).abs() < 1e-4, "{}", row.eps_sol);
    assert_eq!(row.k_max, 4);
    assert_eq!(row.eps_states.len(), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let out = itvolt(&["run", "--solver", "leapfrog", "--dt", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver"));
    let out = itvolt(&["run", "--solver", "itvolt-gmres", "--points", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
    let out = itvolt(&["run", "--solver", "rk4", "--dt", "0.1", "--model", "oscillator", "--expm", "analytic"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(itvolt(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    // Ten intervals of 0.3 do not tile [0, 1].
    let out = itvolt(&["run", "--solver", "itvolt-gmres", "--dt", "0.3", "--points", "4", "--t-final", "1", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_sweep_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    std::fs::write(&cfg, "model = two-level\n").unwrap();
    let out = itvolt(&["table", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("model,solver,expm"));
}

#[test]
fn bundled_sweeps_have_the_expected_shape() {
    let table1 = Settings::load(&configs_dir().join("table1.cfg")).unwrap().expand_sweep().unwrap();
    assert_eq!(table1.len(), 27);
    let configs: Vec<_> = table1.iter().map(|s| s.to_config().unwrap()).collect();
    assert_eq!((configs[0].dt, configs[0].points), (100.0, 3));
    assert_eq!(configs[26].solver.to_string(), "itvolt-gmres");
    assert_eq!(configs[26].tol, 1e-13);
    assert_eq!(configs[0].tol, 1e-10);
    for name in ["table2a.cfg", "table2b.cfg", "table2c.cfg"] {
        let rows = Settings::load(&configs_dir().join(name)).unwrap().expand_sweep().unwrap();
        for row in rows {
            let c = row.to_config().unwrap();
            assert_eq!(c.params.model, ModelKind::Oscillator);
            assert_eq!(c.params.states, 400);
        }
    }
    let single = Settings::load(&configs_dir().join("two-level-run.cfg")).unwrap().to_config().unwrap();
    assert_eq!(single.solver, "itvolt-jacobi".parse::<SolverKind>().unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("row.csv");
    let cfg = configs_dir().join("two-level-run.cfg");
    let out = itvolt(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--solver",
        "itvolt-gmres",
        "--repeats",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = read_rows(std::fs::File::open(&out_path).unwrap()).unwrap();
    assert_eq!(rows[0].solver.to_string(), "itvolt-gmres");
    assert_eq!(rows[0].points, Some(3));
}

#[test]
fn rows_round_trip_through_csv() {
    let configs: Vec<_> = settings("solver = itvolt-jacobi, itvolt-gmres\ncells = 100:6, 1000:12\nrepeats = 1\ndiagnostics = true\n")
        .expand_sweep()
        .unwrap()
        .iter()
        .map(|s| s.to_config().unwrap())
        .collect();
    let rows: Vec<_> = commands::table(&configs).into_iter().map(|(r, e)| {
        assert!(e.is_none());
        r
    }).collect();
    let diverged = &rows[2];
    assert_eq!(diverged.status, RowStatus::Diverged);
    assert!(diverged.eps_sol.is_infinite() && diverged.eps_norm.is_infinite());
    let mut buffer = Vec::new();
    write_rows(&mut buffer, &rows).unwrap();
    let text = String::from_utf8(buffer.clone()).unwrap();
    assert!(text.contains(",INF,"));
    assert_eq!(read_rows(buffer.as_slice()).unwrap(), rows);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let config = settings("solver = itvolt-gauss-seidel\ndt = 500\npoints = 12\nrepeats = 2\ndiagnostics = true\n")
        .to_config()
        .unwrap();
    let (a, _) = commands::run(&config).unwrap();
    let (b, _) = commands::run(&config).unwrap();
    assert_eq!(a.eps_sol.to_bits(), b.eps_sol.to_bits());
    assert_eq!(a.eps_norm.to_bits(), b.eps_norm.to_bits());
    assert_eq!(a.k_max, b.k_max);
    assert_eq!(a.rho_max.map(f64::to_bits), b.rho_max.map(f64::to_bits));
}

#[test]
fn reference_solver_row_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let out = itvolt(&[
        "run", "--model", "oscillator", "--states", "40", "--t-final", "10", "--solver", "sil", "--dt", "0.05",
        "--repeats", "1", "--trajectory", traj.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let row = &read_rows(out.stdout.as_slice()).unwrap()[0];
    assert_eq!(row.points, None);
    assert_eq!(row.expm.map(|e| e.to_string()).as_deref(), Some("lanczos"));
    assert!(row.eps_sol < 1e-3 && row.eps_norm < 1e-11);
    let text = std::fs::read_to_string(traj).unwrap();
    assert!(text.starts_with("t,norm,eps,population_0"));
    // Checkpoints every 0.1 from 0 to 10.
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn oracle_and_pulse_data() {
    let out = itvolt(&["oracle-data", "--dt", "900"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 11);
    // The weaker pulse ends in complete inversion.
    let tenth = text.lines().nth(11).unwrap();
    assert!(tenth.ends_with(",1.0000000000000000e0"), "{tenth}");

    let out = itvolt(&["oracle-data", "--model", "oscillator", "--dt", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,x,p,energy,variance,ground"));
    assert_eq!(text.lines().count(), 12);

    let out = itvolt(&["pulse-data", "--model", "oscillator", "--dt", "50"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mid: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(mid[0], "5.0000000000000000e1");
    assert!((mid[1].parse::<f64>().unwrap() - (50.0f64).cos()).abs() < 1e-15);
}
