//! Flat `key = value` run configuration and sweep files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use itvolt::{ChebyshevParams, ExpmBackend, LanczosParams, Scheme};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    TwoLevel,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Itvolt(Scheme),
    Sil,
    ChebyshevProp,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpmKind {
    Analytic,
    Diag,
    Lanczos,
    Chebyshev,
}

macro_rules! named {
    ($ty:ty, $field:literal, { $($name:literal => $value:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = ConfigError;
            fn from_str(s: &str) -> Result<Self, ConfigError> {
                match s {
                    $($name => Ok($value),)+
                    other => Err(invalid($field, format!(
                        "unknown value `{other}` (expected one of: {})",
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $value { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

named!(ModelKind, "model", {
    "two-level" => ModelKind::TwoLevel,
    "oscillator" => ModelKind::Oscillator,
});
named!(SolverKind, "solver", {
    "itvolt-jacobi" => SolverKind::Itvolt(Scheme::Jacobi),
    "itvolt-gauss-seidel" => SolverKind::Itvolt(Scheme::GaussSeidel),
    "itvolt-gmres" => SolverKind::Itvolt(Scheme::Gmres),
    "sil" => SolverKind::Sil,
    "chebyshev-prop" => SolverKind::ChebyshevProp,
    "rk4" => SolverKind::Rk4,
});
named!(ExpmKind, "expm", {
    "analytic" => ExpmKind::Analytic,
    "diag" => ExpmKind::Diag,
    "lanczos" => ExpmKind::Lanczos,
    "chebyshev" => ExpmKind::Chebyshev,
});

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub model: ModelKind,
    pub e0: f64,
    pub t_final: f64,
    pub omega0: f64,
    /// Oscillator basis size.
    pub states: usize,
}

impl ModelParams {
    /// Order of the model Hamiltonian.
    pub fn order(&self) -> usize {
        match self.model {
            ModelKind::TwoLevel => 2,
            ModelKind::Oscillator => self.states,
        }
    }
}

/// Everything needed to reproduce one result row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub solver: SolverKind,
    pub dt: f64,
    pub points: usize,
    pub tol: f64,
    pub max_iters: Option<usize>,
    pub expm: ExpmKind,
    pub lanczos: LanczosParams,
    pub chebyshev: ChebyshevParams,
    /// Spacing of recorded states for the reference solvers.
    pub checkpoint: f64,
    pub diagnostics: bool,
    pub repeats: usize,
    pub out: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
}

pub const KEYS: &[&str] = &[
    "model",
    "e0",
    "t_final",
    "omega0",
    "states",
    "solver",
    "dt",
    "points",
    "tol",
    "max_iters",
    "expm",
    "lanczos_tol",
    "lanczos_max_iters",
    "lanczos_reorth",
    "chebyshev_tol",
    "chebyshev_max_terms",
    "checkpoint",
    "diagnostics",
    "repeats",
    "out",
    "trajectory",
];

/// Keys that a sweep file may give as comma-separated lists.
pub const SWEEP_KEYS: &[&str] = &["solver", "dt", "points", "cells"];

/// Raw settings in file order of precedence: later inserts win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut settings = Self::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: index + 1 })?;
            settings.set(key.trim(), value.trim())?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) && key != "cells" {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) if v.contains(',') => Err(invalid(key, "lists are only allowed in sweeps")),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| invalid(key, format!("cannot parse `{v}`"))),
        }
    }

    /// A strictly positive number under `key`, if present.
    pub fn positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.parsed::<f64>(key)? {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(invalid(key, "must be positive")),
            other => Ok(other),
        }
    }

    fn count(&self, key: &str, min: usize) -> Result<Option<usize>, ConfigError> {
        match self.parsed::<usize>(key)? {
            Some(v) if v < min => Err(invalid(key, format!("must be at least {min}"))),
            other => Ok(other),
        }
    }

    /// Model selection and parameters, defaulting to the benchmark settings.
    pub fn to_params(&self) -> Result<ModelParams, ConfigError> {
        let model = match self.get("model") {
            Some(v) => v.parse()?,
            None => ModelKind::TwoLevel,
        };
        let (e0, t_final) = match model {
            ModelKind::TwoLevel => (2.0 * PI / 9.0, 9000.0),
            ModelKind::Oscillator => (1.0, 100.0),
        };
        Ok(ModelParams {
            model,
            e0: self.positive("e0")?.unwrap_or(e0),
            t_final: self.positive("t_final")?.unwrap_or(t_final),
            omega0: match self.parsed::<f64>("omega0")? {
                Some(w) if !(w >= 0.0 && w.is_finite()) => return Err(invalid("omega0", "must be non-negative")),
                Some(w) => w,
                None => 1.0,
            },
            states: self.count("states", 2)?.unwrap_or(400),
        })
    }

    /// Validated configuration with model- and solver-dependent defaults.
    pub fn to_config(&self) -> Result<RunConfig, ConfigError> {
        let params = self.to_params()?;
        let model = params.model;
        let solver: SolverKind = match self.get("solver") {
            Some(v) => v.parse()?,
            None => return Err(invalid("solver", "required")),
        };
        let expm = match model {
            ModelKind::TwoLevel => ExpmKind::Analytic,
            ModelKind::Oscillator => ExpmKind::Chebyshev,
        };
        let expm = match self.get("expm") {
            Some(v) => v.parse()?,
            None => expm,
        };
        if expm == ExpmKind::Analytic && model != ModelKind::TwoLevel {
            return Err(invalid("expm", "analytic exponentials need the two-level model"));
        }
        let dt = self.positive("dt")?.ok_or_else(|| invalid("dt", "required"))?;
        let points = match solver {
            SolverKind::Itvolt(_) => self.count("points", 2)?.ok_or_else(|| invalid("points", "required"))?,
            _ => self.count("points", 2)?.unwrap_or(2),
        };
        let tol = match (self.parsed::<f64>("tol")?, solver) {
            (Some(t), _) if !(t > 0.0) => return Err(invalid("tol", "must be positive")),
            (Some(t), _) => t,
            (None, SolverKind::Itvolt(s)) => s.default_tol(),
            (None, _) => LanczosParams::default().tol,
        };
        let lanczos_default = LanczosParams::default();
        let lanczos = LanczosParams {
            tol: self.positive("lanczos_tol")?.unwrap_or(lanczos_default.tol),
            max_iters: self.count("lanczos_max_iters", 1)?.unwrap_or(lanczos_default.max_iters),
            reorth_depth: self.count("lanczos_reorth", 0)?.unwrap_or(lanczos_default.reorth_depth),
        };
        let chebyshev_default = ChebyshevParams::default();
        let chebyshev = ChebyshevParams {
            coeff_tol: self.positive("chebyshev_tol")?.unwrap_or(chebyshev_default.coeff_tol),
            max_terms: self.count("chebyshev_max_terms", 1)?.unwrap_or(chebyshev_default.max_terms),
        };
        let diagnostics = match self.get("diagnostics") {
            None => false,
            Some("true" | "1" | "yes") => true,
            Some("false" | "0" | "no") => false,
            Some(v) => return Err(invalid("diagnostics", format!("cannot parse `{v}`"))),
        };
        let config = RunConfig {
            params,
            solver,
            dt,
            points,
            tol,
            max_iters: self.count("max_iters", 1)?,
            expm,
            lanczos,
            chebyshev,
            checkpoint: self.positive("checkpoint")?.unwrap_or(0.1),
            diagnostics,
            repeats: self.count("repeats", 1)?.unwrap_or(5),
            out: self.get("out").map(PathBuf::from),
            trajectory: self.get("trajectory").map(PathBuf::from),
        };
        Ok(config)
    }

    /// Expands list-valued sweep keys into one settings set per row, looping
    /// over `(dt, points)` cells in the outer loop and solvers inside.
    pub fn expand_sweep(&self) -> Result<Vec<Settings>, ConfigError> {
        let list = |key: &str| -> Vec<String> {
            self.get(key)
                .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
                .unwrap_or_default()
        };
        let cells: Vec<(String, Option<String>)> = if self.get("cells").is_some() {
            if self.get("dt").is_some() || self.get("points").is_some() {
                return Err(invalid("cells", "give either cells or dt/points lists"));
            }
            list("cells")
                .into_iter()
                .map(|cell| match cell.split_once(':') {
                    Some((dt, n)) => Ok((dt.trim().to_string(), Some(n.trim().to_string()))),
                    None => Err(invalid("cells", format!("expected dt:points, found `{cell}`"))),
                })
                .collect::<Result<_, _>>()?
        } else {
            let dts = list("dt");
            let points = list("points");
            if points.is_empty() {
                dts.into_iter().map(|dt| (dt, None)).collect()
            } else {
                dts.iter()
                    .flat_map(|dt| points.iter().map(move |n| (dt.clone(), Some(n.clone()))))
                    .collect()
            }
        };
        let solvers = list("solver");
        let mut base = self.clone();
        for key in SWEEP_KEYS {
            base.remove(key);
        }
        let mut rows = Vec::with_capacity(cells.len() * solvers.len());
        for (dt, points) in &cells {
            for solver in &solvers {
                let mut row = base.clone();
                row.set("dt", dt)?;
                if let Some(n) = points {
                    row.set("points", n)?;
                }
                row.set("solver", solver)?;
                rows.push(row);
            }
        }
        Ok(rows)
    }
}

impl RunConfig {
    pub fn backend(&self) -> ExpmBackend {
        match self.expm {
            ExpmKind::Analytic => ExpmBackend::AnalyticTwoLevel,
            ExpmKind::Diag => ExpmBackend::Diagonalization,
            ExpmKind::Lanczos => ExpmBackend::Lanczos(self.lanczos),
            ExpmKind::Chebyshev => ExpmBackend::Chebyshev(self.chebyshev),
        }
    }
}
