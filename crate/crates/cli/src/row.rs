//! CSV result rows.

use std::io::{Read, Write};

use thiserror::Error;

use crate::config::{ExpmKind, ModelKind, SolverKind};

pub const HEADER: [&str; 19] = [
    "model",
    "solver",
    "expm",
    "e0",
    "t_final",
    "omega0",
    "states",
    "dt",
    "points",
    "tol",
    "max_iters",
    "eps_sol",
    "eps_states",
    "eps_norm",
    "k_max",
    "rho_max",
    "wall_time_seconds",
    "status",
    "repeats",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Converged,
    MaxIter,
    Diverged,
    /// The solver returned an error; metrics are `INF`.
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIter => "max-iter",
            Self::Diverged => "diverged",
            Self::Failed => "error",
        }
    }
}

impl std::str::FromStr for RowStatus {
    type Err = RowError;

    fn from_str(s: &str) -> Result<Self, RowError> {
        Ok(match s {
            "converged" => Self::Converged,
            "max-iter" => Self::MaxIter,
            "diverged" => Self::Diverged,
            "error" => Self::Failed,
            _ => return Err(RowError::Field { column: "status", value: s.into() }),
        })
    }
}

#[derive(Debug, Error)]
pub enum RowError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header does not match the result schema")]
    Header,
    #[error("column {column}: cannot parse `{value}`")]
    Field { column: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub model: ModelKind,
    pub solver: SolverKind,
    pub expm: Option<ExpmKind>,
    pub e0: f64,
    pub t_final: f64,
    pub omega0: f64,
    pub states: usize,
    pub dt: f64,
    pub points: Option<usize>,
    pub tol: f64,
    pub max_iters: Option<usize>,
    pub eps_sol: f64,
    /// Per-state worst-case errors: ground and excited for the two-level
    /// model, ground only for the oscillator.
    pub eps_states: Vec<f64>,
    pub eps_norm: f64,
    pub k_max: usize,
    pub rho_max: Option<f64>,
    pub wall_time_seconds: f64,
    pub status: RowStatus,
    pub repeats: usize,
}

pub fn format_float(x: f64) -> String {
    if x.is_infinite() && x > 0.0 {
        "INF".into()
    } else if x.is_infinite() {
        "-INF".into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_float(column: &'static str, s: &str) -> Result<f64, RowError> {
    match s {
        "INF" => Ok(f64::INFINITY),
        "-INF" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| RowError::Field { column, value: s.into() }),
    }
}

fn parse<T: std::str::FromStr>(column: &'static str, s: &str) -> Result<T, RowError> {
    s.parse().map_err(|_| RowError::Field { column, value: s.into() })
}

fn optional<T>(s: &str, f: impl FnOnce(&str) -> Result<T, RowError>) -> Result<Option<T>, RowError> {
    if s.is_empty() {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

impl ResultRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.model.to_string(),
            self.solver.to_string(),
            self.expm.map(|e| e.to_string()).unwrap_or_default(),
            format_float(self.e0),
            format_float(self.t_final),
            format_float(self.omega0),
            self.states.to_string(),
            format_float(self.dt),
            self.points.map(|n| n.to_string()).unwrap_or_default(),
            format_float(self.tol),
            self.max_iters.map(|n| n.to_string()).unwrap_or_default(),
            format_float(self.eps_sol),
            self.eps_states.iter().map(|&e| format_float(e)).collect::<Vec<_>>().join(";"),
            format_float(self.eps_norm),
            self.k_max.to_string(),
            self.rho_max.map(format_float).unwrap_or_default(),
            format_float(self.wall_time_seconds),
            self.status.as_str().to_string(),
            self.repeats.to_string(),
        ]
    }

    pub fn from_record(record: &csv::StringRecord) -> Result<Self, RowError> {
        if record.len() != HEADER.len() {
            return Err(RowError::Header);
        }
        let f = |i: usize| &record[i];
        let model = f(0).parse().map_err(|_| RowError::Field { column: "model", value: f(0).into() })?;
        let solver = f(1).parse().map_err(|_| RowError::Field { column: "solver", value: f(1).into() })?;
        let expm = optional(f(2), |s| {
            s.parse().map_err(|_| RowError::Field { column: "expm", value: s.into() })
        })?;
        let eps_states = if f(12).is_empty() {
            Vec::new()
        } else {
            f(12).split(';').map(|s| parse_float("eps_states", s)).collect::<Result<_, _>>()?
        };
        Ok(Self {
            model,
            solver,
            expm,
            e0: parse_float("e0", f(3))?,
            t_final: parse_float("t_final", f(4))?,
            omega0: parse_float("omega0", f(5))?,
            states: parse("states", f(6))?,
            dt: parse_float("dt", f(7))?,
            points: optional(f(8), |s| parse("points", s))?,
            tol: parse_float("tol", f(9))?,
            max_iters: optional(f(10), |s| parse("max_iters", s))?,
            eps_sol: parse_float("eps_sol", f(11))?,
            eps_states,
            eps_norm: parse_float("eps_norm", f(13))?,
            k_max: parse("k_max", f(14))?,
            rho_max: optional(f(15), |s| parse_float("rho_max", s))?,
            wall_time_seconds: parse_float("wall_time_seconds", f(16))?,
            status: f(17).parse()?,
            repeats: parse("repeats", f(18))?,
        })
    }
}

/// Writes the header and every row; an empty slice yields the header only.
pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), RowError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record(row.to_record())?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>, RowError> {
    let mut reader = csv::Reader::from_reader(input);
    if reader.headers()?.iter().ne(HEADER.iter().copied()) {
        return Err(RowError::Header);
    }
    reader.records().map(|r| ResultRow::from_record(&r?)).collect()
}
