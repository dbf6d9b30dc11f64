//! Iterative Volterra propagation for the time-dependent Schrödinger equation.
//!
//! The TDSE `i ψ' = H(t) ψ` with `H(t) = H0 + f(t) W` is split on each
//! interval `[τ_j, τ_{j+1}]` around the midpoint Hamiltonian `H_j`, rewritten
//! as a Volterra integral equation, and discretized with a semi-global
//! Lagrange quadrature on Gauss-Lobatto nodes. The resulting linear system is
//! solved per interval by Jacobi, Gauss-Seidel or GMRES iterations.
//!
//! Module map:
//!
//! - [`bandmat`]: real symmetric banded matrices, complex vectors, banded
//!   shifted solves and small dense eigendecompositions.
//! - [`specfun`]: Bessel functions of the first kind.
//! - [`quadrature`]: Gauss-Legendre/Gauss-Lobatto rules and the Lagrange
//!   weight matrix.
//! - [`expm`]: strategies for `e^{-iHΔt} v`.
//! - [`propagator`]: the interval iterations, GMRES and spectral diagnostics.
//! - [`refsolvers`]: short-time (SIL, Chebyshev) and RK4 reference solvers.
//! - [`models`]: the driven two-level atom and driven harmonic oscillator with
//!   their analytic oracles and error metrics.
//!
//! The crate is `no_std` compatible (it needs `alloc`); build with
//! `--no-default-features --features libm` for targets without `std`.
#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("either the `std` or the `libm` feature must be enabled");

extern crate alloc;

pub mod bandmat;
pub mod dense;
pub mod error;
pub mod expm;
pub mod krylov;
pub mod models;
pub mod propagator;
pub mod quadrature;
pub mod refsolvers;
pub mod specfun;

pub use bandmat::{ComplexVector, EigenDecomposition, SymBanded};
pub use error::{Error, Result};
pub use expm::{ChebyshevParams, ExpmBackend, LanczosParams, PreparedExponential};
pub use models::{Benchmark, ErrorMetrics, OscillatorModel, TwoLevelModel};
pub use propagator::{
    propagate, HamiltonianModel, Propagation, PropagationReport, Propagator, RunStatus, Scheme,
    SolverSettings,
};
pub use quadrature::{NodeSet, WeightMatrix};
pub use refsolvers::{reference_propagate, ReferenceMethod};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
