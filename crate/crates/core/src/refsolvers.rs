//! Fixed-step reference solvers: the midpoint short-time exponential
//! (with Lanczos or Chebyshev inner exponentials) and classical RK4.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::bandmat::ComplexVector;
use crate::error::{Error, Result};
use crate::expm::{ChebyshevParams, ExpmBackend, LanczosParams, PreparedExponential};
use crate::propagator::{
    grid_point, interval_count, HamiltonianModel, Propagation, PropagationReport, RunStatus,
    DIVERGENCE_FACTOR,
};
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceMethod {
    /// Short Iterative Lanczos.
    ShortIterativeLanczos(LanczosParams),
    ChebyshevPropagator(ChebyshevParams),
    Rk4,
}

impl ReferenceMethod {
    pub fn sil() -> Self {
        Self::ShortIterativeLanczos(LanczosParams::default())
    }

    pub fn chebyshev() -> Self {
        Self::ChebyshevPropagator(ChebyshevParams::default())
    }

    fn backend(&self) -> Option<ExpmBackend> {
        match *self {
            Self::ShortIterativeLanczos(p) => Some(ExpmBackend::Lanczos(p)),
            Self::ChebyshevPropagator(p) => Some(ExpmBackend::Chebyshev(p)),
            Self::Rk4 => None,
        }
    }
}

/// `e^{-i H((t_a+t_b)/2)(t_b-t_a)} ψ`.
pub fn short_time_step(
    model: &HamiltonianModel,
    psi: &[Complex],
    t_a: f64,
    t_b: f64,
    backend: &ExpmBackend,
) -> Result<ComplexVector> {
    let h = model.at(0.5 * (t_a + t_b))?;
    PreparedExponential::new(h, backend)?.apply(t_b - t_a, psi)
}

/// One classical Runge-Kutta step of `ψ' = -i H(t) ψ`.
pub fn rk4_step(model: &HamiltonianModel, psi: &[Complex], t_a: f64, t_b: f64) -> Result<ComplexVector> {
    let d = model.order();
    if psi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: psi.len(),
        });
    }
    let h = t_b - t_a;
    let mid = t_a + 0.5 * h;
    let mut scratch = ComplexVector::zeros(d);
    let mut rhs = |t: f64, v: &[Complex]| {
        let f = model.pulse_at(t);
        let mut out = ComplexVector::zeros(d);
        model.h0.matvec_into(v, &mut out);
        model.coupling.matvec_into(v, &mut scratch);
        out.axpy(Complex::new(f, 0.0), &scratch);
        out.scale(Complex::new(0.0, -1.0));
        out
    };
    let stage = |base: &[Complex], k: &[Complex], s: f64| -> ComplexVector {
        base.iter().zip(k).map(|(b, k)| b + k * s).collect()
    };
    let k1 = rhs(t_a, psi);
    let k2 = rhs(mid, &stage(psi, &k1, 0.5 * h));
    let k3 = rhs(mid, &stage(psi, &k2, 0.5 * h));
    let k4 = rhs(t_b, &stage(psi, &k3, h));
    Ok((0..d)
        .map(|i| psi[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
        .collect())
}

/// Steps uniformly from `t0` to `t_final`, keeping every
/// `checkpoint_stride`-th state (and always the final one).
///
/// A state whose norm exceeds `1e6 ‖ψ0‖` or turns non-finite stops the run
/// with status `Diverged`.
pub fn reference_propagate(
    method: &ReferenceMethod,
    model: &HamiltonianModel,
    psi0: &[Complex],
    t0: f64,
    t_final: f64,
    dt: f64,
    checkpoint_stride: usize,
) -> Result<Propagation> {
    #[cfg(feature = "std")]
    let clock = std::time::Instant::now();
    if psi0.len() != model.order() {
        return Err(Error::DimensionMismatch {
            expected: model.order(),
            found: psi0.len(),
        });
    }
    if checkpoint_stride == 0 {
        return Err(Error::InvalidArgument("checkpoint stride must be positive"));
    }
    let backend = method.backend();
    if let Some(b) = &backend {
        b.validate(model.order())?;
    }
    let count = interval_count(t0, t_final, dt)?;
    let limit = DIVERGENCE_FACTOR * crate::bandmat::norm_sqr(psi0).sqrt();
    let mut psi = ComplexVector::from(psi0.to_vec());
    let mut times = Vec::with_capacity(count / checkpoint_stride + 2);
    let mut states = Vec::with_capacity(count / checkpoint_stride + 2);
    times.push(t0);
    states.push(psi.clone());
    let mut report = PropagationReport::empty();
    for j in 0..count {
        let a = grid_point(t0, t_final, dt, j, count);
        let b = grid_point(t0, t_final, dt, j + 1, count);
        psi = match &backend {
            Some(be) => short_time_step(model, &psi, a, b, be)?,
            None => rk4_step(model, &psi, a, b)?,
        };
        if !psi.is_finite() || !(psi.norm() <= limit) {
            report.status = RunStatus::Diverged;
            break;
        }
        if (j + 1) % checkpoint_stride == 0 || j + 1 == count {
            times.push(b);
            states.push(psi.clone());
        }
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
