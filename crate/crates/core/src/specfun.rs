//! Bessel functions of the first kind for integer order.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Below this argument only the leading series term is kept.
const SMALL_ARGUMENT: f64 = 1e-8;
const RESCALE_ABOVE: f64 = 1e250;

/// `J_0(x) ..= J_N(x)` for one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    pub x: f64,
    pub values: Vec<f64>,
}

impl BesselTable {
    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

/// `J_n(x)` for `n = 0..=max_order` by Miller's backward recurrence,
/// normalized with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_jn_table(x: f64, max_order: usize) -> Result<BesselTable> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::BadBesselArgument(x));
    }
    let mut values = vec![0.0; max_order + 1];
    if x < SMALL_ARGUMENT {
        // J_n(x) ≈ (x/2)^n / n!
        let half = 0.5 * x;
        let mut term = 1.0;
        values[0] = 1.0 - half * half;
        for (n, v) in values.iter_mut().enumerate().skip(1) {
            term *= half / n as f64;
            *v = term;
        }
        return Ok(BesselTable { x, values });
    }

    let mut start = max_order.max(x.ceil() as usize) + 15 + (10.0 * x.ln_1p()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut seq = vec![0.0; start + 2];
    seq[start] = 1e-30;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        seq[k - 1] = k as f64 * two_over_x * seq[k] - seq[k + 1];
        if seq[k - 1].abs() > RESCALE_ABOVE {
            for s in seq[k - 1..].iter_mut() {
                *s /= RESCALE_ABOVE;
            }
        }
    }
    let mut norm = seq[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * seq[k];
    }
    for (v, s) in values.iter_mut().zip(&seq) {
        *v = s / norm;
    }
    Ok(BesselTable { x, values })
}
