//! Gauss rules, Lobatto nodes, barycentric interpolation and the
//! semi-global Lagrange weight matrix `w[i][k] = ∫_a^{t_i} l_k(t) dt`.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::Complex;

const NEWTON_MAX_STEPS: usize = 100;
const LOBATTO_POLISH_STEPS: usize = 5;

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n-1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p_prev - x * p) / (1.0 - x * x)
    };
    (p, dp)
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument("interval must satisfy a < b"));
    }
    Ok(())
}

/// Gauss-Legendre nodes on `[-1, 1]`, ascending and exactly antisymmetric.
fn gauss_legendre_reference(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre order must be >= 1"));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_STEPS {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence("Gauss-Legendre Newton iteration"));
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th root from the right.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok((nodes, weights))
}

/// Gauss-Legendre rule of the given order mapped to `[a, b]`.
pub fn gauss_legendre_rule(order: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_interval(a, b)?;
    let (x, w) = gauss_legendre_reference(order)?;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Ok((
        x.iter().map(|&x| mid + half * x).collect(),
        w.iter().map(|&w| half * w).collect(),
    ))
}

/// Interior Lobatto nodes (roots of `P'_{n-1}`) on `[-1, 1]`, ascending.
fn lobatto_reference(n: usize) -> Result<Vec<f64>> {
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    if n == 2 {
        return Ok(nodes);
    }
    let k = n - 1;
    let kf = k as f64;
    // Roots of P'_k interlace the roots of P_k.
    let (brackets, _) = gauss_legendre_reference(k)?;
    for i in 0..(n - 2).div_ceil(2) {
        let (mut lo, mut hi) = (brackets[i], brackets[i + 1]);
        let mut f_lo = legendre(k, lo).1;
        if f_lo == 0.0 {
            hi = lo;
        }
        for _ in 0..200 {
            if hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let f_mid = legendre(k, mid).1;
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (f_mid > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..LOBATTO_POLISH_STEPS {
            let (p, dp) = legendre(k, x);
            // (1 - x²) P'' = 2x P' - k(k+1) P
            let ddp = (2.0 * x * dp - kf * (kf + 1.0) * p) / (1.0 - x * x);
            if ddp == 0.0 {
                break;
            }
            let step = dp / ddp;
            if !step.is_finite() || step.abs() > hi - lo + 1e-12 {
                break;
            }
            x -= step;
        }
        if !x.is_finite() || x <= -1.0 || x >= 1.0 {
            return Err(Error::NoConvergence("Gauss-Lobatto root finder"));
        }
        nodes[1 + i] = x;
        nodes[n - 2 - i] = -x;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(nodes)
}

/// Which family of interpolation nodes a [`NodeSet`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeKind {
    #[default]
    GaussLobatto,
    /// Equally spaced nodes, subject to Runge's phenomenon for large `n`.
    Equispaced,
}

/// Interpolation nodes on `[a, b]` with their barycentric weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    kind: NodeKind,
    a: f64,
    b: f64,
    reference: Vec<f64>,
    nodes: Vec<f64>,
    barycentric: Vec<f64>,
}

impl NodeSet {
    pub fn gauss_lobatto(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(NodeKind::GaussLobatto, n, a, b)
    }

    pub fn equispaced(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(NodeKind::Equispaced, n, a, b)
    }

    pub fn new(kind: NodeKind, n: usize, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two nodes"));
        }
        let reference = match kind {
            NodeKind::GaussLobatto => lobatto_reference(n)?,
            NodeKind::Equispaced => {
                let mut r: Vec<f64> = (0..n)
                    .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
                    .collect();
                for i in 0..n / 2 {
                    r[n - 1 - i] = -r[i];
                }
                if n % 2 == 1 {
                    r[n / 2] = 0.0;
                }
                r
            }
        };
        // Weights on the reference nodes; the affine map only rescales them
        // by a common factor, which cancels in the second barycentric form.
        let barycentric = (0..n)
            .map(|k| {
                let prod: f64 = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| reference[k] - reference[j])
                    .product();
                1.0 / prod
            })
            .collect();
        let mut set = Self {
            kind,
            a,
            b,
            reference,
            nodes: Vec::new(),
            barycentric,
        };
        set.nodes = set.map_reference(a, b);
        Ok(set)
    }

    fn map_reference(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.reference.len();
        let half = 0.5 * (b - a);
        let mid = a + half;
        let mut nodes: Vec<f64> = self.reference.iter().map(|&x| mid + half * x).collect();
        nodes[0] = a;
        nodes[n - 1] = b;
        nodes
    }

    /// The same node pattern shifted to start at `a`.
    pub fn translated(&self, a: f64) -> Self {
        let b = a + (self.b - self.a);
        let mut out = self.clone();
        out.a = a;
        out.b = b;
        out.nodes = self.map_reference(a, b);
        out
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Nodes on `[-1, 1]`.
    pub fn reference_nodes(&self) -> &[f64] {
        &self.reference
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.barycentric
    }

    /// All Lagrange basis values `l_k(x)` at a reference coordinate.
    fn basis_at_reference(&self, x: f64, out: &mut [f64]) {
        if let Some(k) = self.reference.iter().position(|&r| r == x) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[k] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for ((o, &r), &lam) in out.iter_mut().zip(&self.reference).zip(&self.barycentric) {
            *o = lam / (x - r);
            denom += *o;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }
}

/// Gauss-Lobatto nodes on `[a, b]`.
pub fn gauss_lobatto_nodes(n: usize, a: f64, b: f64) -> Result<NodeSet> {
    NodeSet::gauss_lobatto(n, a, b)
}

/// Second-form barycentric interpolation of node values at `t`.
pub fn barycentric_eval(nodes: &NodeSet, values: &[Complex], t: f64) -> Complex {
    debug_assert_eq!(values.len(), nodes.len());
    if let Some(k) = nodes.nodes.iter().position(|&x| x == t) {
        return values[k];
    }
    let mut num = Complex::new(0.0, 0.0);
    let mut den = 0.0;
    for ((&x, &lam), v) in nodes.nodes.iter().zip(&nodes.barycentric).zip(values) {
        let c = lam / (t - x);
        num += v * c;
        den += c;
    }
    num / den
}

/// `n x n` semi-global quadrature weights, row `i` integrating over
/// `[a, t_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<f64>,
}

impl WeightMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.w[i * self.n + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }
}

/// `w[i][k] = ∫_a^{t_i} l_k`, integrated with a Gauss-Legendre rule of
/// `quad_order` points on each `[a, t_i]`.
pub fn lagrange_weight_matrix(nodes: &NodeSet, quad_order: usize) -> Result<WeightMatrix> {
    let n = nodes.len();
    if 2 * quad_order < n {
        return Err(Error::InvalidArgument(
            "quadrature order too low for the Lagrange basis degree",
        ));
    }
    let (gx, gw) = gauss_legendre_reference(quad_order)?;
    let scale = 0.5 * (nodes.b - nodes.a);
    let mut w = vec![0.0; n * n];
    let mut basis = vec![0.0; n];
    for i in 1..n {
        let upper = nodes.reference[i];
        let mid = 0.5 * (upper - 1.0);
        let half = 0.5 * (upper + 1.0);
        let row = &mut w[i * n..(i + 1) * n];
        for (&x, &wt) in gx.iter().zip(&gw) {
            nodes.basis_at_reference(mid + half * x, &mut basis);
            for (r, l) in row.iter_mut().zip(&basis) {
                *r += half * wt * l;
            }
        }
        row.iter_mut().for_each(|r| *r *= scale);
    }
    Ok(WeightMatrix { n, w })
}
