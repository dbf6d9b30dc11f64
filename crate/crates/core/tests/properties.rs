mod common;

use common::{banded, c, expm_dense, matvec, max_diff, solve, to_dense};
use itvolt::bandmat::eigendecompose;
use itvolt::dense::DenseMatrix;
use itvolt::expm::prepare;
use itvolt::krylov::gmres;
use itvolt::propagator::{apply_iteration_operator, jacobi_iteration_matrix, IntervalOperators};
use itvolt::quadrature::{gauss_legendre_rule, lagrange_weight_matrix, NodeSet};
use itvolt::{ChebyshevParams, Complex, ComplexVector, ExpmBackend, HamiltonianModel, LanczosParams, SymBanded};
use proptest::prelude::*;

fn entries(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

fn matrix() -> impl Strategy<Value = SymBanded> {
    (1usize..40, 0usize..4).prop_flat_map(|(d, b)| {
        let b = b.min(d - 1);
        entries((b + 1) * d).prop_map(move |v| {
            let mut it = v.into_iter();
            banded(d, b, || it.next().unwrap())
        })
    })
}

fn vector(d: usize) -> impl Strategy<Value = ComplexVector> {
    entries(2 * d).prop_map(|v| v.chunks(2).map(|p| c(p[0], p[1])).collect())
}

fn matrix_and_vectors() -> impl Strategy<Value = (SymBanded, ComplexVector, ComplexVector)> {
    matrix().prop_flat_map(|m| {
        let d = m.order();
        (Just(m), vector(d), vector(d))
    })
}

fn inner(u: &[Complex], v: &[Complex]) -> Complex {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn backends() -> [ExpmBackend; 3] {
    [
        ExpmBackend::Diagonalization,
        ExpmBackend::Lanczos(LanczosParams {
            tol: 1e-13,
            max_iters: 60,
            reorth_depth: 60,
        }),
        ExpmBackend::Chebyshev(ChebyshevParams::default()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matvec_is_linear_and_symmetric((m, u, v) in matrix_and_vectors(), a in -2.0f64..2.0) {
        let combo: ComplexVector = u.iter().zip(v.iter()).map(|(x, y)| x * a + y).collect();
        let lhs = m.matvec(&combo).unwrap();
        let mu = m.matvec(&u).unwrap();
        let mv = m.matvec(&v).unwrap();
        let rhs: Vec<Complex> = mu.iter().zip(mv.iter()).map(|(x, y)| x * a + y).collect();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
        let sym = inner(&u, &mv) - inner(&mu, &v);
        prop_assert!(sym.norm() < 1e-12);
        prop_assert!(max_diff(&mu, &matvec(&to_dense(&m), &u)) < 1e-12);
    }

    #[test]
    fn trace_and_extent_bracket_the_spectrum(m in matrix()) {
        let eig = eigendecompose(&m).unwrap();
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - m.trace()).abs() < 1e-11 * (1.0 + m.order() as f64));
        let (lo, hi) = m.eigen_extent();
        for &l in &eig.values {
            prop_assert!(l >= lo - 1e-12 && l <= hi + 1e-12);
        }
    }

    #[test]
    fn weights_integrate_polynomials(n in 2usize..20, a in -3.0f64..3.0, len in 0.1f64..4.0, coeffs in entries(20)) {
        let nodes = NodeSet::gauss_lobatto(n, a, a + len).unwrap();
        let w = lagrange_weight_matrix(&nodes, n).unwrap();
        let poly = |s: f64| coeffs[..n].iter().rev().fold(0.0, |acc, k| acc * (s - a) / len + k);
        let antiderivative = |s: f64| {
            let x = (s - a) / len;
            coeffs[..n].iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>() * len
        };
        for (i, &t) in nodes.nodes().iter().enumerate() {
            let approx: f64 = nodes.nodes().iter().enumerate().map(|(k, &s)| w.get(i, k) * poly(s)).sum();
            prop_assert!((approx - antiderivative(t)).abs() < 1e-12 * len * (1.0 + coeffs.iter().map(|x| x.abs()).sum::<f64>()));
        }
    }

    #[test]
    fn gauss_legendre_is_exact(order in 1usize..30, a in -2.0f64..2.0, len in 0.1f64..3.0, k in 0usize..60) {
        prop_assume!(k < 2 * order);
        let (x, w) = gauss_legendre_rule(order, a, a + len).unwrap();
        let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * ((x - a) / len).powi(k as i32)).sum();
        prop_assert!((approx - len / (k + 1) as f64).abs() < 1e-13 * len);
    }

    #[test]
    fn exponential_is_unitary_with_group_law((m, v, _) in matrix_and_vectors(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let scale = v.norm();
        for backend in backends() {
            let p = prepare(m.clone(), &backend).unwrap();
            let u = p.apply(t, &v).unwrap();
            prop_assert!((u.norm() - scale).abs() < 1e-11 * scale);
            let composed = p.apply(s, &u).unwrap();
            prop_assert!(composed.distance(&p.apply(s + t, &v).unwrap()) < 1e-10 * scale);
            prop_assert!(p.apply(-t, &u).unwrap().distance(&v) < 1e-10 * scale);
            prop_assert!(max_diff(&u, &matvec(&expm_dense(&m, t), &v)) < 1e-10 * scale);
        }
    }

    #[test]
    fn eigenvectors_pick_up_a_phase(m in matrix(), t in -3.0f64..3.0) {
        let eig = eigendecompose(&m).unwrap();
        let d = m.order();
        let k = d / 2;
        let q: ComplexVector = (0..d).map(|i| c(eig.vectors[i * d + k], 0.0)).collect();
        let phase = Complex::from_polar(1.0, -eig.values[k] * t);
        for backend in backends() {
            let out = prepare(m.clone(), &backend).unwrap().apply(t, &q).unwrap();
            let expected: Vec<Complex> = q.iter().map(|z| z * phase).collect();
            prop_assert!(max_diff(&out, &expected) < 1e-10);
        }
    }

    #[test]
    fn gmres_matches_direct_solve(n in 2usize..24, seed in entries(2 * 24 * 24 + 48)) {
        let mut it = seed.into_iter();
        let mut a = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let z = c(0.3 * it.next().unwrap(), 0.3 * it.next().unwrap()) / (n as f64).sqrt();
                a.set(i, j, a.get(i, j) + z);
            }
        }
        let b: Vec<Complex> = (0..n).map(|_| c(it.next().unwrap(), it.next().unwrap())).collect();
        prop_assume!(b.iter().any(|z| z.norm() > 1e-3));
        let out = gmres(|x, o| { o.copy_from_slice(&a.matvec(x)?); Ok(()) }, &b, 1e-14, n).unwrap();
        let rows: Vec<Vec<Complex>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let direct = solve(rows, b.clone());
        prop_assert!(max_diff(&out.x, &direct) < 1e-10);
        prop_assert!(out.iterations <= n);
        prop_assert!(out.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn matrix_free_operator_matches_assembled(d in 1usize..5, n in 2usize..8, len in 0.1f64..2.0, amp in 0.1f64..3.0, v in entries(200)) {
        let mut it = v.into_iter();
        let h0 = banded(d, d.min(2) - 1, || it.next().unwrap());
        let w = banded(d, d.min(2) - 1, || it.next().unwrap());
        let model = HamiltonianModel::new(h0, w, move |t: f64| amp * (2.1 * t).cos()).unwrap();
        let nodes = NodeSet::gauss_lobatto(n, 0.3, 0.3 + len).unwrap();
        let weights = lagrange_weight_matrix(&nodes, n).unwrap();
        let ops = IntervalOperators::new(&model, nodes, &ExpmBackend::Diagonalization).unwrap();
        let a = jacobi_iteration_matrix(&ops, &weights).unwrap();
        let x: Vec<Complex> = (0..d * (n - 1)).map(|_| c(it.next().unwrap(), it.next().unwrap())).collect();
        let mut out = vec![c(0.0, 0.0); x.len()];
        apply_iteration_operator(&ops, &weights, &x, &mut out).unwrap();
        prop_assert!(max_diff(&out, &a.matvec(&x).unwrap()) < 1e-12);
    }
}
