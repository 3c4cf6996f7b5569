//! Property tests over random trees, parameters and polynomials.

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use treeshift::exactpoly::{charpoly, BiPoly};
use treeshift::gts::{apply_shift, build_hasse, is_cover_shift, shift_sites, HasseDiagram};
use treeshift::matrices::{exp_distance, hermitian_qt_laplacian, q_laplacian, Matrix, Orientation};
use treeshift::spectra::{herm_eigen, jacobi_eigen, sym_eigen, sym_eigen_vectors};
use treeshift::trees::{LabelledTree, TreeCode};

fn tree(min: usize, max: usize) -> impl Strategy<Value = LabelledTree> {
    (min..=max).prop_flat_map(|n| {
        proptest::collection::vec(0..n, n.saturating_sub(2))
            .prop_map(move |seq| match n {
                1 => LabelledTree::single_vertex(),
                _ => LabelledTree::from_prufer(n, &seq).unwrap(),
            })
    })
}

fn tree_and_perm(min: usize, max: usize) -> impl Strategy<Value = (LabelledTree, Vec<usize>)> {
    tree(min, max).prop_flat_map(|t| {
        let n = t.n();
        (Just(t), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

fn nonzero_q() -> impl Strategy<Value = f64> {
    prop_oneof![-12.0..-0.05f64, 0.05..12.0f64]
}

fn bipoly() -> impl Strategy<Value = BiPoly> {
    proptest::collection::vec((0u32..4, 0u32..4, -9i64..10), 0..6).prop_map(|terms| {
        terms
            .into_iter()
            .fold(BiPoly::zero(), |acc, (dq, dx, c)| acc + BiPoly::monomial(dq, dx, BigInt::from(c)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bipoly_ring_axioms(a in bipoly(), b in bipoly(), c in bipoly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &BiPoly::one(), a.clone());
    }

    #[test]
    fn bipoly_exact_division_inverts_product(a in bipoly(), b in bipoly()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn bipoly_evaluation_is_a_ring_map(a in bipoly(), b in bipoly(), q in -3i64..4, x in -3i64..4) {
        let (q, x) = (q as f64, x as f64);
        prop_assert_eq!((&a * &b).eval_f64(q, x), a.eval_f64(q, x) * b.eval_f64(q, x));
        prop_assert_eq!((&a + &b).eval_f64(q, x), a.eval_f64(q, x) + b.eval_f64(q, x));
    }

    #[test]
    fn bipoly_json_round_trip(a in bipoly()) {
        prop_assert_eq!(BiPoly::from_json_terms(&a.to_json_terms()).unwrap(), a);
    }

    #[test]
    fn canonical_code_is_relabelling_invariant((t, perm) in tree_and_perm(1, 14)) {
        let r = t.relabel(&perm).unwrap();
        prop_assert_eq!(t.canonical_code(), r.canonical_code());
        let code = t.canonical_code();
        prop_assert_eq!(code.to_tree().canonical_code(), code.clone());
        prop_assert_eq!(code.to_string().parse::<TreeCode>().unwrap(), code);
    }

    #[test]
    fn charpoly_and_spectrum_are_relabelling_invariant((t, perm) in tree_and_perm(2, 7), q in nonzero_q()) {
        let r = t.relabel(&perm).unwrap();
        prop_assert_eq!(charpoly(&t, &[]).unwrap(), charpoly(&r, &[]).unwrap());
        let (a, b) = (sym_eigen(&q_laplacian(&t, q)).unwrap(), sym_eigen(&q_laplacian(&r, q)).unwrap());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn trace_and_determinant_of_q_laplacian(t in tree(2, 12), q in nonzero_q()) {
        let n = t.n() as f64;
        let s = sym_eigen(&q_laplacian(&t, q)).unwrap();
        let trace = n + q * q * (n - 2.0);
        prop_assert!((s.sum() - trace).abs() <= 1e-9 * (1.0 + trace.abs()));
        let scale = s.values.iter().map(|v| v.abs().max(1.0)).product::<f64>();
        prop_assert!((s.product() - (1.0 - q * q)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn cover_shift_adds_exactly_one_leaf(t in tree(4, 12), pick in any::<prop::sample::Index>()) {
        let sites: Vec<_> = shift_sites(&t).into_iter().filter(|s| is_cover_shift(&t, s)).collect();
        prop_assume!(!sites.is_empty());
        let s = &sites[pick.index(sites.len())];
        let up = apply_shift(&t, s).unwrap();
        prop_assert_eq!(up.leaf_count(), t.leaf_count() + 1);
        prop_assert_ne!(up.canonical_code(), t.canonical_code());
    }

    #[test]
    fn shift_from_a_leaf_is_isomorphic(t in tree(3, 12), pick in any::<prop::sample::Index>()) {
        let sites: Vec<_> = shift_sites(&t).into_iter().filter(|s| !is_cover_shift(&t, s)).collect();
        prop_assume!(!sites.is_empty());
        let s = &sites[pick.index(sites.len())];
        prop_assert_eq!(apply_shift(&t, s).unwrap().canonical_code(), t.canonical_code());
    }

    #[test]
    fn largest_and_smallest_move_the_right_way(t in tree(4, 10), pick in any::<prop::sample::Index>(), q in nonzero_q()) {
        let sites: Vec<_> = shift_sites(&t).into_iter().filter(|s| is_cover_shift(&t, s)).collect();
        prop_assume!(!sites.is_empty());
        let up = apply_shift(&t, &sites[pick.index(sites.len())]).unwrap();
        let (a, b) = (sym_eigen(&q_laplacian(&t, q)).unwrap(), sym_eigen(&q_laplacian(&up, q)).unwrap());
        prop_assert!(a.lambda_max() <= b.lambda_max() + 1e-8);
        prop_assert!(a.lambda_min() >= b.lambda_min() - 1e-8);
    }

    #[test]
    fn ql_agrees_with_jacobi_on_q_laplacians(t in tree(1, 12), q in nonzero_q()) {
        let m = q_laplacian(&t, q);
        let dec = sym_eigen_vectors(&m).unwrap();
        let jac = jacobi_eigen(&m).unwrap();
        for (x, y) in dec.values.iter().zip(&jac) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
        prop_assert!(dec.max_residual(&m) <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn hermitian_spectrum_ignores_orientation(t in tree(2, 9), mask in any::<u64>(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let q = Complex64::new(re, im);
        prop_assume!(q.norm() > 1e-3);
        let a = herm_eigen(&hermitian_qt_laplacian(&t, &Orientation::away_from(&t, 0), q)).unwrap();
        let b = herm_eigen(&hermitian_qt_laplacian(&t, &Orientation::from_mask(&t, mask), q)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn exp_distance_inverts_q_laplacian(t in tree(2, 9), q in -0.95..0.95f64) {
        prop_assume!(q.abs() > 0.05);
        let n = t.n();
        let product = exp_distance(&t, q).as_matrix().matmul(q_laplacian(&t, q).as_matrix());
        let target = Matrix::identity(n).scale(1.0 - q * q);
        prop_assert!(product.max_abs_diff(&target) <= 1e-12 * n as f64);
    }
}

#[test]
fn poset_json_round_trips() {
    for n in 3..=8 {
        let h = build_hasse(n).unwrap();
        let back = HasseDiagram::from_json(&h.to_json()).unwrap();
        assert_eq!(back.nodes, h.nodes);
        assert_eq!(back.cover_pairs(), h.cover_pairs());
    }
}
