use nrlgt_core::spectral::*;
use nrlgt_core::{Graph, SpectralError};
use nrlgt_core::oracle::lcc_size;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn complete(n: usize) -> Graph {
    Graph::from_pairs(n, false, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
}

/// Eigenvalues from the characteristic polynomial: Faddeev-LeVerrier
/// coefficients, then the companion matrix's eigenvalues.
fn charpoly_eigs(m: &DenseMatrix) -> Vec<f64> {
    use nalgebra::DMatrix;
    let n = m.rows();
    let a = DMatrix::from_fn(n, n, |r, c| m.get(r, c));
    let mut coeffs = vec![1.0];
    let mut mk = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        mk = &a * &mk + DMatrix::identity(n, n) * coeffs[k - 1];
        let ck = -(&a * &mk).trace() / k as f64;
        coeffs.push(ck);
    }
    // companion of x^n + c1 x^{n-1} + ... + cn
    let comp = DMatrix::from_fn(n, n, |r, c| {
        if r == 0 {
            -coeffs[c + 1]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = comp.complex_eigenvalues().iter().map(|z| z.re).collect();
    roots.sort_by(|x, y| y.total_cmp(x));
    roots
}

#[test]
fn two_by_two_swap() {
    let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let s = sym_eigs(&m).unwrap();
    assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
    assert!((s.eigenvalues[1] + 1.0).abs() < 1e-12);
}

#[test]
fn complete_graph_adjacency_spectrum() {
    for n in 2..9 {
        let s = sym_eigs(&symmetric_adjacency(&complete(n))).unwrap();
        assert!((s.eigenvalues[0] - (n - 1) as f64).abs() < 1e-9);
        assert!(s.eigenvalues[1..].iter().all(|l| (l + 1.0).abs() < 1e-9));
    }
}

#[test]
fn random_symmetric_matches_characteristic_polynomial() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = 6;
        let mut m = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let v = rng.random_range(-1.0..1.0);
                m.set(r, c, v);
                m.set(c, r, v);
            }
        }
        let fast = sym_eigs(&m).unwrap().eigenvalues;
        let slow = charpoly_eigs(&m);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-7, "{fast:?} vs {slow:?}");
        }
    }
}

#[test]
fn rejects_asymmetric_input() {
    let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]);
    assert!(matches!(sym_eigs(&m), Err(SpectralError::Asymmetric { .. })));
    assert!(matches!(sym_eigs(&DenseMatrix::zeros(2, 3)), Err(SpectralError::NotSquare(2, 3))));
}

#[test]
fn diagonal_input_is_returned_exactly() {
    let values = [3.5, -1.25, 0.0, 7.0, 2.0];
    let s = sym_eigs(&DenseMatrix::diagonal(&values)).unwrap();
    let mut expect = values.to_vec();
    expect.sort_by(|x, y| y.total_cmp(x));
    for (a, b) in s.eigenvalues.iter().zip(&expect) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn rank_cases() {
    assert_eq!(matrix_rank(&DenseMatrix::identity(5), 1e-12), 5);
    assert_eq!(matrix_rank(&DenseMatrix::zeros(5, 5), 1e-12), 0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let mut rows: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..5).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    rows[3] = rows[1].clone();
    assert_eq!(matrix_rank(&DenseMatrix::from_rows(&rows), 1e-9), 4);
    let wide = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
    assert_eq!(matrix_rank(&wide, 1e-12), 1);
}

#[test]
fn measures_on_known_graphs() {
    for n in 3..8 {
        let m = spectral_measures(&complete(n));
        assert!((m.sr - (n - 1) as f64).abs() < 1e-8);
        assert!((m.ac - n as f64).abs() < 1e-8);
        assert!((m.sg - n as f64).abs() < 1e-8);
    }
    let star = Graph::from_pairs(5, false, (1..5).map(|i| (0, i))).unwrap();
    assert!((spectral_measures(&star).sr - 2.0).abs() < 1e-10);

    let split = Graph::from_pairs(6, false, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
    assert_eq!(spectral_measures(&split).ac, 0.0);
    assert_eq!(spectral_measures(&Graph::new(4, false)).nc, 0.0);
}

#[test]
fn directed_inputs_are_symmetrized() {
    let d = Graph::from_pairs(3, true, [(0, 1), (1, 0), (1, 2)]).unwrap();
    let u = Graph::from_pairs(3, false, [(0, 1), (1, 2)]).unwrap();
    assert_eq!(spectral_measures(&d), spectral_measures(&u));
}

fn arb_undirected() -> impl Strategy<Value = Graph> {
    (2usize..=20, proptest::collection::vec((0usize..20, 0usize..20), 0..40)).prop_map(|(n, pairs)| {
        let mut g = Graph::new(n, false);
        for (u, v) in pairs {
            if u < n && v < n {
                let _ = g.add_edge(u, v, 1.0);
            }
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_sums_to_trace(g in arb_undirected(), shift in -3.0f64..3.0) {
        let mut a = symmetric_adjacency(&g);
        for i in 0..a.rows() {
            a.set(i, i, shift * i as f64);
        }
        let s = sym_eigs(&a).unwrap();
        let sum: f64 = s.eigenvalues.iter().sum();
        prop_assert!((sum - a.trace()).abs() <= 1e-8 * a.rows() as f64);
    }

    #[test]
    fn algebraic_connectivity_detects_disconnection(g in arb_undirected()) {
        let ac = spectral_measures(&g).ac;
        let connected = lcc_size(&g) == g.n();
        prop_assert_eq!(ac > 0.0, connected, "ac = {}", ac);
    }

    #[test]
    fn adding_an_edge_never_lowers_spectral_radius(g in arb_undirected(), u in 0usize..20, v in 0usize..20) {
        let n = g.n();
        let (u, v) = (u % n, v % n);
        prop_assume!(u != v && !g.has_edge(u, v));
        let before = spectral_measures(&g).sr;
        let mut h = g.clone();
        h.add_edge(u, v, 1.0).unwrap();
        prop_assert!(spectral_measures(&h).sr >= before - 1e-9);
    }
}
