use std::sync::Arc;

use nrlgt_diff::tape::ScalarFn;
use nrlgt_diff::{grad_check, Bound, DiffError, ParamId, ParamStore, Tape, Tensor, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
    Tensor::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Store holding tensors named p0, p1, ...
fn store_of(tensors: Vec<Tensor>) -> (ParamStore, Vec<ParamId>) {
    let mut s = ParamStore::new();
    let ids = tensors.into_iter().enumerate().map(|(i, t)| s.add(format!("p{i}"), t)).collect();
    (s, ids)
}

/// Reduces any tensor to a scalar through fixed random weights so every
/// output element carries a distinct gradient.
fn project(tape: &mut Tape, v: Var, seed: u64) -> Result<Var, DiffError> {
    let shape = tape.value(v).shape().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = shape.iter().product();
    let w = Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let w = tape.constant(w);
    let prod = tape.mul(v, w)?;
    tape.sum_all(prod)
}

fn check(tensors: Vec<Tensor>, f: impl Fn(&mut Tape, &[Var]) -> Result<Var, DiffError>) {
    let (store, ids) = store_of(tensors);
    let report = grad_check(
        &store,
        |tape: &mut Tape, b: &Bound| {
            let vars: Vec<Var> = ids.iter().map(|&id| b.var(id)).collect();
            let out = f(tape, &vars)?;
            project(tape, out, 99)
        },
        1e-4,
    )
    .unwrap();
    assert!(report.passed(), "{:?}", report.worst());
}

#[test]
fn spec_examples() {
    let mut tape = Tape::new();
    let s = tape.constant(Tensor::column(vec![0.0, 0.0, 0.0]));
    let y = tape.segment_softmax(s, Arc::from(vec![0, 0, 0]), 1).unwrap();
    for &v in tape.value(y).data() {
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
    let a = tape.constant(Tensor::zeros(4, 2));
    let b = tape.constant(Tensor::zeros(4, 3));
    let c = tape.concat_cols(&[a, b]).unwrap();
    assert_eq!(tape.value(c).shape(), &[4, 5]);

    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::row(vec![1.0, -2.0, 3.5]), true);
    let l = tape.sum_all(x).unwrap();
    assert_eq!(tape.gradients(l).unwrap().get(x).unwrap().data(), &[1.0, 1.0, 1.0]);
    let sq = tape.mul(x, x).unwrap();
    let l2 = tape.sum_all(sq).unwrap();
    assert_eq!(tape.backward(l2).unwrap().get(x).unwrap().data(), &[2.0, -4.0, 7.0]);
}

#[test]
fn loss_contracts() {
    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::row(vec![1.0, 2.0]), true);
    assert!(matches!(tape.gradients(x), Err(DiffError::NonScalarLoss(_))));
    let mut other = Tape::new();
    other.constant(Tensor::scalar(1.0));
    let far = {
        let mut t = Tape::new();
        for _ in 0..5 {
            t.constant(Tensor::scalar(0.0));
        }
        t.constant(Tensor::scalar(0.0))
    };
    assert!(matches!(other.gradients(far), Err(DiffError::NotOnTape(5))));
    let bad = tape.constant(Tensor::zeros(3, 3));
    let err = tape.add(x, bad).unwrap_err();
    assert!(err.to_string().starts_with("add"), "{err}");
}

#[test]
fn unused_and_frozen_parameters() {
    let mut store = ParamStore::new();
    let a = store.add("a", Tensor::row(vec![1.0, 2.0]));
    let unused = store.add("unused", Tensor::zeros(2, 2));
    let frozen = store.add("frozen", Tensor::row(vec![3.0, 4.0]));
    store.set_frozen(frozen, true);
    let mut tape = Tape::new();
    let b = store.bind(&mut tape);
    let p = tape.mul(b.var(a), b.var(frozen)).unwrap();
    let l = tape.sum_all(p).unwrap();
    let grads = b.collect(&tape.backward(l).unwrap(), &store);
    assert_eq!(grads[a.index()].data(), &[3.0, 4.0]);
    assert_eq!(grads[unused.index()], Tensor::zeros(2, 2));
    assert_eq!(grads[frozen.index()].data(), &[0.0, 0.0]);
}

#[test]
fn elementwise_and_linear_ops() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (r, c, k) in [(1, 1, 1), (3, 4, 2), (5, 2, 6)] {
        check(vec![random(&mut rng, r, k), random(&mut rng, k, c)], |t, v| t.matmul(v[0], v[1]));
        check(vec![random(&mut rng, r, c), random(&mut rng, r, c)], |t, v| {
            let s = t.add(v[0], v[1])?;
            let d = t.sub(s, v[1])?;
            let m = t.mul(d, v[1])?;
            t.scale(m, -1.5)
        });
        check(vec![random(&mut rng, r, c), random(&mut rng, 1, c)], |t, v| t.add_row(v[0], v[1]));
        check(vec![random(&mut rng, r, c), random(&mut rng, 1, 1)], |t, v| {
            let m = t.mul_scalar(v[0], v[1])?;
            t.add_const(m, 0.3)
        });
        check(vec![random(&mut rng, r, c)], |t, v| t.leaky_relu(v[0], 0.2));
        check(vec![random(&mut rng, r, c)], |t, v| t.relu(v[0]));
        check(vec![random(&mut rng, r, c)], |t, v| t.sigmoid(v[0]));
        check(vec![random(&mut rng, r, c)], |t, v| t.tanh(v[0]));
        check(vec![random(&mut rng, r, c)], |t, v| t.exp(v[0]));
        check(vec![random(&mut rng, r, c)], |t, v| {
            let e = t.exp(v[0])?;
            t.log(e)
        });
    }
}

#[test]
fn structural_ops() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    check(vec![random(&mut rng, 3, 2), random(&mut rng, 3, 4)], |t, v| t.concat_cols(&[v[0], v[1], v[0]]));
    check(vec![random(&mut rng, 2, 3), random(&mut rng, 4, 3)], |t, v| t.concat_rows(&[v[1], v[0]]));
    let idx: Arc<[usize]> = Arc::from(vec![2, 0, 2, 1, 2]);
    check(vec![random(&mut rng, 3, 4)], move |t, v| t.gather_rows(v[0], idx.clone()));
    check(vec![random(&mut rng, 5, 3), random(&mut rng, 5, 3)], |t, v| t.row_dot(v[0], v[1]));
    check(vec![random(&mut rng, 5, 3), random(&mut rng, 5, 1)], |t, v| t.mul_col(v[0], v[1]));
    check(vec![random(&mut rng, 4, 3)], |t, v| t.mean_rows(v[0]));
    check(vec![random(&mut rng, 4, 3)], |t, v| t.flatten(v[0]));
    check(vec![random(&mut rng, 1, 7)], |t, v| t.smooth3(v[0]));
    check(vec![random(&mut rng, 1, 2)], |t, v| t.smooth3(v[0]));
    check(vec![random(&mut rng, 3, 5)], |t, v| t.softmax_rows(v[0]));
    check(vec![random(&mut rng, 6, 2)], |t, v| t.slice_rows(v[0], 1, 4));
    check(vec![random(&mut rng, 2, 3)], |t, v| {
        let p = t.pick(v[0], 4)?;
        let q = t.pick(v[0], 1)?;
        t.mul(p, q)
    });
    let (lo, hi): (Arc<[f64]>, Arc<[f64]>) = (Arc::from(vec![-0.5; 8]), Arc::from(vec![0.5; 8]));
    check(vec![random(&mut rng, 2, 4)], move |t, v| t.clamp(v[0], lo.clone(), hi.clone()));
}

#[test]
fn segment_ops() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let seg: Arc<[usize]> = Arc::from(vec![0, 2, 2, 0, 1, 2, 3]);
    let s = seg.clone();
    check(vec![random(&mut rng, 7, 1)], move |t, v| t.segment_softmax(v[0], s.clone(), 5));
    let s = seg.clone();
    check(vec![random(&mut rng, 7, 3)], move |t, v| t.segment_sum(v[0], s.clone(), 5));
    let s = seg.clone();
    check(vec![random(&mut rng, 7, 3)], move |t, v| t.segment_mean(v[0], s.clone(), 5));

    let mut tape = Tape::new();
    let x = tape.constant(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]));
    let m = tape.segment_mean(x, Arc::from(vec![1, 1, 0]), 3).unwrap();
    assert_eq!(tape.value(m).data(), &[5.0, 6.0, 2.0, 3.0, 0.0, 0.0]);
}

#[test]
fn corrupted_backward_rule_fails() {
    const SIN: ScalarFn = f64::sin;
    const WRONG: ScalarFn = |x: f64| -x.cos();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (store, ids) = store_of(vec![random(&mut rng, 3, 3)]);
    let run = |df: ScalarFn| {
        grad_check(
            &store,
            |t: &mut Tape, b: &Bound| {
                let y = t.map(b.var(ids[0]), SIN, df)?;
                project(t, y, 5)
            },
            1e-4,
        )
        .unwrap()
    };
    assert!(run(f64::cos).passed());
    let bad = run(WRONG);
    assert!(!bad.passed());
    assert!(bad.max_rel_error() > 1.0);
}

#[test]
fn linear_layer_passes_tight_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut store = ParamStore::new();
    let w = store.add("w", random(&mut rng, 4, 3));
    let b = store.add("b", random(&mut rng, 1, 3));
    let x = random(&mut rng, 6, 4);
    let report = grad_check(
        &store,
        |t: &mut Tape, bd: &Bound| {
            let xv = t.constant(x.clone());
            let h = t.matmul(xv, bd.var(w))?;
            let y = t.add_row(h, bd.var(b))?;
            let sq = t.mul(y, y)?;
            t.sum_all(sq)
        },
        1e-6,
    )
    .unwrap();
    assert!(report.passed(), "{:?}", report.worst());
}

/// Builds `a * L1 + b * L2` where L1, L2 share parameters.
fn two_losses(t: &mut Tape, x: Var, y: Var) -> Result<(Var, Var), DiffError> {
    let p = t.matmul(x, y)?;
    let s = t.sigmoid(p)?;
    let l1 = t.sum_all(s)?;
    let q = t.mul(x, x)?;
    let e = t.leaky_relu(q, 0.2)?;
    let l2 = t.sum_all(e)?;
    Ok((l1, l2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accumulation_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x0, y0) = (random(&mut rng, 3, 3), random(&mut rng, 3, 3));
        let grad_of = |wa: f64, wb: f64| {
            let mut t = Tape::new();
            let x = t.leaf(x0.clone(), true);
            let y = t.leaf(y0.clone(), true);
            let (l1, l2) = two_losses(&mut t, x, y).unwrap();
            let s1 = t.scale(l1, wa).unwrap();
            let s2 = t.scale(l2, wb).unwrap();
            let l = t.add(s1, s2).unwrap();
            let g = t.backward(l).unwrap();
            (g.get(x).unwrap().clone(), g.get(y).unwrap().clone())
        };
        let (gx, gy) = grad_of(a, b);
        let (gx1, gy1) = grad_of(1.0, 0.0);
        let (gx2, gy2) = grad_of(0.0, 1.0);
        for (g, (g1, g2)) in [(gx, (gx1, gx2)), (gy, (gy1, gy2))] {
            for ((v, v1), v2) in g.data().iter().zip(g1.data()).zip(g2.data()) {
                prop_assert!((v - (a * v1 + b * v2)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn segment_softmax_normalizes(
        scores in proptest::collection::vec(-50.0f64..50.0, 1..40),
        seed in 0u64..100,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_seg = 6;
        let seg: Vec<usize> = scores.iter().map(|_| rng.random_range(0..n_seg)).collect();
        let mut t = Tape::new();
        let s = t.constant(Tensor::column(scores.clone()));
        let y = t.segment_softmax(s, Arc::from(seg.clone()), n_seg).unwrap();
        let mut sums = vec![0.0; n_seg];
        for (&v, &g) in t.value(y).data().iter().zip(&seg) {
            prop_assert!(v >= 0.0);
            sums[g] += v;
        }
        for (k, &total) in sums.iter().enumerate() {
            if seg.contains(&k) {
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn randomized_shapes_pass_grad_check(r in 1usize..5, k in 1usize..5, c in 1usize..5, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = vec![random(&mut rng, r, k), random(&mut rng, k, c), random(&mut rng, 1, c)];
        let (store, ids) = store_of(tensors);
        let report = grad_check(&store, |t: &mut Tape, b: &Bound| {
            let h = t.matmul(b.var(ids[0]), b.var(ids[1]))?;
            let h = t.add_row(h, b.var(ids[2]))?;
            let h = t.tanh(h)?;
            let h = t.softmax_rows(h)?;
            let h = t.concat_cols(&[h, h])?;
            let m = t.mean_rows(h)?;
            project(t, m, seed)
        }, 1e-4).unwrap();
        prop_assert!(report.passed(), "{:?}", report.worst());
    }
}

#[test]
fn forward_and_gradients_are_deterministic() {
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut t = Tape::new();
        let x = t.leaf(random(&mut rng, 8, 4), true);
        let w = t.leaf(random(&mut rng, 4, 4), true);
        let h = t.matmul(x, w).unwrap();
        let flat = t.reshape(h, vec![32, 1]).unwrap();
        let seg: Arc<[usize]> = (0..32).map(|i| i % 5).collect();
        let a = t.segment_softmax(flat, seg, 5).unwrap();
        let l = project(&mut t, a, 3).unwrap();
        let value = t.value(l).item();
        let g = t.backward(l).unwrap();
        (value.to_bits(), g.get(w).unwrap().data().iter().map(|x| x.to_bits()).collect::<Vec<_>>())
    };
    assert_eq!(run(), run());
}
