use nrlgt_diff::checkpoint::{self, from_bytes, to_bytes};
use nrlgt_diff::{Adam, CheckpointError, ParamStore, Tensor};

fn single(p: f64) -> (ParamStore, nrlgt_diff::ParamId) {
    let mut s = ParamStore::new();
    let id = s.add("p", Tensor::scalar(p));
    (s, id)
}

#[test]
fn zero_gradient_leaves_parameters() {
    let (mut s, id) = single(0.7);
    let mut adam = Adam::new(1e-3, 0.0);
    for _ in 0..5 {
        adam.step(&mut s, &[Tensor::scalar(0.0)]);
    }
    assert_eq!(s.get(id).item(), 0.7);
}

#[test]
fn first_step_moves_by_lr() {
    // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
    for g in [1.0, 0.01, -250.0] {
        let (mut s, id) = single(2.0);
        let mut adam = Adam::new(1e-2, 0.0);
        adam.step(&mut s, &[Tensor::scalar(g)]);
        let expect = 2.0 - 1e-2 * g / (g.abs() + 1e-8);
        assert!((s.get(id).item() - expect).abs() < 1e-15);
    }
}

#[test]
fn decoupled_decay() {
    let (mut s, id) = single(3.0);
    let mut adam = Adam::new(0.1, 0.5);
    adam.step(&mut s, &[Tensor::scalar(0.0)]);
    assert!((s.get(id).item() - 3.0 * (1.0 - 0.1 * 0.5)).abs() < 1e-15);
}

#[test]
fn second_step_matches_closed_form() {
    let (mut s, id) = single(0.0);
    let mut adam = Adam::new(0.1, 0.0);
    adam.step(&mut s, &[Tensor::scalar(1.0)]);
    adam.step(&mut s, &[Tensor::scalar(3.0)]);
    let m = 0.9 * 0.1 * 1.0 + 0.1 * 3.0;
    let v = 0.999 * 0.001 * 1.0 + 0.001 * 9.0;
    let (mh, vh) = (m / (1.0 - 0.81), v / (1.0 - 0.999f64.powi(2)));
    let expect = -0.1 / (1.0 + 1e-8) - 0.1 * mh / (vh.sqrt() + 1e-8);
    assert!((s.get(id).item() - expect).abs() < 1e-12);
    assert_eq!(adam.steps(), 2);
}

#[test]
fn frozen_parameters_do_not_move() {
    let mut s = ParamStore::new();
    let a = s.add("a", Tensor::row(vec![1.0, 2.0]));
    let b = s.add("b", Tensor::row(vec![1.0, 2.0]));
    s.set_frozen(b, true);
    let mut adam = Adam::new(0.1, 0.1);
    adam.step(&mut s, &[Tensor::row(vec![1.0, 1.0]), Tensor::row(vec![1.0, 1.0])]);
    assert_ne!(s.get(a).data(), &[1.0, 2.0]);
    assert_eq!(s.get(b).data(), &[1.0, 2.0]);
}

fn sample_store() -> ParamStore {
    let mut s = ParamStore::new();
    s.add("enc.table_in", Tensor::from_fn(4, 3, |r, c| r as f64 * 0.5 - c as f64));
    s.add("bias", Tensor::row(vec![f64::MIN_POSITIVE, -0.0, 1e300]));
    s.add("scalar", Tensor::scalar(0.5));
    s.add("vec", Tensor::new(vec![5], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap());
    s
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let s = sample_store();
    let manifest = "d = 10\nfilter = \"controllability\"\n";
    let ck = from_bytes(&to_bytes(&s, manifest)).unwrap();
    assert_eq!(ck.manifest, manifest);
    assert_eq!(ck.params.len(), s.len());
    for id in s.ids() {
        let other = ck.params.id(s.name(id)).unwrap();
        assert_eq!(ck.params.get(other).shape(), s.get(id).shape());
        let bits = |t: &Tensor| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(ck.params.get(other)), bits(s.get(id)));
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    checkpoint::save(&path, &s, manifest).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), to_bytes(&s, manifest));
    assert_eq!(checkpoint::load(&path).unwrap().params.len(), 4);
}

#[test]
fn checkpoint_rejects_damage() {
    let bytes = to_bytes(&sample_store(), "m");
    assert!(matches!(from_bytes(b"garbage!"), Err(CheckpointError::BadMagic)));
    assert!(matches!(from_bytes(&bytes[..bytes.len() - 3]), Err(CheckpointError::Corrupt(_))));
    let mut v2 = bytes.clone();
    v2[8] = 2;
    assert!(matches!(from_bytes(&v2), Err(CheckpointError::Version(2))));
    let mut extra = bytes;
    extra.push(0);
    assert!(matches!(from_bytes(&extra), Err(CheckpointError::Corrupt(_))));
}
