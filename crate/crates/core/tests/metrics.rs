use nrlgt_core::OracleError;
use nrlgt_core::oracle::*;
use nrlgt_core::oracle::CurveKind;
use proptest::prelude::*;

fn curve(values: &[f64]) -> RobustnessCurve {
    RobustnessCurve::new(CurveKind::Controllability, values.to_vec())
}

#[test]
fn overall_is_mean() {
    assert_eq!(overall_rc(&curve(&[1.0, 1.0, 1.0])).unwrap().0, 1.0);
    assert!((overall_rc(&curve(&[0.2, 0.4, 0.6])).unwrap().0 - 0.4).abs() < 1e-15);
    assert_eq!(overall_rc(&curve(&[])), Err(OracleError::EmptyCurve));
}

#[test]
fn error_report_cases() {
    let t = curve(&[0.3, 0.5, 0.9]);
    let same = error_report(&t, &t).unwrap();
    assert_eq!(same.er, vec![0.0; 3]);
    assert_eq!(same.mean_er, 0.0);

    let shifted = curve(&[0.35, 0.55, 0.95]);
    let r = error_report(&shifted, &t).unwrap();
    assert!((r.mean_er - 0.05).abs() < 1e-12);
    assert_eq!(r, error_report(&t, &shifted).unwrap());

    assert_eq!(
        error_report(&curve(&[0.1]), &t),
        Err(OracleError::LengthMismatch(1, 3))
    );
    let other = RobustnessCurve::new(CurveKind::Connectivity, vec![0.3, 0.5, 0.9]);
    assert_eq!(error_report(&other, &t), Err(OracleError::KindMismatch));
}

#[test]
fn rank_errors() {
    let a = [0.9, 0.5, 0.3, 0.1];
    assert_eq!(rank_list_error(&a, &a).unwrap(), 0.0);
    let rev = [0.1, 0.3, 0.5, 0.9];
    assert_eq!(rank_list_error(&rev, &a).unwrap(), 2.0);
    assert_eq!(ranks(&[1.0, 1.0, 2.0]), vec![1, 2, 0]);
    assert!(rank_list_error(&a, &a[..2]).is_err());
}

proptest! {
    #[test]
    fn rank_error_invariant_under_joint_relabeling(
        items in proptest::collection::vec((0u32..50, 0u32..50), 1..20),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        // distinct scores so ranks are relabeling-invariant
        let pred: Vec<f64> = items.iter().enumerate().map(|(i, p)| p.0 as f64 + i as f64 * 1e-3).collect();
        let truth: Vec<f64> = items.iter().enumerate().map(|(i, p)| p.1 as f64 + i as f64 * 1e-3).collect();
        let mut perm: Vec<usize> = (0..items.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let pp: Vec<f64> = perm.iter().map(|&i| pred[i]).collect();
        let tp: Vec<f64> = perm.iter().map(|&i| truth[i]).collect();
        prop_assert_eq!(rank_list_error(&pred, &truth).unwrap(), rank_list_error(&pp, &tp).unwrap());
    }
}
