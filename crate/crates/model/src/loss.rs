use std::sync::Arc;

use nrlgt_diff::{Tape, Tensor, Var};

use crate::error::ModelError;

pub const RHO: f64 = 0.5;

/// Per-position curve weights: 2 for the first `floor(n/2)` positions
/// (1-based `i <= n/2`), 1 afterwards. Length `n - 1`.
pub fn rmse_weights(n: usize) -> Vec<f64> {
    (1..n).map(|i| if i <= n / 2 { 2.0 } else { 1.0 }).collect()
}

/// `(1/(n-1)) * sum_i w_i (pred_i - truth_i)^2` on plain values.
pub fn rmse_value(pred: &[f64], truth: &[f64], weights: &[f64]) -> Result<f64, ModelError> {
    if pred.len() != truth.len() || pred.len() != weights.len() {
        return Err(ModelError::SizeMismatch {
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let s: f64 = pred.iter().zip(truth).zip(weights).map(|((p, t), w)| w * (p - t).powi(2)).sum();
    Ok(s / pred.len() as f64)
}

/// Recorded form of [`rmse_value`].
pub fn rmse_loss(t: &mut Tape, pred: Var, truth: &[f64], weights: &Arc<[f64]>) -> Result<Var, ModelError> {
    let n = t.value(pred).numel();
    if n != truth.len() || n != weights.len() {
        return Err(ModelError::SizeMismatch {
            expected: truth.len(),
            got: n,
        });
    }
    let shape = t.value(pred).shape().to_vec();
    let target = t.constant(Tensor::new(shape.clone(), truth.to_vec())?);
    let w = t.constant(Tensor::new(shape, weights.to_vec())?);
    let diff = t.sub(pred, target)?;
    let sq = t.mul(diff, diff)?;
    let weighted = t.mul(sq, w)?;
    let total = t.sum_all(weighted)?;
    Ok(t.scale(total, 1.0 / n as f64)?)
}

/// `L_main + rho * L_branch`.
pub fn step1_loss(
    t: &mut Tape,
    main: Var,
    branch: Var,
    truth: &[f64],
    weights: &Arc<[f64]>,
    rho: f64,
) -> Result<Var, ModelError> {
    let lm = rmse_loss(t, main, truth, weights)?;
    let lb = rmse_loss(t, branch, truth, weights)?;
    let lb = t.scale(lb, rho)?;
    Ok(t.add(lm, lb)?)
}

/// `-log P[label]`.
pub fn class_loss(t: &mut Tape, probs: Var, label: usize) -> Result<Var, ModelError> {
    let classes = t.value(probs).numel();
    if label >= classes {
        return Err(ModelError::Label { label, classes });
    }
    let p = t.pick(probs, label)?;
    let lp = t.log(p)?;
    Ok(t.scale(lp, -1.0)?)
}

/// `(pred - truth)^2`.
pub fn rc_loss(t: &mut Tape, pred: Var, truth: f64) -> Result<Var, ModelError> {
    let d = t.add_const(pred, -truth)?;
    Ok(t.mul(d, d)?)
}

/// `w_c L_class + w_R L_Rc`.
pub fn step2_loss(t: &mut Tape, class: Var, rc: Var, weights: [f64; 2]) -> Result<Var, ModelError> {
    let a = t.scale(class, weights[0])?;
    let b = t.scale(rc, weights[1])?;
    Ok(t.add(a, b)?)
}
