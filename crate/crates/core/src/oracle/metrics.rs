use super::RobustnessCurve;
use crate::error::OracleError;

/// Mean of a robustness curve.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OverallRobustness(pub f64);

pub fn overall_rc(curve: &RobustnessCurve) -> Result<OverallRobustness, OracleError> {
    if curve.is_empty() {
        return Err(OracleError::EmptyCurve);
    }
    Ok(OverallRobustness(mean(&curve.values)))
}

/// Per-index absolute deviation between a predicted and a true curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub er: Vec<f64>,
    pub mean_er: f64,
}

pub fn error_report(pred: &RobustnessCurve, truth: &RobustnessCurve) -> Result<ErrorReport, OracleError> {
    if pred.kind != truth.kind {
        return Err(OracleError::KindMismatch);
    }
    if pred.len() != truth.len() {
        return Err(OracleError::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(OracleError::EmptyCurve);
    }
    let er: Vec<f64> = pred
        .values
        .iter()
        .zip(&truth.values)
        .map(|(p, t)| (p - t).abs())
        .collect();
    let mean_er = mean(&er);
    Ok(ErrorReport { er, mean_er })
}

/// Rank of each item when sorted by descending score; ties keep index order.
pub fn ranks(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut rank = vec![0; scores.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Mean absolute difference between the rank lists induced by two score lists.
pub fn rank_list_error(pred_scores: &[f64], true_scores: &[f64]) -> Result<f64, OracleError> {
    if pred_scores.len() != true_scores.len() {
        return Err(OracleError::LengthMismatch(pred_scores.len(), true_scores.len()));
    }
    if pred_scores.is_empty() {
        return Ok(0.0);
    }
    let rp = ranks(pred_scores);
    let rt = ranks(true_scores);
    let total: usize = rp.iter().zip(&rt).map(|(a, b)| a.abs_diff(*b)).sum();
    Ok(total as f64 / pred_scores.len() as f64)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
