/// Task weights balanced by gradient norms on the shared representation.
///
/// Each update moves `w_i` against the sign of `G_i - G_bar * r_i^alpha`,
/// where `G_i = w_i * |grad L_i|`, `G_bar` is the mean of the `G_i`, and
/// `r_i` is task `i`'s loss ratio to its first recorded loss, relative to
/// the mean ratio. Weights are floored and renormalized to sum to the task
/// count.
#[derive(Debug, Clone, PartialEq)]
pub struct GradNorm {
    pub weights: [f64; 2],
    pub alpha: f64,
    pub lr: f64,
    pub min_weight: f64,
    initial: Option<[f64; 2]>,
}

impl GradNorm {
    pub fn new(alpha: f64, lr: f64) -> Self {
        GradNorm {
            weights: [1.0, 1.0],
            alpha,
            lr,
            min_weight: 1e-3,
            initial: None,
        }
    }

    pub fn initial_losses(&self) -> Option<[f64; 2]> {
        self.initial
    }

    /// `losses`: current task losses; `norms`: unweighted gradient norms of
    /// each task loss with respect to the shared representation.
    pub fn update(&mut self, losses: [f64; 2], norms: [f64; 2]) -> [f64; 2] {
        let init = *self.initial.get_or_insert(losses);
        let ratio: [f64; 2] = std::array::from_fn(|i| if init[i] > 0.0 { losses[i] / init[i] } else { 1.0 });
        let mean_ratio = (ratio[0] + ratio[1]) / 2.0;
        let g: [f64; 2] = std::array::from_fn(|i| self.weights[i] * norms[i]);
        let g_bar = (g[0] + g[1]) / 2.0;
        let mean_norm = (norms[0] + norms[1]) / 2.0;
        let mut w = self.weights;
        for i in 0..2 {
            let r = if mean_ratio > 0.0 { ratio[i] / mean_ratio } else { 1.0 };
            let gap = g[i] - g_bar * r.powf(self.alpha);
            let sign = if gap > 0.0 {
                1.0
            } else if gap < 0.0 {
                -1.0
            } else {
                0.0
            };
            // d|G_i - target_i| / dw_i, with the norm measured against the mean
            // so `lr` is scale free.
            if mean_norm > 0.0 {
                w[i] -= self.lr * sign * norms[i] / mean_norm;
            }
        }
        for x in &mut w {
            *x = x.max(self.min_weight);
        }
        let s = w[0] + w[1];
        self.weights = [2.0 * w[0] / s, 2.0 * w[1] / s];
        self.weights
    }
}
