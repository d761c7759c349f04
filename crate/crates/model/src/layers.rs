use nrlgt_diff::{Bound, DiffError, ParamId, ParamStore, Tape, Tensor, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::LayerKind;
use crate::context::AttentionGraph;

/// Glorot-uniform matrix scaled by `gain`.
pub(crate) fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize, gain: f64) -> Tensor {
    let a = gain * (6.0 / (rows + cols) as f64).sqrt();
    Tensor::from_fn(rows, cols, |_, _| rng.random_range(-a..=a))
}

/// `x W + b` with `W: (in, out)`.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
}

impl Linear {
    pub(crate) fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        inp: usize,
        out: usize,
        gain: f64,
    ) -> Self {
        Linear {
            w: store.add(format!("{name}.w"), glorot(rng, inp, out, gain)),
            b: store.add(format!("{name}.b"), Tensor::zeros(1, out)),
        }
    }

    /// Fresh weights for new input and output sizes.
    pub(crate) fn reinit(&self, store: &mut ParamStore, rng: &mut ChaCha8Rng, inp: usize, out: usize, gain: f64) {
        store.replace(self.w, glorot(rng, inp, out, gain));
        store.replace(self.b, Tensor::zeros(1, out));
    }

    pub fn forward(&self, t: &mut Tape, b: &Bound, x: Var) -> Result<Var, DiffError> {
        let h = t.matmul(x, b.var(self.w))?;
        t.add_row(h, b.var(self.b))
    }
}

/// One attention head: query, key and value projections plus the edge
/// mixer `we` and value mixer `wv` (absent in the classical variant).
#[derive(Debug, Clone)]
pub struct InnerHead {
    pub q: ParamId,
    pub k: ParamId,
    pub v: ParamId,
    pub we: Option<ParamId>,
    pub wv: Option<ParamId>,
}

#[derive(Debug, Clone)]
pub struct OuterHead {
    pub inner: Vec<InnerHead>,
    /// Output projection `(S * head_dim, width)`.
    pub wo: ParamId,
}

/// Graph transformer layer at a fixed width.
#[derive(Debug, Clone)]
pub struct GtLayer {
    pub width: usize,
    pub head_dim: usize,
    pub kind: LayerKind,
    pub slope: f64,
    pub heads: Vec<OuterHead>,
}

impl GtLayer {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        prefix: &str,
        width: usize,
        n_inner: usize,
        outer: usize,
        kind: LayerKind,
        slope: f64,
    ) -> Self {
        let dh = width / n_inner;
        let outer = match kind {
            LayerKind::InnerOuter => outer,
            LayerKind::Classical => 1,
        };
        let heads = (0..outer)
            .map(|m| {
                let inner = (0..n_inner)
                    .map(|s| {
                        let p = format!("{prefix}.o{m}.i{s}");
                        let mut mat = |name: &str, r: usize, c: usize| store.add(format!("{p}.{name}"), glorot(rng, r, c, 1.0));
                        let q = mat("q", width, dh);
                        let k = mat("k", width, dh);
                        let v = mat("v", width, dh);
                        let (we, wv) = match kind {
                            LayerKind::InnerOuter => (Some(mat("we", dh, dh)), Some(mat("wv", dh, dh))),
                            LayerKind::Classical => (None, None),
                        };
                        InnerHead { q, k, v, we, wv }
                    })
                    .collect();
                let wo = store.add(format!("{prefix}.o{m}.wo"), glorot(rng, n_inner * dh, width, 1.0));
                OuterHead { inner, wo }
            })
            .collect();
        GtLayer {
            width,
            head_dim: dh,
            kind,
            slope,
            heads,
        }
    }

    /// Attention coefficients `(E, 1)` of one inner head, aligned with the
    /// edges of `ag`, plus the per-node values `W_v V`.
    pub fn attention(
        &self,
        t: &mut Tape,
        b: &Bound,
        h: Var,
        ag: &AttentionGraph,
        head: &InnerHead,
    ) -> Result<(Var, Var), DiffError> {
        let q = t.matmul(h, b.var(head.q))?;
        let k = t.matmul(h, b.var(head.k))?;
        let v = t.matmul(h, b.var(head.v))?;
        let q = match head.we {
            Some(we) => t.matmul(q, b.var(we))?,
            None => q,
        };
        let v = match head.wv {
            Some(wv) => t.matmul(v, b.var(wv))?,
            None => v,
        };
        let qi = t.gather_rows(q, ag.dst.clone())?;
        let kj = t.gather_rows(k, ag.src.clone())?;
        let logits = t.row_dot(qi, kj)?;
        let logits = t.scale(logits, 1.0 / (self.head_dim as f64).sqrt())?;
        let att = t.segment_softmax(logits, ag.dst.clone(), ag.n)?;
        Ok((att, v))
    }

    /// Output `(n, head_dim)` of one inner head.
    pub fn inner_head(
        &self,
        t: &mut Tape,
        b: &Bound,
        h: Var,
        ag: &AttentionGraph,
        head: &InnerHead,
    ) -> Result<Var, DiffError> {
        let (att, v) = self.attention(t, b, h, ag, head)?;
        let vj = t.gather_rows(v, ag.src.clone())?;
        let msg = t.mul_col(vj, att)?;
        t.segment_sum(msg, ag.dst.clone(), ag.n)
    }

    pub fn forward(&self, t: &mut Tape, b: &Bound, h: Var, ag: &AttentionGraph) -> Result<Var, DiffError> {
        let mut total: Option<Var> = None;
        for outer in &self.heads {
            let parts = outer
                .inner
                .iter()
                .map(|head| self.inner_head(t, b, h, ag, head))
                .collect::<Result<Vec<_>, _>>()?;
            let cat = if parts.len() == 1 { parts[0] } else { t.concat_cols(&parts)? };
            let act = match self.kind {
                LayerKind::InnerOuter => t.leaky_relu(cat, self.slope)?,
                LayerKind::Classical => cat,
            };
            let proj = t.matmul(act, b.var(outer.wo))?;
            let out = t.add(h, proj)?;
            total = Some(match total {
                None => out,
                Some(acc) => t.add(acc, out)?,
            });
        }
        Ok(total.expect("at least one outer head"))
    }
}

impl Linear {
    /// Tape-free `x W + b`.
    pub fn infer(&self, store: &ParamStore, x: &Tensor) -> Result<Tensor, DiffError> {
        let mut y = x.matmul(store.get(self.w))?;
        let b = store.get(self.b).data();
        for row in y.data_mut().chunks_mut(b.len()) {
            row.iter_mut().zip(b).for_each(|(o, x)| *o += x);
        }
        Ok(y)
    }
}

impl GtLayer {
    /// Tape-free forward with attention fused per edge. The mixers are folded
    /// into the projections and the outer heads share one output product, so
    /// results agree with [`GtLayer::forward`] to rounding.
    pub fn infer(&self, store: &ParamStore, h: &Tensor, ag: &AttentionGraph) -> Result<Tensor, DiffError> {
        let n = ag.n;
        let dh = self.head_dim;
        let scale = 1.0 / (dh as f64).sqrt();
        let src = &ag.src[..];
        // Edges are grouped by target, so each node's neighborhood is a range.
        let mut starts = vec![0; n + 1];
        for &i in ag.dst.iter() {
            starts[i + 1] += 1;
        }
        for i in 0..n {
            starts[i + 1] += starts[i];
        }

        let heads: Vec<&InnerHead> = self.heads.iter().flat_map(|o| &o.inner).collect();
        let cols = 3 * dh * heads.len();
        let mut wcat = Tensor::zeros(self.width, cols);
        for (s, head) in heads.iter().enumerate() {
            let fold = |a: ParamId, b: Option<ParamId>| match b {
                Some(b) => store.get(a).matmul(store.get(b)),
                None => Ok(store.get(a).clone()),
            };
            for (p, m) in [fold(head.q, head.we)?, fold(head.k, None)?, fold(head.v, head.wv)?].iter().enumerate() {
                for r in 0..self.width {
                    let at = r * cols + (3 * s + p) * dh;
                    wcat.data_mut()[at..at + dh].copy_from_slice(m.row_slice(r));
                }
            }
        }
        let proj = h.matmul(&wcat)?;
        let pd = proj.data();

        let mut w = vec![0.0; src.len()];
        let mut cat = Tensor::zeros(n, heads.len() * dh);
        let out = cat.data_mut();
        let cw = heads.len() * dh;
        for s in 0..heads.len() {
            let (qo, ko, vo) = (3 * s * dh, (3 * s + 1) * dh, (3 * s + 2) * dh);
            for i in 0..n {
                let (lo, hi) = (starts[i], starts[i + 1]);
                let qi = &pd[i * cols + qo..i * cols + qo + dh];
                let mut max = f64::NEG_INFINITY;
                for r in lo..hi {
                    let j = src[r];
                    let dot: f64 = qi.iter().zip(&pd[j * cols + ko..j * cols + ko + dh]).map(|(x, y)| x * y).sum();
                    w[r] = dot * scale;
                    max = max.max(w[r]);
                }
                let mut denom = 0.0;
                for x in &mut w[lo..hi] {
                    *x = (*x - max).exp();
                    denom += *x;
                }
                let o = &mut out[i * cw + s * dh..i * cw + (s + 1) * dh];
                for r in lo..hi {
                    let a = w[r] / denom;
                    let j = src[r];
                    o.iter_mut().zip(&pd[j * cols + vo..j * cols + vo + dh]).for_each(|(o, x)| *o += x * a);
                }
            }
        }
        if self.kind == LayerKind::InnerOuter {
            let slope = self.slope;
            out.iter_mut().for_each(|x| {
                if *x <= 0.0 {
                    *x *= slope;
                }
            });
        }

        // sum_m (h + a_m Wo_m) = M h + [a_1 .. a_M] [Wo_1; ..; Wo_M]
        let wo: Vec<f64> = self.heads.iter().flat_map(|o| store.get(o.wo).data().iter().copied()).collect();
        let mut y = cat.matmul(&Tensor::matrix(cw, self.width, wo))?;
        let m = self.heads.len() as f64;
        y.data_mut().iter_mut().zip(h.data()).for_each(|(y, x)| *y += m * x);
        Ok(y)
    }
}
