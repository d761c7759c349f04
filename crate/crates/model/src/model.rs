use std::path::Path;
use std::sync::Arc;

use nrlgt_core::{Graph, RobustnessCurve};
use nrlgt_diff::{checkpoint, Bound, Checkpoint, ParamId, ParamStore, Tape, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{FilterKind, ModelConfig};
use crate::context::AttentionGraph;
use crate::error::ModelError;
use crate::layers::{GtLayer, Linear};

/// Name prefixes of the parameter groups.
pub const ENCODER: &str = "enc.";
pub const BACKBONE: &str = "backbone.";
pub const CURVE: &str = "curve.";
pub const RC: &str = "rc.";
pub const CLASS: &str = "cls.";

/// Gain for the two curve regressors. Zero starts the main output at the
/// filter prior; any larger value puts most outputs outside the clamp,
/// where they receive no gradient.
const CURVE_GAIN: f64 = 0.0;

/// Half-width of the uniform init of the degree tables. The outer-head
/// residual sum scales features by about `M` per layer, so inputs start small.
const TABLE_RANGE: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct Encoder {
    pub table_in: ParamId,
    /// Equal to `table_in` when tables are shared.
    pub table_out: ParamId,
}

#[derive(Debug, Clone)]
pub struct CurveHead {
    pub lin1: Linear,
    pub gt: GtLayer,
    pub lin2: Linear,
    pub main: Linear,
    pub branch: Linear,
    /// Trainable bias of the controllability filter.
    pub bias: Option<ParamId>,
}

#[derive(Debug, Clone)]
pub struct RcHead {
    pub alpha: ParamId,
    pub gt: GtLayer,
    pub out: Linear,
}

#[derive(Debug, Clone)]
pub struct ClassHead {
    pub alpha: ParamId,
    pub token: ParamId,
    pub gt: GtLayer,
    pub out: Linear,
}

#[derive(Debug, Clone, Copy)]
pub struct CurveVars {
    pub main: Var,
    pub branch: Var,
}

/// Plain-valued outputs of all three heads.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub curve: Vec<f64>,
    pub branch: Vec<f64>,
    pub rc: f64,
    pub probs: Vec<f64>,
}

impl Prediction {
    pub fn class(&self) -> usize {
        argmax(&self.probs)
    }
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// Degree encoder, graph transformer backbone and the curve, R_c and
/// classification heads.
#[derive(Debug, Clone)]
pub struct NrlGt {
    cfg: ModelConfig,
    pub params: ParamStore,
    pub encoder: Encoder,
    pub backbone: Vec<GtLayer>,
    pub curve: CurveHead,
    pub rc: RcHead,
    pub class: ClassHead,
    lower: Arc<[f64]>,
    upper: Arc<[f64]>,
}

fn bounds(n: usize) -> (Arc<[f64]>, Arc<[f64]>) {
    (RobustnessCurve::lower_bounds(n).into(), vec![1.0; n - 1].into())
}

impl NrlGt {
    pub fn new(cfg: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = ParamStore::new();
        let (d, n) = (cfg.d, cfg.n);
        let gt = |s: &mut ParamStore, rng: &mut ChaCha8Rng, prefix: &str, width: usize| {
            GtLayer::new(s, rng, prefix, width, cfg.inner_heads, cfg.outer_heads, cfg.layer_kind, cfg.leaky_slope)
        };

        let mut table = |s: &mut ParamStore, name: &str| {
            let t = Tensor::from_fn(cfg.max_degree + 1, d / 2, |_, _| rng.random_range(-TABLE_RANGE..TABLE_RANGE));
            s.add(name, t)
        };
        let table_in = table(&mut s, "enc.table_in");
        let table_out = if cfg.shared_tables { table_in } else { table(&mut s, "enc.table_out") };
        let encoder = Encoder { table_in, table_out };

        let backbone = (0..cfg.layers).map(|l| gt(&mut s, &mut rng, &format!("backbone.{l}"), d)).collect();

        let curve = CurveHead {
            lin1: Linear::new(&mut s, &mut rng, "curve.lin1", d, 2, 1.0),
            gt: gt(&mut s, &mut rng, "curve.gt", 2),
            lin2: Linear::new(&mut s, &mut rng, "curve.lin2", 2, 1, 1.0),
            main: Linear::new(&mut s, &mut rng, "curve.main", 3 * n, n - 1, CURVE_GAIN),
            branch: Linear::new(&mut s, &mut rng, "curve.branch", n, n - 1, CURVE_GAIN),
            bias: match cfg.filter {
                FilterKind::Controllability => Some(s.add("curve.bias", Tensor::zeros(1, n - 1))),
                FilterKind::Connectivity => None,
            },
        };

        let rc = RcHead {
            alpha: s.add("rc.alpha", Tensor::scalar(0.5)),
            gt: gt(&mut s, &mut rng, "rc.gt", d),
            out: Linear::new(&mut s, &mut rng, "rc.out", 2 * d, 1, 1.0),
        };

        let class = ClassHead {
            alpha: s.add("cls.alpha", Tensor::scalar(0.5)),
            token: s.add("cls.token", Tensor::from_fn(1, d, |_, _| rng.random_range(-1.0..1.0))),
            gt: gt(&mut s, &mut rng, "cls.gt", d),
            out: Linear::new(&mut s, &mut rng, "cls.out", d, cfg.classes, 1.0),
        };

        let (lower, upper) = bounds(n);
        Ok(NrlGt {
            cfg,
            params: s,
            encoder,
            backbone,
            curve,
            rc,
            class,
            lower,
            upper,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn context(&self, g: &Graph) -> AttentionGraph {
        AttentionGraph::new(g, self.cfg.max_degree)
    }

    /// Freezes every parameter, then thaws those under the given prefixes.
    pub fn train_only(&mut self, prefixes: &[&str]) {
        self.params.freeze_where(true, |_| true);
        self.params.freeze_where(false, |name| prefixes.iter().any(|p| name.starts_with(p)));
    }

    /// Sets the filter's starting point to a reference curve (normally the
    /// mean training curve).
    pub fn set_curve_prior(&mut self, prior: &[f64]) -> Result<(), ModelError> {
        if prior.len() != self.cfg.n - 1 {
            return Err(ModelError::SizeMismatch {
                expected: self.cfg.n - 1,
                got: prior.len(),
            });
        }
        let target = self.curve.bias.unwrap_or(self.curve.main.b);
        self.params.set(target, Tensor::row(prior.to_vec()))?;
        Ok(())
    }

    /// Rebuilds the size-specific curve regressors and filter for graphs of
    /// `n` nodes. Everything else is kept.
    pub fn resize_curve_head(&mut self, n: usize, seed: u64) -> Result<(), ModelError> {
        if n < 2 {
            return Err(ModelError::Config("curve head needs at least 2 nodes".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.curve.main.reinit(&mut self.params, &mut rng, 3 * n, n - 1, CURVE_GAIN);
        self.curve.branch.reinit(&mut self.params, &mut rng, n, n - 1, CURVE_GAIN);
        if let Some(bias) = self.curve.bias {
            self.params.replace(bias, Tensor::zeros(1, n - 1));
        }
        self.cfg.n = n;
        (self.lower, self.upper) = bounds(n);
        Ok(())
    }

    /// `h^0`: per-node concatenation of the in- and out-degree embeddings.
    pub fn encode(&self, t: &mut Tape, b: &Bound, ag: &AttentionGraph) -> Result<Var, ModelError> {
        let hin = t.gather_rows(b.var(self.encoder.table_in), ag.deg_in.clone())?;
        let hout = t.gather_rows(b.var(self.encoder.table_out), ag.deg_out.clone())?;
        Ok(t.concat_cols(&[hin, hout])?)
    }

    /// One GT layer, either recorded on the tape or run by the fused
    /// inference path with the result entering the tape as a constant.
    fn gt(&self, layer: &GtLayer, t: &mut Tape, b: &Bound, h: Var, ag: &AttentionGraph, fused: bool) -> Result<Var, ModelError> {
        if fused {
            let out = layer.infer(&self.params, t.value(h), ag)?;
            Ok(t.constant(out))
        } else {
            Ok(layer.forward(t, b, h, ag)?)
        }
    }

    pub fn run_backbone(&self, t: &mut Tape, b: &Bound, h0: Var, ag: &AttentionGraph) -> Result<Var, ModelError> {
        self.backbone_with(t, b, h0, ag, false)
    }

    fn backbone_with(&self, t: &mut Tape, b: &Bound, h0: Var, ag: &AttentionGraph, fused: bool) -> Result<Var, ModelError> {
        let mut h = h0;
        for layer in &self.backbone {
            h = self.gt(layer, t, b, h, ag, fused)?;
        }
        Ok(h)
    }

    /// Filtered main curve `(1, n-1)` and unfiltered branch curve.
    pub fn curve_forward(&self, t: &mut Tape, b: &Bound, hl: Var, ag: &AttentionGraph) -> Result<CurveVars, ModelError> {
        self.curve_with(t, b, hl, ag, false)
    }

    fn curve_with(&self, t: &mut Tape, b: &Bound, hl: Var, ag: &AttentionGraph, fused: bool) -> Result<CurveVars, ModelError> {
        if ag.n != self.cfg.n {
            return Err(ModelError::SizeMismatch {
                expected: self.cfg.n,
                got: ag.n,
            });
        }
        let c = &self.curve;
        let x1 = c.lin1.forward(t, b, hl)?;
        let x2 = self.gt(&c.gt, t, b, x1, ag, fused)?;
        let x3 = c.lin2.forward(t, b, x2)?;
        let f2 = t.flatten(x2)?;
        let f3 = t.flatten(x3)?;
        let hg = t.concat_cols(&[f2, f3])?;
        let raw = c.main.forward(t, b, hg)?;
        let branch = c.branch.forward(t, b, f3)?;
        let main = match c.bias {
            Some(bias) => {
                let shifted = t.add(raw, b.var(bias))?;
                t.clamp(shifted, self.lower.clone(), self.upper.clone())?
            }
            None => {
                let clamped = t.clamp(raw, self.lower.clone(), self.upper.clone())?;
                let smooth = t.smooth3(clamped)?;
                t.clamp(smooth, self.lower.clone(), self.upper.clone())?
            }
        };
        Ok(CurveVars { main, branch })
    }

    /// `alpha h^L + (1 - alpha) h^0`.
    fn mix(&self, t: &mut Tape, alpha: Var, h0: Var, hl: Var) -> Result<Var, ModelError> {
        let diff = t.sub(hl, h0)?;
        let scaled = t.mul_scalar(diff, alpha)?;
        Ok(t.add(h0, scaled)?)
    }

    /// Predicted overall robustness, `(1, 1)` in (0, 1).
    pub fn rc_forward(&self, t: &mut Tape, b: &Bound, h0: Var, hl: Var, ag: &AttentionGraph) -> Result<Var, ModelError> {
        self.rc_with(t, b, h0, hl, ag, false)
    }

    fn rc_with(&self, t: &mut Tape, b: &Bound, h0: Var, hl: Var, ag: &AttentionGraph, fused: bool) -> Result<Var, ModelError> {
        let r = &self.rc;
        let mixed = self.mix(t, b.var(r.alpha), h0, hl)?;
        let h1 = self.gt(&r.gt, t, b, mixed, ag, fused)?;
        let cat = t.concat_cols(&[mixed, h1])?;
        let pooled = t.mean_rows(cat)?;
        let logit = r.out.forward(t, b, pooled)?;
        Ok(t.sigmoid(logit)?)
    }

    /// Class probabilities `(1, classes)`.
    pub fn class_forward(&self, t: &mut Tape, b: &Bound, h0: Var, hl: Var, ag: &AttentionGraph) -> Result<Var, ModelError> {
        self.class_with(t, b, h0, hl, ag, false)
    }

    fn class_with(&self, t: &mut Tape, b: &Bound, h0: Var, hl: Var, ag: &AttentionGraph, fused: bool) -> Result<Var, ModelError> {
        let c = &self.class;
        let mixed = self.mix(t, b.var(c.alpha), h0, hl)?;
        let aug = t.concat_rows(&[mixed, b.var(c.token)])?;
        let h1 = self.gt(&c.gt, t, b, aug, &ag.with_virtual_node(), fused)?;
        let real = t.slice_rows(h1, 0, ag.n)?;
        let pooled = t.mean_rows(real)?;
        let logits = c.out.forward(t, b, pooled)?;
        Ok(t.softmax_rows(logits)?)
    }

    /// `h^0` and `h^L` as plain tensors.
    pub fn features(&self, g: &Graph) -> Result<(Tensor, Tensor), ModelError> {
        let ag = self.context(g);
        let mut t = Tape::new();
        let b = self.params.bind(&mut t);
        let h0 = self.encode(&mut t, &b, &ag)?;
        let hl = self.backbone_with(&mut t, &b, h0, &ag, true)?;
        Ok((t.value(h0).clone(), t.value(hl).clone()))
    }

    pub fn predict_curve(&self, g: &Graph) -> Result<Vec<f64>, ModelError> {
        let ag = self.context(g);
        let mut t = Tape::new();
        let b = self.params.bind(&mut t);
        let h0 = self.encode(&mut t, &b, &ag)?;
        let hl = self.backbone_with(&mut t, &b, h0, &ag, true)?;
        let c = self.curve_with(&mut t, &b, hl, &ag, true)?;
        Ok(t.value(c.main).data().to_vec())
    }

    /// R_c and class probabilities; works for any graph size.
    pub fn predict_rc_class(&self, g: &Graph) -> Result<(f64, Vec<f64>), ModelError> {
        let ag = self.context(g);
        let mut t = Tape::new();
        let b = self.params.bind(&mut t);
        let h0 = self.encode(&mut t, &b, &ag)?;
        let hl = self.backbone_with(&mut t, &b, h0, &ag, true)?;
        let rc = self.rc_with(&mut t, &b, h0, hl, &ag, true)?;
        let p = self.class_with(&mut t, &b, h0, hl, &ag, true)?;
        Ok((t.value(rc).item(), t.value(p).data().to_vec()))
    }

    pub fn predict(&self, g: &Graph) -> Result<Prediction, ModelError> {
        let ag = self.context(g);
        let mut t = Tape::new();
        let b = self.params.bind(&mut t);
        let h0 = self.encode(&mut t, &b, &ag)?;
        let hl = self.backbone_with(&mut t, &b, h0, &ag, true)?;
        let c = self.curve_with(&mut t, &b, hl, &ag, true)?;
        let rc = self.rc_with(&mut t, &b, h0, hl, &ag, true)?;
        let p = self.class_with(&mut t, &b, h0, hl, &ag, true)?;
        Ok(Prediction {
            curve: t.value(c.main).data().to_vec(),
            branch: t.value(c.branch).data().to_vec(),
            rc: t.value(rc).item(),
            probs: t.value(p).data().to_vec(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        checkpoint::save(path, &self.params, &self.cfg.to_manifest())?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        checkpoint::to_bytes(&self.params, &self.cfg.to_manifest())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_checkpoint(checkpoint::load(path)?)
    }

    /// Rebuilds the model described by the checkpoint manifest and copies
    /// every parameter in by name.
    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self, ModelError> {
        let cfg = ModelConfig::from_manifest(&ck.manifest)?;
        let mut model = NrlGt::new(cfg, 0)?;
        if ck.params.len() != model.params.len() {
            return Err(ModelError::Manifest(format!(
                "checkpoint holds {} parameters, config implies {}",
                ck.params.len(),
                model.params.len()
            )));
        }
        for id in ck.params.ids() {
            let name = ck.params.name(id);
            let target = model
                .params
                .id(name)
                .map_err(|_| ModelError::Manifest(format!("unexpected parameter {name:?}")))?;
            model
                .params
                .set(target, ck.params.get(id).clone())
                .map_err(|e| ModelError::Manifest(format!("{name}: {e}")))?;
        }
        Ok(model)
    }
}
