use std::sync::Arc;

use nrlgt_core::oracle::error_report;
use nrlgt_core::{CurveKind, RobustnessCurve};
use nrlgt_diff::{Adam, Tape, Tensor};
use nrlgt_model::loss::{class_loss, rc_loss, rmse_weights, step1_loss};
use nrlgt_model::model::{BACKBONE, CLASS, CURVE, ENCODER, RC};
use nrlgt_model::{AttentionGraph, GradNorm, NrlGt};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{sample_seed, Dataset};
use crate::error::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTraining {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub rho: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadTraining {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub gradnorm_lr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveEpoch {
    pub epoch: usize,
    pub train_loss: f64,
    /// Mean curve error on the validation split, if there is one.
    pub val_mean_er: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadEpoch {
    pub epoch: usize,
    pub class_loss: f64,
    pub rc_loss: f64,
    /// Grad-Norm weights `(w_c, w_R)` after the epoch's last batch.
    pub weights: [f64; 2],
}

/// Parameter groups trained in step 1.
pub fn step1_groups(freeze_encoder: bool, freeze_backbone: bool) -> Vec<&'static str> {
    let mut g = vec![CURVE];
    if !freeze_encoder {
        g.push(ENCODER);
    }
    if !freeze_backbone {
        g.push(BACKBONE);
    }
    g
}

fn batches(order: &[usize], size: usize) -> impl Iterator<Item = &[usize]> {
    order.chunks(size)
}

fn shuffled(idx: &[usize], seed: u64, epoch: usize) -> Vec<usize> {
    let mut order = idx.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(sample_seed(seed, epoch)));
    order
}

/// Sums per-sample gradients in order and divides by the count.
fn mean_grads(parts: Vec<Vec<Tensor>>) -> Vec<Tensor> {
    let k = parts.len() as f64;
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("non-empty batch");
    for g in it {
        nrlgt_diff::accumulate(&mut acc, &g);
    }
    for t in &mut acc {
        t.data_mut().iter_mut().for_each(|x| *x /= k);
    }
    acc
}

/// Mean curve error of the model's main output over `idx`.
pub fn curve_mean_er(model: &NrlGt, data: &Dataset, idx: &[usize], kind: CurveKind) -> Result<f64, PipelineError> {
    if idx.is_empty() {
        return Ok(0.0);
    }
    let errs = idx
        .par_iter()
        .map(|&i| {
            let s = &data.samples[i];
            let pred = model.predict_curve(&s.graph)?;
            let truth = RobustnessCurve::new(kind, s.record.curve.clone());
            Ok(error_report(&RobustnessCurve::new(kind, pred), &truth)?.mean_er)
        })
        .collect::<Result<Vec<f64>, PipelineError>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Trains the unfrozen parameters on the step-1 curve loss. Only the
/// parameter freezing already set on `model` is used.
pub fn train_curve(
    model: &mut NrlGt,
    data: &Dataset,
    train: &[usize],
    val: &[usize],
    opts: &CurveTraining,
    mut on_epoch: impl FnMut(&CurveEpoch),
) -> Result<Vec<CurveEpoch>, PipelineError> {
    if train.is_empty() {
        return Err(PipelineError::Dataset("no training records".into()));
    }
    let n = model.config().n;
    if let Some(s) = train.iter().chain(val).map(|&i| &data.samples[i]).find(|s| s.record.n != n) {
        return Err(PipelineError::MixedSizes(n, s.record.n));
    }
    let kind = data.manifest.curve;
    let weights: Arc<[f64]> = rmse_weights(n).into();
    let contexts: Vec<AttentionGraph> = data.samples.iter().map(|s| model.context(&s.graph)).collect();
    let mut adam = Adam::new(opts.lr, opts.weight_decay);
    let mut log = Vec::with_capacity(opts.epochs);
    for epoch in 1..=opts.epochs {
        let order = shuffled(train, opts.seed, epoch);
        let mut total = 0.0;
        for batch in batches(&order, opts.batch_size) {
            let m: &NrlGt = model;
            let parts = batch
                .par_iter()
                .map(|&i| {
                    let ag = &contexts[i];
                    let mut t = Tape::new();
                    let b = m.params.bind(&mut t);
                    let h0 = m.encode(&mut t, &b, ag)?;
                    let hl = m.run_backbone(&mut t, &b, h0, ag)?;
                    let c = m.curve_forward(&mut t, &b, hl, ag)?;
                    let loss = step1_loss(&mut t, c.main, c.branch, &data.samples[i].record.curve, &weights, opts.rho)?;
                    let value = t.value(loss).item();
                    let g = t.backward(loss)?;
                    Ok((value, b.collect(&g, &m.params)))
                })
                .collect::<Result<Vec<_>, PipelineError>>()?;
            let (losses, grads): (Vec<f64>, Vec<_>) = parts.into_iter().unzip();
            total += losses.iter().sum::<f64>();
            adam.step(&mut model.params, &mean_grads(grads));
        }
        let val_mean_er = if val.is_empty() { None } else { Some(curve_mean_er(model, data, val, kind)?) };
        let entry = CurveEpoch {
            epoch,
            train_loss: total / train.len() as f64,
            val_mean_er,
        };
        on_epoch(&entry);
        log.push(entry);
    }
    Ok(log)
}

/// Step 1: trains encoder, backbone and curve head (minus any frozen
/// groups), starting the curve filter at the mean training curve.
pub fn train_step1(
    model: &mut NrlGt,
    data: &Dataset,
    train: &[usize],
    val: &[usize],
    opts: &CurveTraining,
    groups: &[&str],
    on_epoch: impl FnMut(&CurveEpoch),
) -> Result<Vec<CurveEpoch>, PipelineError> {
    if train.is_empty() {
        return Err(PipelineError::Dataset("no training records".into()));
    }
    model.set_curve_prior(&data.mean_curve(train))?;
    model.train_only(groups);
    train_curve(model, data, train, val, opts, on_epoch)
}

/// Resizes the curve head to the dataset's node count and fine-tunes only
/// the curve head; encoder, backbone and the other heads stay fixed.
pub fn transfer(
    model: &mut NrlGt,
    data: &Dataset,
    train: &[usize],
    val: &[usize],
    opts: &CurveTraining,
    on_epoch: impl FnMut(&CurveEpoch),
) -> Result<Vec<CurveEpoch>, PipelineError> {
    let n = data.common_n()?;
    model.resize_curve_head(n, opts.seed)?;
    train_step1(model, data, train, val, opts, &[CURVE], on_epoch)
}

struct HeadSample {
    losses: [f64; 2],
    norms: [f64; 2],
    grads: [Vec<Tensor>; 2],
}

/// Step 2: trains the R_c and classification heads on frozen features with
/// Grad-Norm task weights. Task gradient norms are taken with respect to
/// `h^L`, the representation both heads share.
pub fn train_step2(
    model: &mut NrlGt,
    data: &Dataset,
    train: &[usize],
    opts: &HeadTraining,
    mut on_epoch: impl FnMut(&HeadEpoch),
) -> Result<Vec<HeadEpoch>, PipelineError> {
    if train.is_empty() {
        return Err(PipelineError::Dataset("no training records".into()));
    }
    model.train_only(&[RC, CLASS]);
    let prepared = train
        .par_iter()
        .map(|&i| {
            let g = &data.samples[i].graph;
            let (h0, hl) = model.features(g)?;
            Ok((i, model.context(g), h0, hl))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let pos: Vec<usize> = (0..prepared.len()).collect();
    let mut adam = Adam::new(opts.lr, opts.weight_decay);
    let mut gn = GradNorm::new(model.config().alpha_gn, opts.gradnorm_lr);
    let mut log = Vec::with_capacity(opts.epochs);
    for epoch in 1..=opts.epochs {
        let order = shuffled(&pos, opts.seed, epoch);
        let mut sums = [0.0; 2];
        for batch in batches(&order, opts.batch_size) {
            let m: &NrlGt = model;
            let parts = batch
                .par_iter()
                .map(|&p| {
                    let (i, ag, h0, hl) = &prepared[p];
                    let rec = &data.samples[*i].record;
                    let mut t = Tape::new();
                    let b = m.params.bind(&mut t);
                    let h0 = t.constant(h0.clone());
                    let hl = t.leaf(hl.clone(), true);
                    let rc = m.rc_forward(&mut t, &b, h0, hl, ag)?;
                    let probs = m.class_forward(&mut t, &b, h0, hl, ag)?;
                    let lc = class_loss(&mut t, probs, rec.topology.index())?;
                    let lr = rc_loss(&mut t, rc, rec.rc)?;
                    let gc = t.gradients(lc)?;
                    let gr = t.gradients(lr)?;
                    let norm = |g: &nrlgt_diff::Gradients| g.get(hl).map_or(0.0, Tensor::norm);
                    Ok(HeadSample {
                        losses: [t.value(lc).item(), t.value(lr).item()],
                        norms: [norm(&gc), norm(&gr)],
                        grads: [b.collect(&gc, &m.params), b.collect(&gr, &m.params)],
                    })
                })
                .collect::<Result<Vec<_>, PipelineError>>()?;
            let k = parts.len() as f64;
            let mut losses = [0.0; 2];
            let mut norms = [0.0; 2];
            for s in &parts {
                for j in 0..2 {
                    losses[j] += s.losses[j] / k;
                    norms[j] += s.norms[j] / k;
                }
            }
            let w = gn.weights;
            let mut combined = model.params.zeros_like();
            for s in &parts {
                for (acc, (gc, gr)) in combined.iter_mut().zip(s.grads[0].iter().zip(&s.grads[1])) {
                    acc.axpy(w[0] / k, gc);
                    acc.axpy(w[1] / k, gr);
                }
            }
            adam.step(&mut model.params, &combined);
            gn.update(losses, norms);
            for j in 0..2 {
                sums[j] += losses[j] * k;
            }
        }
        let entry = HeadEpoch {
            epoch,
            class_loss: sums[0] / prepared.len() as f64,
            rc_loss: sums[1] / prepared.len() as f64,
            weights: gn.weights,
        };
        on_epoch(&entry);
        log.push(entry);
    }
    Ok(log)
}
