//! The subcommands as library calls. Paths are passed in explicitly; the
//! binary resolves them from the config and flags.

use std::path::Path;

use log::info;
use nrlgt_model::{FilterKind, NrlGt};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::PipelineConfig;
use crate::dataset::{sample_seed, Dataset};
use crate::error::PipelineError;
use crate::eval::{self, EvalReport, RankRow, Timing};
use crate::report;
use crate::train::{self, CurveEpoch, CurveTraining, HeadEpoch, HeadTraining};

pub fn curve_training(cfg: &PipelineConfig, epochs: usize) -> CurveTraining {
    let t = &cfg.training;
    CurveTraining {
        epochs,
        batch_size: t.batch_size,
        lr: t.lr,
        weight_decay: t.weight_decay,
        rho: t.rho,
        seed: t.seed,
    }
}

pub fn head_training(cfg: &PipelineConfig) -> HeadTraining {
    let t = &cfg.training;
    HeadTraining {
        epochs: t.step2_epochs,
        batch_size: t.batch_size,
        lr: t.step2_lr,
        weight_decay: t.weight_decay,
        gradnorm_lr: t.gradnorm_lr,
        seed: t.seed,
    }
}

/// Checks that a checkpoint was built for this dataset's size, curve kind
/// and directedness.
pub fn check_compatible(model: &NrlGt, data: &Dataset) -> Result<(), PipelineError> {
    let c = model.config();
    let n = data.common_n()?;
    if c.n != n {
        return Err(PipelineError::Incompatible(format!("model built for N = {}, dataset has N = {n}", c.n)));
    }
    if c.filter != FilterKind::from(data.manifest.curve) {
        return Err(PipelineError::Incompatible(format!(
            "model filter {:?}, dataset curve {:?}",
            c.filter, data.manifest.curve
        )));
    }
    if c.shared_tables == data.manifest.directed {
        return Err(PipelineError::Incompatible("directedness differs between model and dataset".into()));
    }
    Ok(())
}

pub fn cmd_gen(cfg: &PipelineConfig, out: &Path) -> Result<Dataset, PipelineError> {
    let data = Dataset::generate(&cfg.generation)?;
    data.save(out)?;
    info!(
        "wrote {} records to {} ({} skipped)",
        data.len(),
        out.display(),
        data.manifest.skipped
    );
    Ok(data)
}

pub fn cmd_train_step1(
    cfg: &PipelineConfig,
    dataset: &Path,
    checkpoint: &Path,
    report_dir: &Path,
) -> Result<(NrlGt, Vec<CurveEpoch>), PipelineError> {
    let data = Dataset::load(dataset)?;
    let n = data.common_n()?;
    let mut model = NrlGt::new(cfg.model_config(n, data.manifest.curve, data.manifest.directed), cfg.training.seed)?;
    let (tr, val) = data.split(cfg.training.val_fraction, cfg.training.seed);
    let groups = train::step1_groups(cfg.training.freeze_encoder, cfg.training.freeze_backbone);
    let log = train::train_step1(
        &mut model,
        &data,
        &tr,
        &val,
        &curve_training(cfg, cfg.training.epochs),
        &groups,
        |e| info!("step1 epoch {} loss {:.6} val mean_er {:?}", e.epoch, e.train_loss, e.val_mean_er),
    )?;
    report::ensure_parent(checkpoint)?;
    model.save(checkpoint)?;
    report::write_file(report_dir.join("step1_log.csv"), &report::curve_log_csv(&log))?;
    Ok((model, log))
}

pub fn cmd_train_step2(
    cfg: &PipelineConfig,
    dataset: &Path,
    step1: &Path,
    checkpoint: &Path,
    report_dir: &Path,
) -> Result<(NrlGt, Vec<HeadEpoch>), PipelineError> {
    let data = Dataset::load(dataset)?;
    let mut model = NrlGt::load(step1)?;
    check_compatible(&model, &data)?;
    let (tr, _) = data.split(cfg.training.val_fraction, cfg.training.seed);
    let log = train::train_step2(&mut model, &data, &tr, &head_training(cfg), |e| {
        info!(
            "step2 epoch {} class {:.5} rc {:.6} w {:?}",
            e.epoch, e.class_loss, e.rc_loss, e.weights
        )
    })?;
    report::ensure_parent(checkpoint)?;
    model.save(checkpoint)?;
    report::write_file(report_dir.join("step2_log.csv"), &report::head_log_csv(&log))?;
    Ok((model, log))
}

/// Evaluates every record and times inference against simulation on the
/// first graph.
pub fn cmd_eval(
    cfg: &PipelineConfig,
    checkpoint: &Path,
    dataset: &Path,
    report_dir: &Path,
) -> Result<(EvalReport, Timing), PipelineError> {
    let data = Dataset::load(dataset)?;
    let model = NrlGt::load(checkpoint)?;
    check_compatible(&model, &data)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let rep = eval::evaluate(&model, &data, &all, cfg.evaluation.threshold(data.manifest.curve))?;
    report::write_eval(report_dir, &rep)?;
    let g = &data.samples[0].graph;
    let strategy = cfg.generation.strategy(sample_seed(cfg.generation.seed, 0));
    let timing = eval::time_inference(
        &model,
        g,
        &strategy,
        data.manifest.curve,
        data.manifest.mode,
        cfg.evaluation.timing_runs,
    )?;
    report::write_file(report_dir.join("timing.csv"), &report::timing_csv(&timing))?;
    Ok((rep, timing))
}

/// Fine-tunes the curve head at the dataset's size on a reduced share of
/// its training split and evaluates on the validation split.
pub fn cmd_transfer(
    cfg: &PipelineConfig,
    checkpoint: &Path,
    dataset: &Path,
    out_checkpoint: &Path,
    report_dir: &Path,
) -> Result<(NrlGt, EvalReport), PipelineError> {
    let data = Dataset::load(dataset)?;
    let mut model = NrlGt::load(checkpoint)?;
    let (tr, val) = data.split(cfg.training.val_fraction, cfg.training.seed);
    let mut subset = tr.clone();
    subset.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.training.seed));
    subset.truncate(((cfg.training.transfer_fraction * tr.len() as f64).ceil() as usize).max(1));
    subset.sort_unstable();
    let log = train::transfer(
        &mut model,
        &data,
        &subset,
        &val,
        &curve_training(cfg, cfg.training.transfer_epochs),
        |e| info!("transfer epoch {} loss {:.6} val mean_er {:?}", e.epoch, e.train_loss, e.val_mean_er),
    )?;
    check_compatible(&model, &data)?;
    let eval_idx = if val.is_empty() { tr } else { val };
    let rep = eval::evaluate(&model, &data, &eval_idx, cfg.evaluation.threshold(data.manifest.curve))?;
    report::ensure_parent(out_checkpoint)?;
    model.save(out_checkpoint)?;
    report::write_file(report_dir.join("transfer_log.csv"), &report::curve_log_csv(&log))?;
    report::write_eval(report_dir, &rep)?;
    Ok((model, rep))
}

/// Rank-list errors of the spectral measures and, with a checkpoint, of
/// the model's R_c predictions.
pub fn cmd_spectral(
    dataset: &Path,
    checkpoint: Option<&Path>,
    report_dir: &Path,
) -> Result<Vec<RankRow>, PipelineError> {
    let data = Dataset::load(dataset)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let model_rc = match checkpoint {
        Some(p) => {
            let model = NrlGt::load(p)?;
            Some(eval::predict_rc(&model, &data, &all)?)
        }
        None => None,
    };
    let rows = eval::spectral_compare(&data, &all, model_rc.as_deref())?;
    report::write_file(report_dir.join("rank_errors.csv"), &report::rank_csv(&rows))?;
    Ok(rows)
}
