use std::time::Instant;

use nrlgt_core::oracle::{error_report, plan_attack, rank_list_error, simulate};
use nrlgt_core::{
    spectral_measures, AttackStrategy, ControllabilityMode, CurveKind, Graph, RobustnessCurve, Topology,
};
use nrlgt_model::{NrlGt, Prediction};
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::PipelineError;

/// Per-record outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordEval {
    pub id: usize,
    pub topology: Topology,
    pub er: Vec<f64>,
    pub mean_er: f64,
    pub rc_true: f64,
    pub rc_pred: f64,
    pub predicted_class: usize,
}

impl RecordEval {
    pub fn rc_error(&self) -> f64 {
        (self.rc_pred - self.rc_true).abs()
    }

    pub fn correct(&self) -> bool {
        self.predicted_class == self.topology.index()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyRow {
    pub topology: Topology,
    pub count: usize,
    pub mean_er: f64,
    pub rc_error: f64,
    pub accuracy: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub kind: CurveKind,
    pub threshold: f64,
    pub records: Vec<RecordEval>,
    pub rows: Vec<TopologyRow>,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

impl EvalReport {
    /// Scores predictions (aligned with `idx`) against the stored truth.
    pub fn from_predictions(
        data: &Dataset,
        idx: &[usize],
        preds: &[Prediction],
        threshold: f64,
    ) -> Result<EvalReport, PipelineError> {
        let kind = data.manifest.curve;
        let records = idx
            .iter()
            .zip(preds)
            .map(|(&i, p)| {
                let s = &data.samples[i];
                let truth = RobustnessCurve::new(kind, s.record.curve.clone());
                let rep = error_report(&RobustnessCurve::new(kind, p.curve.clone()), &truth)?;
                Ok(RecordEval {
                    id: s.id,
                    topology: s.record.topology,
                    er: rep.er,
                    mean_er: rep.mean_er,
                    rc_true: s.record.rc,
                    rc_pred: p.rc,
                    predicted_class: p.class(),
                })
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        let mut topologies: Vec<Topology> = records.iter().map(|r| r.topology).collect();
        topologies.sort();
        topologies.dedup();
        let rows = topologies
            .into_iter()
            .map(|topology| {
                let rs: Vec<&RecordEval> = records.iter().filter(|r| r.topology == topology).collect();
                let mean_er = mean(rs.iter().map(|r| r.mean_er));
                TopologyRow {
                    topology,
                    count: rs.len(),
                    mean_er,
                    rc_error: mean(rs.iter().map(|r| r.rc_error())),
                    accuracy: mean(rs.iter().map(|r| if r.correct() { 1.0 } else { 0.0 })),
                    pass: mean_er <= threshold,
                }
            })
            .collect();
        Ok(EvalReport {
            kind,
            threshold,
            records,
            rows,
        })
    }

    pub fn mean_er(&self) -> f64 {
        mean(self.records.iter().map(|r| r.mean_er))
    }

    pub fn rc_error(&self) -> f64 {
        mean(self.records.iter().map(RecordEval::rc_error))
    }

    pub fn accuracy(&self) -> f64 {
        mean(self.records.iter().map(|r| if r.correct() { 1.0 } else { 0.0 }))
    }
}

pub fn predict_all(model: &NrlGt, data: &Dataset, idx: &[usize]) -> Result<Vec<Prediction>, PipelineError> {
    idx.par_iter()
        .map(|&i| Ok(model.predict(&data.samples[i].graph)?))
        .collect()
}

/// R_c predictions only; works at any graph size.
pub fn predict_rc(model: &NrlGt, data: &Dataset, idx: &[usize]) -> Result<Vec<f64>, PipelineError> {
    idx.par_iter()
        .map(|&i| Ok(model.predict_rc_class(&data.samples[i].graph)?.0))
        .collect()
}

/// Runs every head on the selected records and scores them.
pub fn evaluate(model: &NrlGt, data: &Dataset, idx: &[usize], threshold: f64) -> Result<EvalReport, PipelineError> {
    let preds = predict_all(model, data, idx)?;
    EvalReport::from_predictions(data, idx, &preds, threshold)
}

/// Median wall-clock seconds of model inference and of oracle simulation
/// (attack planning plus curve) on the same graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub runs: usize,
    pub inference: f64,
    pub simulation: f64,
}

impl Timing {
    pub fn speedup(&self) -> f64 {
        self.simulation / self.inference
    }
}

fn median_secs(runs: usize, mut f: impl FnMut() -> Result<(), PipelineError>) -> Result<f64, PipelineError> {
    f()?;
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let m = times.len() / 2;
    Ok(if times.len() % 2 == 1 { times[m] } else { 0.5 * (times[m - 1] + times[m]) })
}

pub fn time_inference(
    model: &NrlGt,
    g: &Graph,
    strategy: &AttackStrategy,
    kind: CurveKind,
    mode: ControllabilityMode,
    runs: usize,
) -> Result<Timing, PipelineError> {
    let inference = median_secs(runs, || {
        std::hint::black_box(model.predict_curve(g)?);
        Ok(())
    })?;
    let simulation = median_secs(runs, || {
        let trace = plan_attack(g, strategy);
        std::hint::black_box(simulate(g, &trace, kind, mode)?);
        Ok(())
    })?;
    Ok(Timing {
        runs,
        inference,
        simulation,
    })
}

pub const SPECTRAL_METHODS: [&str; 4] = ["SR", "SG", "NC", "AC"];
pub const MODEL_METHOD: &str = "NRL-GT";

/// Rank-list error of one scoring method: per topology, then the mean of
/// the per-topology values.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub method: String,
    pub per_topology: Vec<(Topology, f64)>,
    pub overall: f64,
}

/// Ranks graphs within each topology by SR, SG, NC, AC and (if given) the
/// model's R_c predictions, against the true R_c ordering. For
/// controllability, where a lower R_c means more robust, spectral scores
/// are negated so all methods rank in the same direction.
pub fn spectral_compare(
    data: &Dataset,
    idx: &[usize],
    model_rc: Option<&[f64]>,
) -> Result<Vec<RankRow>, PipelineError> {
    let sign = match data.manifest.curve {
        CurveKind::Connectivity => 1.0,
        CurveKind::Controllability => -1.0,
    };
    let measures: Vec<_> = idx.par_iter().map(|&i| spectral_measures(&data.samples[i].graph)).collect();
    let mut methods: Vec<(String, Vec<f64>)> = SPECTRAL_METHODS
        .iter()
        .map(|&name| {
            let scores = measures
                .iter()
                .map(|m| {
                    sign * match name {
                        "SR" => m.sr,
                        "SG" => m.sg,
                        "NC" => m.nc,
                        _ => m.ac,
                    }
                })
                .collect();
            (name.to_string(), scores)
        })
        .collect();
    if let Some(rc) = model_rc {
        if rc.len() != idx.len() {
            return Err(PipelineError::Dataset(format!("{} model scores for {} records", rc.len(), idx.len())));
        }
        methods.push((MODEL_METHOD.to_string(), rc.to_vec()));
    }
    let truth: Vec<f64> = idx.iter().map(|&i| data.samples[i].record.rc).collect();
    let mut topologies: Vec<Topology> = idx.iter().map(|&i| data.samples[i].record.topology).collect();
    topologies.sort();
    topologies.dedup();
    methods
        .into_iter()
        .map(|(method, scores)| {
            let per_topology = topologies
                .iter()
                .map(|&t| {
                    let pos: Vec<usize> = (0..idx.len()).filter(|&p| data.samples[idx[p]].record.topology == t).collect();
                    let pred: Vec<f64> = pos.iter().map(|&p| scores[p]).collect();
                    let tru: Vec<f64> = pos.iter().map(|&p| truth[p]).collect();
                    Ok((t, rank_list_error(&pred, &tru)?))
                })
                .collect::<Result<Vec<_>, PipelineError>>()?;
            let overall = mean(per_topology.iter().map(|p| p.1));
            Ok(RankRow {
                method,
                per_topology,
                overall,
            })
        })
        .collect()
}
