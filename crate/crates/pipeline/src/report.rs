use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::PipelineError;
use crate::eval::{EvalReport, RankRow, Timing};
use crate::train::{CurveEpoch, HeadEpoch};

pub fn ensure_parent(path: &Path) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    Ok(())
}

pub fn write_file(path: impl AsRef<Path>, text: &str) -> Result<(), PipelineError> {
    let path = path.as_ref();
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub fn curve_log_csv(log: &[CurveEpoch]) -> String {
    let mut out = String::from("epoch,train_loss,val_mean_er\n");
    for e in log {
        let val = e.val_mean_er.map_or(String::new(), |v| v.to_string());
        writeln!(out, "{},{},{}", e.epoch, e.train_loss, val).unwrap();
    }
    out
}

pub fn head_log_csv(log: &[HeadEpoch]) -> String {
    let mut out = String::from("epoch,class_loss,rc_loss,w_c,w_r\n");
    for e in log {
        writeln!(out, "{},{},{},{},{}", e.epoch, e.class_loss, e.rc_loss, e.weights[0], e.weights[1]).unwrap();
    }
    out
}

/// Per-topology summary with pass/fail against the threshold.
pub fn summary_csv(r: &EvalReport) -> String {
    let mut out = String::from("topology,count,mean_er,threshold,pass,rc_error,accuracy\n");
    for row in &r.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.topology, row.count, row.mean_er, r.threshold, row.pass, row.rc_error, row.accuracy
        )
        .unwrap();
    }
    out
}

pub fn records_csv(r: &EvalReport) -> String {
    let mut out = String::from("id,topology,mean_er,rc_true,rc_pred,rc_error,label,predicted\n");
    for rec in &r.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            rec.id,
            rec.topology,
            rec.mean_er,
            rec.rc_true,
            rec.rc_pred,
            rec.rc_error(),
            rec.topology.index(),
            rec.predicted_class
        )
        .unwrap();
    }
    out
}

/// Long-form per-record error curves.
pub fn error_curves_csv(r: &EvalReport) -> String {
    let mut out = String::from("id,i,er\n");
    for rec in &r.records {
        for (i, e) in rec.er.iter().enumerate() {
            writeln!(out, "{},{},{}", rec.id, i + 1, e).unwrap();
        }
    }
    out
}

pub fn timing_csv(t: &Timing) -> String {
    format!(
        "runs,inference_median_s,simulation_median_s,speedup\n{},{},{},{}\n",
        t.runs,
        t.inference,
        t.simulation,
        t.speedup()
    )
}

pub fn rank_csv(rows: &[RankRow]) -> String {
    let mut out = String::from("method");
    if let Some(first) = rows.first() {
        for (t, _) in &first.per_topology {
            write!(out, ",{t}").unwrap();
        }
    }
    out.push_str(",overall\n");
    for row in rows {
        out.push_str(&row.method);
        for (_, e) in &row.per_topology {
            write!(out, ",{e}").unwrap();
        }
        writeln!(out, ",{}", row.overall).unwrap();
    }
    out
}

/// Writes the summary, per-record table and error curves into `dir`.
pub fn write_eval(dir: impl AsRef<Path>, r: &EvalReport) -> Result<(), PipelineError> {
    let dir = dir.as_ref();
    write_file(dir.join("summary.csv"), &summary_csv(r))?;
    write_file(dir.join("records.csv"), &records_csv(r))?;
    write_file(dir.join("error_curves.csv"), &error_curves_csv(r))
}
