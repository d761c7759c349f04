use std::fmt::Write as _;

use super::{AttackKind, RobustnessCurve};
use crate::error::OracleError;
use crate::generators::Topology;

/// One simulated sample: `topology,N,directed,attack,R_c,v_1,...,v_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub topology: Topology,
    pub n: usize,
    pub directed: bool,
    pub attack: AttackKind,
    pub rc: f64,
    pub curve: Vec<f64>,
}

impl DatasetRecord {
    pub fn to_line(&self) -> String {
        let mut line = format!(
            "{},{},{},{},{}",
            self.topology, self.n, self.directed, self.attack, self.rc
        );
        for v in &self.curve {
            write!(line, ",{v}").unwrap();
        }
        line
    }

    pub fn from_line(line: &str) -> Result<Self, OracleError> {
        let bad = |what: &str| OracleError::MalformedRecord(format!("{what} in {:.60}", line));
        let mut fields = line.trim().split(',');
        let topology = fields
            .next()
            .ok_or_else(|| bad("missing topology"))?
            .parse::<Topology>()
            .map_err(|_| bad("bad topology"))?;
        let n = fields
            .next()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| bad("bad node count"))?;
        let directed = fields
            .next()
            .and_then(|s| s.trim().parse::<bool>().ok())
            .ok_or_else(|| bad("bad directed flag"))?;
        let attack = fields
            .next()
            .ok_or_else(|| bad("missing attack"))?
            .parse::<AttackKind>()?;
        let rc = fields
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| bad("bad R_c"))?;
        let curve = fields
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad("bad curve value")))
            .collect::<Result<Vec<f64>, _>>()?;
        if curve.len() + 1 != n {
            return Err(bad(&format!("curve has {} values for N = {n}", curve.len())));
        }
        Ok(DatasetRecord {
            topology,
            n,
            directed,
            attack,
            rc,
            curve,
        })
    }
}

/// Two-column `i,value` CSV with a header row.
pub fn curve_csv(curve: &RobustnessCurve) -> String {
    let mut out = String::from("i,value\n");
    for (i, v) in curve.values.iter().enumerate() {
        writeln!(out, "{},{v}", i + 1).unwrap();
    }
    out
}
