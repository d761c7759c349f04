use super::attack::{argmax, node_scores, random_order, static_order, AttackTrace};
use super::components::{lcc_size, UnionFind};
use super::matching::{nd_exact, nd_structural};
use super::{AttackKind, AttackStrategy, ControllabilityMode, CurveKind, RobustnessCurve};
use crate::error::OracleError;
use crate::graph::Graph;

fn driver_nodes(g: &Graph, mode: ControllabilityMode) -> usize {
    match mode {
        ControllabilityMode::Structural => nd_structural(g),
        ControllabilityMode::Exact => nd_exact(g),
    }
}

/// Driver-node density `N_D(i) / (N - i)` after each removal in `trace`.
pub fn controllability_curve(
    g: &Graph,
    trace: &AttackTrace,
    mode: ControllabilityMode,
) -> Result<RobustnessCurve, OracleError> {
    let mut work = g.clone();
    let mut values = Vec::with_capacity(trace.len());
    for &v in &trace.order {
        work.remove_node(v)?;
        let remaining = work.active_count();
        values.push(driver_nodes(&work, mode) as f64 / remaining as f64);
    }
    Ok(RobustnessCurve::new(CurveKind::Controllability, values))
}

/// Largest-component fraction `N_LCC(i) / (N - i)` after each removal,
/// treating edges as undirected.
///
/// Runs the attack backwards: starting from the final remnant, removed nodes
/// are added back one at a time and merged into a union-find.
pub fn connectivity_curve(g: &Graph, trace: &AttackTrace) -> Result<RobustnessCurve, OracleError> {
    let mut work = g.clone();
    for &v in &trace.order {
        work.remove_node(v)?;
    }
    let mut uf = UnionFind::new(g.n());
    let mut largest = 0;
    for (u, v, _) in work.active_edges() {
        uf.union(u, v);
    }
    for v in work.active_nodes() {
        largest = largest.max(uf.set_size(v));
    }
    let mut values = vec![0.0; trace.len()];
    for (i, &v) in trace.order.iter().enumerate().rev() {
        values[i] = largest as f64 / work.active_count() as f64;
        work.restore_node(v);
        for u in work.undirected_neighbors(v) {
            uf.union(u, v);
        }
        largest = largest.max(uf.set_size(v));
    }
    Ok(RobustnessCurve::new(CurveKind::Connectivity, values))
}

/// Per-node curve of the requested kind.
pub fn simulate(
    g: &Graph,
    trace: &AttackTrace,
    kind: CurveKind,
    mode: ControllabilityMode,
) -> Result<RobustnessCurve, OracleError> {
    match kind {
        CurveKind::Controllability => controllability_curve(g, trace, mode),
        CurveKind::Connectivity => connectivity_curve(g, trace),
    }
}

/// Nodes removed per batch: `ceil(fraction * n)`.
pub fn batch_size(n: usize, fraction: f64) -> Result<usize, OracleError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(OracleError::FractionOutOfRange(fraction));
    }
    // Guard against products like 0.07 * 100 = 7.000000000000001.
    Ok(((fraction * n as f64) - 1e-9).ceil().max(1.0) as usize)
}

/// Robustness after each batch of `ceil(fraction * N)` removals, stopping
/// once no more than one batch of nodes remains.
///
/// Random batches are consecutive chunks of the same shuffle a per-node
/// random attack uses; targeted batches take the top scorers of the current
/// remnant (or of the initial graph when `recompute` is off).
pub fn batch_curve(
    g: &Graph,
    strat: &AttackStrategy,
    fraction: f64,
    kind: CurveKind,
    mode: ControllabilityMode,
) -> Result<RobustnessCurve, OracleError> {
    let batch = batch_size(g.active_count(), fraction)?;
    let mut work = g.clone();
    let fixed_order = match strat.kind {
        AttackKind::Random => Some(random_order(g, strat.seed)),
        kind if !strat.recompute => Some(static_order(g, kind)),
        _ => None,
    };
    let mut cursor = 0;
    let mut values = Vec::new();
    while work.active_count() > batch {
        let chosen: Vec<usize> = match &fixed_order {
            Some(order) => {
                cursor += batch;
                order[cursor - batch..cursor].to_vec()
            }
            None => {
                let scores = node_scores(&work, strat.kind);
                let mut taken = vec![false; work.n()];
                let mut chosen = Vec::with_capacity(batch);
                for _ in 0..batch {
                    let v = argmax(&work, &scores, |v| !taken[v]).expect("remnant exceeds batch");
                    taken[v] = true;
                    chosen.push(v);
                }
                chosen
            }
        };
        for v in chosen {
            work.remove_node(v)?;
        }
        let remaining = work.active_count() as f64;
        let value = match kind {
            CurveKind::Controllability => driver_nodes(&work, mode) as f64,
            CurveKind::Connectivity => lcc_size(&work) as f64,
        };
        values.push(value / remaining);
    }
    Ok(RobustnessCurve::new(kind, values))
}
