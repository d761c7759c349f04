use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::betweenness::betweenness;
use super::{AttackKind, AttackStrategy};
use crate::graph::Graph;

/// Removal order produced by an attack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackTrace {
    pub order: Vec<usize>,
}

impl AttackTrace {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Plans `n - 1` removals over the active nodes of `g`, leaving one survivor.
///
/// Targeted attacks remove the node with the largest score and break ties
/// by the smallest id. Degree is in-degree plus out-degree for directed
/// graphs; betweenness uses hop-count shortest paths.
pub fn plan_attack(g: &Graph, strat: &AttackStrategy) -> AttackTrace {
    let n = g.active_count();
    let steps = n.saturating_sub(1);
    let order = match strat.kind {
        AttackKind::Random => {
            let mut order = random_order(g, strat.seed);
            order.truncate(steps);
            order
        }
        _ if !strat.recompute => {
            let mut order = static_order(g, strat.kind);
            order.truncate(steps);
            order
        }
        kind => {
            let mut work = g.clone();
            let mut order = Vec::with_capacity(steps);
            for _ in 0..steps {
                let scores = node_scores(&work, kind);
                let v = argmax(&work, &scores, |_| true).expect("an active node remains");
                work.remove_node(v).expect("argmax returns an active node");
                order.push(v);
            }
            order
        }
    };
    AttackTrace { order }
}

/// Active nodes in random order; shared by per-node and batch attacks.
pub(crate) fn random_order(g: &Graph, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = g.active_nodes().collect();
    order.shuffle(&mut rng);
    order
}

/// All active nodes ranked once by their initial score.
pub(crate) fn static_order(g: &Graph, kind: AttackKind) -> Vec<usize> {
    let scores = node_scores(g, kind);
    let mut taken = vec![false; g.n()];
    let mut order = Vec::with_capacity(g.active_count());
    while order.len() < g.active_count() {
        let v = argmax(g, &scores, |v| !taken[v]).expect("unranked active node remains");
        taken[v] = true;
        order.push(v);
    }
    order
}

pub(crate) fn node_scores(g: &Graph, kind: AttackKind) -> Vec<f64> {
    match kind {
        AttackKind::TargetedBetweenness => betweenness(g),
        _ => g
            .degrees()
            .total(g.is_directed())
            .into_iter()
            .map(|d| d as f64)
            .collect(),
    }
}

/// Active node accepted by `eligible` with the largest score; smallest id on ties.
/// Scores within a relative 1e-9 of each other count as tied so that
/// betweenness rounding noise cannot reorder symmetric nodes.
pub(crate) fn argmax<F>(g: &Graph, scores: &[f64], eligible: F) -> Option<usize>
where
    F: Fn(usize) -> bool,
{
    let mut best: Option<(usize, f64)> = None;
    for v in g.active_nodes() {
        if !eligible(v) {
            continue;
        }
        let s = scores[v];
        match best {
            Some((_, b)) if s <= b + 1e-9 * b.abs().max(1.0) => {}
            _ => best = Some((v, s)),
        }
    }
    best.map(|(v, _)| v)
}
