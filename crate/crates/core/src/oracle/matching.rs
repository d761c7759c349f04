use std::collections::VecDeque;

use crate::graph::Graph;
use crate::spectral::{matrix_rank, DenseMatrix};

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub size: usize,
    /// Right vertex matched to each left vertex.
    pub left: Vec<Option<usize>>,
    /// Left vertex matched to each right vertex.
    pub right: Vec<Option<usize>>,
}

/// Maximum matching of a bipartite graph given as left-to-right adjacency
/// (Hopcroft-Karp, O(E sqrt V)).
pub fn max_bipartite_matching(adj: &[Vec<usize>], n_right: usize) -> Matching {
    let n_left = adj.len();
    let mut pair_left = vec![NIL; n_left];
    let mut pair_right = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];
    let mut next = vec![0usize; n_left];
    let mut queue = VecDeque::new();
    let mut size = 0;

    loop {
        // Layer free left vertices by alternating-path distance.
        queue.clear();
        for u in 0..n_left {
            if pair_left[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = NIL;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = pair_right[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == NIL {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0);
        for u in 0..n_left {
            if pair_left[u] == NIL
                && augment(u, adj, &mut pair_left, &mut pair_right, &mut dist, &mut next)
            {
                size += 1;
            }
        }
    }

    let opt = |x: usize| (x != NIL).then_some(x);
    Matching {
        size,
        left: pair_left.into_iter().map(opt).collect(),
        right: pair_right.into_iter().map(opt).collect(),
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    pair_left: &mut [usize],
    pair_right: &mut [usize],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let w = pair_right[v];
        if w == NIL
            || (dist[w] == dist[u] + 1 && augment(w, adj, pair_left, pair_right, dist, next))
        {
            pair_left[u] = v;
            pair_right[v] = u;
            return true;
        }
    }
    dist[u] = NIL;
    false
}

/// Driver nodes under structural controllability: `max(N - |M*|, 1)` over
/// the active subgraph. Undirected edges act as two directed edges.
pub fn nd_structural(g: &Graph) -> usize {
    let (sub, _) = g.active_subgraph();
    let adj: Vec<Vec<usize>> = (0..sub.n())
        .map(|u| sub.out_neighbors(u).map(|(v, _)| v).collect())
        .collect();
    let m = max_bipartite_matching(&adj, sub.n());
    sub.n().saturating_sub(m.size).max(1)
}

/// Driver nodes under exact controllability: `max(N - rank(A), 1)` with A
/// the weighted transposed adjacency of the active subgraph.
pub fn nd_exact(g: &Graph) -> usize {
    let (sub, _) = g.active_subgraph();
    let n = sub.n();
    let mut a = DenseMatrix::zeros(n, n);
    for (u, v, w) in sub.edges() {
        a.set(v, u, w);
        if !sub.is_directed() {
            a.set(u, v, w);
        }
    }
    let scale = a.max_abs();
    let rank = if scale == 0.0 {
        0
    } else {
        matrix_rank(&a, 1e-9 * scale)
    };
    n.saturating_sub(rank).max(1)
}
