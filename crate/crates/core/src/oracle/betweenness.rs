use std::collections::VecDeque;

use crate::graph::Graph;

/// Shortest-path betweenness of every node over the active subgraph
/// (Brandes accumulation, hop-count paths, edge weights ignored).
///
/// Directed graphs count ordered pairs along edge direction; undirected
/// graphs count each unordered pair once. Inactive nodes score 0.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut centrality = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in g.active_nodes() {
        for v in g.active_nodes() {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for (w, _) in g.out_neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }
    if !g.is_directed() {
        centrality.iter_mut().for_each(|c| *c /= 2.0);
    }
    centrality
}
