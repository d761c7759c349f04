use nrlgt_core::oracle::*;
use nrlgt_core::Graph;
use proptest::prelude::*;

/// Enumerates every shortest path explicitly.
fn brute_force(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let active: Vec<usize> = g.active_nodes().collect();
    let mut out = vec![0.0; n];
    for &s in &active {
        for &t in &active {
            if s == t || (!g.is_directed() && t < s) {
                continue;
            }
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut best = usize::MAX;
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if path.len() - 1 > best {
                    continue;
                }
                if last == t {
                    if path.len() - 1 < best {
                        best = path.len() - 1;
                        paths.clear();
                    }
                    paths.push(path);
                    continue;
                }
                for (w, _) in g.out_neighbors(last) {
                    if !path.contains(&w) {
                        let mut next = path.clone();
                        next.push(w);
                        stack.push(next);
                    }
                }
            }
            if paths.is_empty() {
                continue;
            }
            let total = paths.len() as f64;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    out[v] += 1.0 / total;
                }
            }
        }
    }
    out
}

#[test]
fn path_center_ranks_highest() {
    let g = Graph::from_pairs(5, false, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let b = betweenness(&g);
    assert_eq!(b, vec![0.0, 3.0, 4.0, 3.0, 0.0]);
    assert_eq!(b, brute_force(&g));
}

#[test]
fn complete_graph_has_zero_betweenness() {
    let pairs = (0..6).flat_map(|u| (u + 1..6).map(move |v| (u, v)));
    let g = Graph::from_pairs(6, false, pairs).unwrap();
    assert!(betweenness(&g).iter().all(|&b| b == 0.0));
}

#[test]
fn masked_nodes_score_zero_and_block_paths() {
    let mut g = Graph::from_pairs(5, false, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    g.remove_node(2).unwrap();
    assert_eq!(betweenness(&g), vec![0.0; 5]);
}

proptest! {
    #[test]
    fn matches_path_enumeration(
        n in 2usize..=8,
        directed in any::<bool>(),
        pairs in proptest::collection::vec((0usize..8, 0usize..8), 0..30),
        removed in proptest::collection::vec(0usize..8, 0..3),
    ) {
        let mut g = Graph::new(n, directed);
        for (u, v) in pairs {
            if u < n && v < n {
                let _ = g.add_edge(u, v, 1.0);
            }
        }
        for v in removed {
            if v < n && g.is_active(v) {
                g.remove_node(v).unwrap();
            }
        }
        let fast = betweenness(&g);
        let slow = brute_force(&g);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-9, "{fast:?} vs {slow:?}");
        }
    }
}
