use std::sync::Arc;

use nrlgt_core::Graph;

/// Attention neighborhoods and degree lookups of one graph.
///
/// Edge `e` carries a message from `src[e]` to `dst[e]`. Every node attends
/// over itself plus its in-neighbors (directed) or neighbors (undirected);
/// edges are sorted by `(dst, src)`.
#[derive(Debug, Clone)]
pub struct AttentionGraph {
    pub n: usize,
    pub src: Arc<[usize]>,
    pub dst: Arc<[usize]>,
    pub deg_in: Arc<[usize]>,
    pub deg_out: Arc<[usize]>,
}

impl AttentionGraph {
    /// Degrees are clamped to `max_degree`. Edge weights play no part.
    pub fn new(g: &Graph, max_degree: usize) -> Self {
        let n = g.n();
        let mut src = Vec::new();
        let mut dst = Vec::new();
        for i in 0..n {
            let mut nb: Vec<usize> = if g.is_directed() {
                g.in_neighbors(i).map(|(j, _)| j).collect()
            } else {
                g.undirected_neighbors(i)
            };
            nb.push(i);
            nb.sort_unstable();
            for j in nb {
                src.push(j);
                dst.push(i);
            }
        }
        let deg = g.degrees();
        let clamp = |v: Vec<usize>| -> Arc<[usize]> { v.into_iter().map(|d| d.min(max_degree)).collect() };
        AttentionGraph {
            n,
            src: src.into(),
            dst: dst.into(),
            deg_in: clamp(deg.in_deg),
            deg_out: clamp(deg.out_deg),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.src.len()
    }

    /// Adds node `n` linked both ways to every node.
    pub fn with_virtual_node(&self) -> AttentionGraph {
        let v = self.n;
        let mut src = Vec::with_capacity(self.src.len() + 2 * v + 1);
        let mut dst = Vec::with_capacity(src.capacity());
        let mut e = 0;
        for i in 0..v {
            while e < self.dst.len() && self.dst[e] == i {
                src.push(self.src[e]);
                dst.push(i);
                e += 1;
            }
            src.push(v);
            dst.push(i);
        }
        for i in 0..=v {
            src.push(i);
            dst.push(v);
        }
        // The virtual node takes a learned feature, never a degree lookup.
        let mut deg_in = self.deg_in.to_vec();
        let mut deg_out = self.deg_out.to_vec();
        deg_in.push(0);
        deg_out.push(0);
        AttentionGraph {
            n: v + 1,
            src: src.into(),
            dst: dst.into(),
            deg_in: deg_in.into(),
            deg_out: deg_out.into(),
        }
    }
}
