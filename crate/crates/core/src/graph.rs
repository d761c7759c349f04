//! Simple graphs with dense node ids and a liveness mask.
//!
//! Attack simulations remove nodes by clearing their bit in the mask; every
//! neighbor query and degree count skips inactive endpoints, so the adjacency
//! lists are never rebuilt while an attack runs.

use crate::error::GraphError;

/// Per-node degree counts over the active subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector {
    pub in_deg: Vec<usize>,
    pub out_deg: Vec<usize>,
}

impl DegreeVector {
    /// In-degree plus out-degree for directed graphs, plain degree otherwise.
    pub fn total(&self, directed: bool) -> Vec<usize> {
        if directed {
            self.in_deg
                .iter()
                .zip(&self.out_deg)
                .map(|(a, b)| a + b)
                .collect()
        } else {
            self.out_deg.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    // Sorted by neighbor id. For undirected graphs both lists hold the same
    // neighbor set.
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
    active: Vec<bool>,
    active_count: usize,
}

impl Graph {
    pub fn new(n: usize, directed: bool) -> Self {
        Graph {
            n,
            directed,
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            edge_count: 0,
            active: vec![true; n],
            active_count: n,
        }
    }

    /// Builds a graph from `(u, v, weight)` triples.
    pub fn from_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Graph::new(n, directed);
        for (u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    /// Builds an unweighted graph from `(u, v)` pairs.
    pub fn from_pairs<I>(n: usize, directed: bool, pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, directed, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<(), GraphError> {
        if u >= self.n || v >= self.n {
            return Err(GraphError::NodeOutOfRange {
                node: u.max(v),
                n: self.n,
            });
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(GraphError::InvalidWeight { u, v, weight });
        }
        let pos = match self.out_adj[u].binary_search_by_key(&v, |&(x, _)| x) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u, v)),
            Err(pos) => pos,
        };
        self.out_adj[u].insert(pos, (v, weight));
        if self.directed {
            insert_sorted(&mut self.in_adj[v], u, weight);
        } else {
            insert_sorted(&mut self.out_adj[v], u, weight);
            insert_sorted(&mut self.in_adj[v], u, weight);
            insert_sorted(&mut self.in_adj[u], v, weight);
        }
        self.edge_count += 1;
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n
            && self.out_adj[u]
                .binary_search_by_key(&v, |&(x, _)| x)
                .is_ok()
    }

    /// Node count including inactive nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Edge count of the full graph, ignoring the mask. Undirected edges count once.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn is_active(&self, v: usize) -> bool {
        self.active[v]
    }

    pub fn is_fully_active(&self) -> bool {
        self.active_count == self.n
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.active[v])
    }

    /// Marks `v` inactive. Its incident edges disappear from every query.
    pub fn remove_node(&mut self, v: usize) -> Result<(), GraphError> {
        if v >= self.n {
            return Err(GraphError::NodeOutOfRange { node: v, n: self.n });
        }
        if !self.active[v] {
            return Err(GraphError::AlreadyRemoved(v));
        }
        self.active[v] = false;
        self.active_count -= 1;
        Ok(())
    }

    /// Re-activates `v`; returns false if it was already active.
    pub fn restore_node(&mut self, v: usize) -> bool {
        if self.active[v] {
            return false;
        }
        self.active[v] = true;
        self.active_count += 1;
        true
    }

    pub fn restore_all(&mut self) {
        self.active.iter_mut().for_each(|a| *a = true);
        self.active_count = self.n;
    }

    /// Active successors of an active node (all neighbors when undirected).
    pub fn out_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let live = self.active[v];
        self.out_adj[v]
            .iter()
            .copied()
            .filter(move |&(u, _)| live && self.active[u])
    }

    /// Active predecessors of an active node (all neighbors when undirected).
    pub fn in_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let live = self.active[v];
        self.in_adj[v]
            .iter()
            .copied()
            .filter(move |&(u, _)| live && self.active[u])
    }

    /// Active neighbors ignoring direction, each listed once, in ascending order.
    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        if !self.directed {
            return self.out_neighbors(v).map(|(u, _)| u).collect();
        }
        let mut out: Vec<usize> = self
            .out_neighbors(v)
            .chain(self.in_neighbors(v))
            .map(|(u, _)| u)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All edges of the full graph as `(u, v, w)`. Undirected edges appear once with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out_adj.iter().enumerate().flat_map(move |(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| self.directed || u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Edges whose endpoints are both active.
    pub fn active_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges()
            .filter(move |&(u, v, _)| self.active[u] && self.active[v])
    }

    pub fn active_edge_count(&self) -> usize {
        self.active_edges().count()
    }

    pub fn is_weighted(&self) -> bool {
        self.edges().any(|(_, _, w)| w != 1.0)
    }

    /// Same topology and mask with every weight replaced by `f(u, v, w)`.
    pub fn map_weights<F>(&self, mut f: F) -> Result<Graph, GraphError>
    where
        F: FnMut(usize, usize, f64) -> f64,
    {
        let edges: Vec<_> = self.edges().map(|(u, v, w)| (u, v, f(u, v, w))).collect();
        let mut g = Graph::from_edges(self.n, self.directed, edges)?;
        g.active.clone_from(&self.active);
        g.active_count = self.active_count;
        Ok(g)
    }

    pub fn unweighted(&self) -> Graph {
        self.map_weights(|_, _, _| 1.0)
            .expect("unit weights are always valid")
    }

    pub fn degrees(&self) -> DegreeVector {
        let mut in_deg = vec![0; self.n];
        let mut out_deg = vec![0; self.n];
        for v in self.active_nodes() {
            out_deg[v] = self.out_neighbors(v).count();
            in_deg[v] = self.in_neighbors(v).count();
        }
        DegreeVector { in_deg, out_deg }
    }

    /// The active subgraph relabelled to dense ids. Returns the graph and the
    /// original id of every new node.
    pub fn active_subgraph(&self) -> (Graph, Vec<usize>) {
        let keep: Vec<usize> = self.active_nodes().collect();
        let (g, _) = self.induced_subgraph(&keep);
        (g, keep)
    }

    /// Subgraph induced by `nodes`; new id `i` corresponds to `nodes[i]`.
    /// Ignores the mask. The second value maps old ids to new ones.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> (Graph, Vec<Option<usize>>) {
        let mut index = vec![None; self.n];
        for (i, &v) in nodes.iter().enumerate() {
            index[v] = Some(i);
        }
        let mut g = Graph::new(nodes.len(), self.directed);
        for (u, v, w) in self.edges() {
            if let (Some(a), Some(b)) = (index[u], index[v]) {
                g.add_edge(a, b, w).expect("subgraph of a simple graph is simple");
            }
        }
        (g, index)
    }
}

fn insert_sorted(list: &mut Vec<(usize, f64)>, v: usize, w: f64) {
    let pos = list.partition_point(|&(x, _)| x < v);
    list.insert(pos, (v, w));
}
