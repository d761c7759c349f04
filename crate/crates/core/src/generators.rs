//! Synthetic topology generators.
//!
//! Every generator emits exactly `round(k_avg * n)` directed edges or
//! `round(k_avg * n / 2)` undirected edges, with no self-loops or duplicates.
//! When a model's own sampling process stalls (dense specs, saturated hubs),
//! the remaining edges are filled uniformly from the missing pairs.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::graph::Graph;

/// Power-law exponent of the static scale-free model.
pub const SF_GAMMA: f64 = 2.001;

/// Mixed into the seed for the weight stream so weighted and unweighted
/// variants of a spec share their topology.
const WEIGHT_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Topology {
    #[serde(rename = "ER")]
    Er,
    #[serde(rename = "BA")]
    Ba,
    #[serde(rename = "SF")]
    Sf,
    #[serde(rename = "NW")]
    Nw,
    #[serde(rename = "QSN")]
    Qsn,
}

impl Topology {
    pub const ALL: [Topology; 5] = [
        Topology::Er,
        Topology::Ba,
        Topology::Sf,
        Topology::Nw,
        Topology::Qsn,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Topology::Er => "ER",
            Topology::Ba => "BA",
            Topology::Sf => "SF",
            Topology::Nw => "NW",
            Topology::Qsn => "QSN",
        }
    }

    /// Class index used by the classifier.
    pub fn index(self) -> usize {
        Topology::ALL.iter().position(|&t| t == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<Topology> {
        Topology::ALL.get(i).copied()
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Topology {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Topology::ALL
            .iter()
            .copied()
            .find(|t| t.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GenError::InvalidSpec(format!("unknown topology {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub topology: Topology,
    pub n: usize,
    pub k_avg: f64,
    pub directed: bool,
    pub weighted: bool,
    pub weight_range: (f64, f64),
    pub seed: u64,
}

impl GenSpec {
    pub fn new(topology: Topology, n: usize, k_avg: f64, directed: bool, seed: u64) -> Self {
        GenSpec {
            topology,
            n,
            k_avg,
            directed,
            weighted: false,
            weight_range: (0.5, 1.5),
            seed,
        }
    }

    pub fn weighted(mut self, lo: f64, hi: f64) -> Self {
        self.weighted = true;
        self.weight_range = (lo, hi);
        self
    }

    /// Target edge count.
    pub fn edge_target(&self) -> usize {
        let n = self.n as f64;
        if self.directed {
            (self.k_avg * n).round() as usize
        } else {
            (self.k_avg * n / 2.0).round() as usize
        }
    }

    pub fn capacity(&self) -> usize {
        let n = self.n;
        if self.directed {
            n * n.saturating_sub(1)
        } else {
            n * n.saturating_sub(1) / 2
        }
    }

    /// Per-pair snapback probability implied by the edge target (QSN only).
    pub fn snapback_probability(&self) -> f64 {
        let chain = self.n.saturating_sub(1);
        let candidates = qsn_candidate_count(self.n, self.directed);
        if candidates == 0 {
            return 0.0;
        }
        (self.edge_target().saturating_sub(chain) as f64 / candidates as f64).min(1.0)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n < 2 {
            return Err(GenError::InvalidSpec(format!("n = {} < 2", self.n)));
        }
        if !(self.k_avg > 0.0) || !self.k_avg.is_finite() {
            return Err(GenError::InvalidSpec(format!(
                "average degree {} must be positive",
                self.k_avg
            )));
        }
        let edges = self.edge_target();
        if edges > self.capacity() {
            return Err(GenError::Infeasible {
                n: self.n,
                edges,
                capacity: self.capacity(),
            });
        }
        if self.k_avg > (self.n - 1) as f64 {
            return Err(GenError::InvalidSpec(format!(
                "average degree {} exceeds n - 1 = {}",
                self.k_avg,
                self.n - 1
            )));
        }
        let (lo, hi) = self.weight_range;
        if !(lo > 0.0) || lo > hi || !hi.is_finite() {
            return Err(GenError::InvalidSpec(format!(
                "weight range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
        Ok(())
    }
}

pub fn generate(spec: &GenSpec) -> Result<Graph, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let target = spec.edge_target();
    let mut set = EdgeSet::new(spec.n, spec.directed);
    match spec.topology {
        Topology::Er => set.fill_uniform(&mut rng, target),
        Topology::Ba => barabasi_albert(&mut set, &mut rng, target),
        Topology::Sf => static_scale_free(&mut set, &mut rng, target, SF_GAMMA),
        Topology::Nw => newman_watts(&mut set, &mut rng, target),
        Topology::Qsn => q_snapback(&mut set, &mut rng, target),
    }
    debug_assert_eq!(set.len(), target);

    let mut edges = set.into_edges();
    edges.sort_unstable();
    let mut weights = vec![1.0; edges.len()];
    if spec.weighted {
        let (lo, hi) = spec.weight_range;
        let mut wrng = ChaCha8Rng::seed_from_u64(spec.seed ^ WEIGHT_STREAM);
        for w in weights.iter_mut() {
            *w = if lo == hi { lo } else { wrng.random_range(lo..=hi) };
        }
    }
    let g = Graph::from_edges(
        spec.n,
        spec.directed,
        edges.into_iter().zip(weights).map(|((u, v), w)| (u, v, w)),
    )
    .expect("generators only emit simple edges");
    Ok(g)
}

/// Distinct edges in insertion order.
struct EdgeSet {
    n: usize,
    directed: bool,
    seen: HashSet<(usize, usize)>,
    order: Vec<(usize, usize)>,
}

impl EdgeSet {
    fn new(n: usize, directed: bool) -> Self {
        EdgeSet {
            n,
            directed,
            seen: HashSet::new(),
            order: Vec::new(),
        }
    }

    fn key(&self, u: usize, v: usize) -> (usize, usize) {
        if self.directed || u < v {
            (u, v)
        } else {
            (v, u)
        }
    }

    fn len(&self) -> usize {
        self.order.len()
    }

    fn contains(&self, u: usize, v: usize) -> bool {
        self.seen.contains(&self.key(u, v))
    }

    fn insert(&mut self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        let key = self.key(u, v);
        if self.seen.insert(key) {
            self.order.push(key);
            true
        } else {
            false
        }
    }

    fn capacity(&self) -> usize {
        if self.directed {
            self.n * (self.n - 1)
        } else {
            self.n * (self.n - 1) / 2
        }
    }

    /// Adds uniformly random missing edges until `target` edges exist.
    fn fill_uniform(&mut self, rng: &mut impl Rng, target: usize) {
        let target = target.min(self.capacity());
        let free = self.capacity() - self.len();
        let needed = target.saturating_sub(self.len());
        if needed == 0 {
            return;
        }
        if needed * 2 > free || free <= 4096 {
            let mut missing: Vec<(usize, usize)> = Vec::with_capacity(free);
            for u in 0..self.n {
                let start = if self.directed { 0 } else { u + 1 };
                for v in start..self.n {
                    if u != v && !self.contains(u, v) {
                        missing.push((u, v));
                    }
                }
            }
            let (chosen, _) = missing.partial_shuffle(rng, needed);
            for &(u, v) in chosen.iter() {
                self.insert(u, v);
            }
        } else {
            while self.len() < target {
                let u = rng.random_range(0..self.n);
                let v = rng.random_range(0..self.n);
                self.insert(u, v);
            }
        }
    }

    fn into_edges(self) -> Vec<(usize, usize)> {
        self.order
    }
}

fn barabasi_albert(set: &mut EdgeSet, rng: &mut ChaCha8Rng, target: usize) {
    let n = set.n;
    // Spread the edge budget over the n - 1 arriving nodes.
    let base = target / (n - 1);
    let mut quota = vec![base; n];
    quota[0] = 0;
    let mut arrivals: Vec<usize> = (1..n).collect();
    arrivals.shuffle(rng);
    for &t in &arrivals[..target % (n - 1)] {
        quota[t] += 1;
    }

    // Every edge endpoint, so uniform picks are degree-proportional.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * target);
    let mut chosen: Vec<usize> = Vec::new();
    for t in 1..n {
        let m = quota[t].min(t);
        chosen.clear();
        let mut attempts = 0;
        while chosen.len() < m {
            attempts += 1;
            let j = if endpoints.is_empty() || attempts > 50 * m {
                rng.random_range(0..t)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !chosen.contains(&j) {
                chosen.push(j);
            }
        }
        for &j in &chosen {
            let (u, v) = if set.directed && rng.random_bool(0.5) {
                (j, t)
            } else {
                (t, j)
            };
            set.insert(u, v);
            endpoints.push(t);
            endpoints.push(j);
        }
    }

    // Early arrivals cannot take a full quota; top up preferentially.
    let mut stalls = 0;
    while set.len() < target && stalls < 100 * target {
        let u = rng.random_range(0..n);
        let v = endpoints[rng.random_range(0..endpoints.len().max(1))];
        if set.insert(u, v) {
            endpoints.push(u);
            endpoints.push(v);
        } else {
            stalls += 1;
        }
    }
    set.fill_uniform(rng, target);
}

fn static_scale_free(set: &mut EdgeSet, rng: &mut ChaCha8Rng, target: usize, gamma: f64) {
    let exponent = 1.0 / (gamma - 1.0);
    let fitness: Vec<f64> = (1..=set.n).map(|i| (i as f64).powf(-exponent)).collect();
    let pick = WeightedIndex::new(&fitness).expect("fitness values are positive");
    let mut stalls = 0;
    while set.len() < target && stalls < 100 * target {
        let u = pick.sample(rng);
        let v = pick.sample(rng);
        if !set.insert(u, v) {
            stalls += 1;
        }
    }
    set.fill_uniform(rng, target);
}

fn newman_watts(set: &mut EdgeSet, rng: &mut ChaCha8Rng, target: usize) {
    let n = set.n;
    let k = if set.directed {
        target as f64 / n as f64
    } else {
        2.0 * target as f64 / n as f64
    };
    let max_reach = (n - 1) / 2;
    let reach = ((k / 2.0).floor() as usize).min(max_reach);
    if reach == 0 {
        // Too sparse for a full lattice: as much of a forward ring as fits.
        for i in 0..n {
            if set.len() >= target {
                break;
            }
            set.insert(i, (i + 1) % n);
        }
    } else {
        for s in 1..=reach {
            for i in 0..n {
                set.insert(i, (i + s) % n);
                if set.directed {
                    set.insert(i, (i + n - s) % n);
                }
            }
        }
    }
    // Shortcuts are added on top of the lattice, never rewired.
    set.fill_uniform(rng, target);
}

fn qsn_candidate_count(n: usize, directed: bool) -> usize {
    let pairs = n * n.saturating_sub(1) / 2;
    if directed {
        pairs
    } else {
        pairs - n.saturating_sub(1)
    }
}

fn q_snapback(set: &mut EdgeSet, rng: &mut ChaCha8Rng, target: usize) {
    let n = set.n;
    for i in 1..n {
        if set.len() >= target {
            return;
        }
        set.insert(i - 1, i);
    }
    // Snapback i -> j for j < i, each pair equally likely; conditioning the
    // per-pair coin on the total count pins the edge target exactly.
    let mut candidates: Vec<(usize, usize)> = Vec::with_capacity(qsn_candidate_count(n, set.directed));
    for i in 1..n {
        for j in 0..i {
            if set.directed || j + 1 < i {
                candidates.push((i, j));
            }
        }
    }
    let needed = target.saturating_sub(set.len()).min(candidates.len());
    let (chosen, _) = candidates.partial_shuffle(rng, needed);
    for &(i, j) in chosen.iter() {
        set.insert(i, j);
    }
    set.fill_uniform(rng, target);
}
