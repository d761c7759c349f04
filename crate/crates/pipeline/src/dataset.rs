use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;
use nrlgt_core::io::{format_edge_list, parse_edge_list};
use nrlgt_core::oracle::{overall_rc, plan_attack, simulate};
use nrlgt_core::{
    generate, AttackKind, ControllabilityMode, CurveKind, DatasetRecord, GenSpec, Graph, Topology,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::GenerationConfig;
use crate::error::PipelineError;

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const GRAPHS_DIR: &str = "graphs";

/// SplitMix64 step, used to derive independent per-sample seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn sample_seed(base: u64, index: usize) -> u64 {
    splitmix64(base ^ splitmix64(index as u64))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: usize,
    pub record: DatasetRecord,
    pub graph: Graph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub records_sha256: String,
    pub graphs_sha256: String,
    pub n: usize,
    pub directed: bool,
    pub curve: CurveKind,
    pub mode: ControllabilityMode,
    pub attack: AttackKind,
    pub count: usize,
    /// Samples whose generator spec was infeasible.
    pub skipped: usize,
    pub topology_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: Manifest,
    pub samples: Vec<Sample>,
}

fn records_text(samples: &[Sample]) -> String {
    let mut out = String::from("topology,N,directed,attack,R_c");
    if let Some(s) = samples.first() {
        for i in 1..s.record.n {
            write!(out, ",v{i}").unwrap();
        }
    }
    out.push('\n');
    for s in samples {
        out.push_str(&s.record.to_line());
        out.push('\n');
    }
    out
}

fn graphs_digest(texts: &[String]) -> String {
    let mut h = Sha256::new();
    for (id, t) in texts.iter().enumerate() {
        h.update(format!("{id:06}\n").as_bytes());
        h.update(t.as_bytes());
    }
    hex::encode(h.finalize())
}

fn config_hash(cfg: &GenerationConfig) -> String {
    sha256_hex(toml::to_string(cfg).expect("config serializes").as_bytes())
}

/// Simulates one sample. `Ok(None)` marks an infeasible generator spec.
fn simulate_sample(cfg: &GenerationConfig, index: usize) -> Result<Option<(DatasetRecord, Graph)>, PipelineError> {
    let topology = cfg.topologies[index / cfg.samples_per_topology];
    let seed = sample_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = if cfg.k_max > cfg.k_min { rng.random_range(cfg.k_min..=cfg.k_max) } else { cfg.k_min };
    let mut spec = GenSpec::new(topology, cfg.n, k, cfg.directed, rng.random());
    if cfg.weighted {
        spec = spec.weighted(cfg.weight_range.0, cfg.weight_range.1);
    }
    let graph = match generate(&spec) {
        Ok(g) => g,
        Err(e) => {
            warn!("sample {index} ({topology}, k = {k:.3}) skipped: {e}");
            return Ok(None);
        }
    };
    let trace = plan_attack(&graph, &cfg.strategy(rng.random()));
    let curve = simulate(&graph, &trace, cfg.curve, cfg.mode)?;
    let rc = overall_rc(&curve)?.0;
    let record = DatasetRecord {
        topology,
        n: cfg.n,
        directed: cfg.directed,
        attack: cfg.attack,
        rc,
        curve: curve.values,
    };
    Ok(Some((record, graph)))
}

impl Dataset {
    /// Generates and simulates every sample of `cfg` in parallel.
    pub fn generate(cfg: &GenerationConfig) -> Result<Dataset, PipelineError> {
        let total = cfg.topologies.len() * cfg.samples_per_topology;
        let results = (0..total)
            .into_par_iter()
            .map(|i| simulate_sample(cfg, i))
            .collect::<Result<Vec<_>, _>>()?;
        let skipped = results.iter().filter(|r| r.is_none()).count();
        let samples = results
            .into_iter()
            .flatten()
            .enumerate()
            .map(|(id, (record, graph))| Sample { id, record, graph })
            .collect();
        Ok(Dataset::assemble(samples, config_hash(cfg), cfg.curve, cfg.mode, cfg.attack, skipped))
    }

    /// Wraps in-memory samples with a freshly computed manifest.
    pub fn assemble(
        samples: Vec<Sample>,
        config_hash: String,
        curve: CurveKind,
        mode: ControllabilityMode,
        attack: AttackKind,
        skipped: usize,
    ) -> Dataset {
        let mut topology_counts = BTreeMap::new();
        for s in &samples {
            *topology_counts.entry(s.record.topology.to_string()).or_insert(0) += 1;
        }
        let texts: Vec<String> = samples.iter().map(|s| format_edge_list(&s.graph)).collect();
        let manifest = Manifest {
            config_hash,
            records_sha256: sha256_hex(records_text(&samples).as_bytes()),
            graphs_sha256: graphs_digest(&texts),
            n: samples.first().map_or(0, |s| s.record.n),
            directed: samples.first().is_some_and(|s| s.record.directed),
            curve,
            mode,
            attack,
            count: samples.len(),
            skipped,
            topology_counts,
        };
        Dataset { manifest, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Shared node count; errors on mixed sizes or an empty dataset.
    pub fn common_n(&self) -> Result<usize, PipelineError> {
        let first = self
            .samples
            .first()
            .ok_or_else(|| PipelineError::Dataset("empty dataset".into()))?
            .record
            .n;
        match self.samples.iter().find(|s| s.record.n != first) {
            Some(s) => Err(PipelineError::MixedSizes(first, s.record.n)),
            None => Ok(first),
        }
    }

    pub fn topologies(&self) -> Vec<Topology> {
        let mut t: Vec<Topology> = self.samples.iter().map(|s| s.record.topology).collect();
        t.sort();
        t.dedup();
        t
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), PipelineError> {
        let dir = dir.as_ref();
        let graphs = dir.join(GRAPHS_DIR);
        fs::create_dir_all(&graphs).map_err(|e| PipelineError::io(&graphs, e))?;
        let write = |path: &Path, text: &str| fs::write(path, text).map_err(|e| PipelineError::io(path, e));
        write(&dir.join(RECORDS_FILE), &records_text(&self.samples))?;
        for (i, s) in self.samples.iter().enumerate() {
            write(&graphs.join(format!("{i:06}.txt")), &format_edge_list(&s.graph))?;
        }
        let manifest = toml::to_string(&self.manifest).expect("manifest serializes");
        write(&dir.join(MANIFEST_FILE), &manifest)
    }

    /// Reads a dataset and checks it against its manifest hashes.
    pub fn load(dir: impl AsRef<Path>) -> Result<Dataset, PipelineError> {
        let dir = dir.as_ref();
        let read = |path: &Path| fs::read_to_string(path).map_err(|e| PipelineError::io(path, e));
        let manifest_path = dir.join(MANIFEST_FILE);
        let manifest: Manifest =
            toml::from_str(&read(&manifest_path)?).map_err(|e| PipelineError::Dataset(format!("manifest: {e}")))?;

        let records = read(&dir.join(RECORDS_FILE))?;
        let found = sha256_hex(records.as_bytes());
        if found != manifest.records_sha256 {
            return Err(PipelineError::HashMismatch {
                what: "records",
                expected: manifest.records_sha256.clone(),
                found,
            });
        }
        let lines: Vec<&str> = records
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with("topology"))
            .collect();
        let mut texts = Vec::with_capacity(lines.len());
        let mut samples = Vec::with_capacity(lines.len());
        for (id, line) in lines.iter().enumerate() {
            let record = DatasetRecord::from_line(line)?;
            let text = read(&dir.join(GRAPHS_DIR).join(format!("{id:06}.txt")))?;
            let graph = parse_edge_list(&text, record.directed)?;
            if graph.n() != record.n {
                return Err(PipelineError::Dataset(format!(
                    "graph {id} has {} nodes, record says {}",
                    graph.n(),
                    record.n
                )));
            }
            texts.push(text);
            samples.push(Sample { id, record, graph });
        }
        let found = graphs_digest(&texts);
        if found != manifest.graphs_sha256 {
            return Err(PipelineError::HashMismatch {
                what: "graphs",
                expected: manifest.graphs_sha256.clone(),
                found,
            });
        }
        if samples.len() != manifest.count {
            return Err(PipelineError::Dataset(format!(
                "manifest counts {} records, found {}",
                manifest.count,
                samples.len()
            )));
        }
        Ok(Dataset { manifest, samples })
    }

    /// Train and validation indices: `round(fraction * count)` samples of
    /// each topology go to validation, chosen by a seeded shuffle.
    pub fn split(&self, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut val = Vec::new();
        for topo in self.topologies() {
            let mut idx: Vec<usize> = (0..self.samples.len())
                .filter(|&i| self.samples[i].record.topology == topo)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, topo.index()));
            idx.shuffle(&mut rng);
            let n_val = ((val_fraction * idx.len() as f64).round() as usize).min(idx.len().saturating_sub(1));
            val.extend_from_slice(&idx[..n_val]);
            train.extend_from_slice(&idx[n_val..]);
        }
        train.sort_unstable();
        val.sort_unstable();
        (train, val)
    }

    /// Mean of the stored curves over the given samples.
    pub fn mean_curve(&self, idx: &[usize]) -> Vec<f64> {
        let n = self.samples[idx[0]].record.curve.len();
        let mut mean = vec![0.0; n];
        for &i in idx {
            for (m, v) in mean.iter_mut().zip(&self.samples[i].record.curve) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= idx.len() as f64);
        mean
    }
}
