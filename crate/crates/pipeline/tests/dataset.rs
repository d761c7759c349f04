use std::fs;

use nrlgt_core::{AttackKind, CurveKind, Topology};
use nrlgt_pipeline::config::GenerationConfig;
use nrlgt_pipeline::dataset::{sample_seed, GRAPHS_DIR, MANIFEST_FILE, RECORDS_FILE};
use nrlgt_pipeline::{Dataset, PipelineError};

fn small(n: usize, seed: u64) -> GenerationConfig {
    GenerationConfig {
        n,
        samples_per_topology: 4,
        k_min: 2.0,
        k_max: 4.0,
        seed,
        ..Default::default()
    }
}

#[test]
fn generation_is_deterministic() {
    let a = Dataset::generate(&small(20, 3)).unwrap();
    let b = Dataset::generate(&small(20, 3)).unwrap();
    assert_eq!(a, b);
    let c = Dataset::generate(&small(20, 4)).unwrap();
    assert_ne!(a.manifest.records_sha256, c.manifest.records_sha256);
}

#[test]
fn manifest_counts_and_record_shapes() {
    let data = Dataset::generate(&small(20, 3)).unwrap();
    let m = &data.manifest;
    assert_eq!((m.count, m.skipped, m.n), (20, 0, 20));
    assert!(m.directed);
    assert_eq!(m.curve, CurveKind::Controllability);
    assert_eq!(m.topology_counts.len(), 5);
    assert!(m.topology_counts.values().all(|&c| c == 4));
    for (i, s) in data.samples.iter().enumerate() {
        assert_eq!(s.id, i);
        assert_eq!(s.record.topology, Topology::ALL[i / 4]);
        assert_eq!(s.record.curve.len(), 19);
        assert_eq!(s.graph.n(), 20);
        let mean = s.record.curve.iter().sum::<f64>() / 19.0;
        assert_eq!(s.record.rc, mean);
    }
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = Dataset::generate(&small(16, 8)).unwrap();
    data.save(dir.path()).unwrap();
    assert!(dir.path().join(MANIFEST_FILE).exists());
    assert_eq!(fs::read_dir(dir.path().join(GRAPHS_DIR)).unwrap().count(), data.len());
    let header = fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    assert!(header.starts_with("topology,N,directed,attack,R_c,v1,"));
    assert!(header.lines().next().unwrap().ends_with(",v15"));
    assert_eq!(Dataset::load(dir.path()).unwrap(), data);
}

#[test]
fn tampering_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    Dataset::generate(&small(16, 8)).unwrap().save(dir.path()).unwrap();

    let records = dir.path().join(RECORDS_FILE);
    let original = fs::read_to_string(&records).unwrap();
    fs::write(&records, original.replacen("ER,", "BA,", 1)).unwrap();
    assert!(matches!(Dataset::load(dir.path()), Err(PipelineError::HashMismatch { what: "records", .. })));
    fs::write(&records, &original).unwrap();

    let graph = dir.path().join(GRAPHS_DIR).join("000003.txt");
    let text = fs::read_to_string(&graph).unwrap();
    fs::write(&graph, format!("{text}# edited\n")).unwrap();
    assert!(matches!(Dataset::load(dir.path()), Err(PipelineError::HashMismatch { what: "graphs", .. })));
    fs::write(&graph, text).unwrap();
    Dataset::load(dir.path()).unwrap();

    fs::remove_file(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(matches!(Dataset::load(dir.path()), Err(PipelineError::Io { .. })));
}

#[test]
fn mixed_sizes_are_rejected() {
    let a = Dataset::generate(&small(16, 1)).unwrap();
    let b = Dataset::generate(&small(20, 1)).unwrap();
    let mut samples = a.samples.clone();
    samples.extend(b.samples.iter().cloned());
    let mixed = Dataset::assemble(samples, String::new(), CurveKind::Controllability, Default::default(), AttackKind::Random, 0);
    assert!(matches!(mixed.common_n(), Err(PipelineError::MixedSizes(16, 20))));
    assert_eq!(a.common_n().unwrap(), 16);
}

#[test]
fn split_is_stratified_and_disjoint() {
    let data = Dataset::generate(&GenerationConfig {
        samples_per_topology: 10,
        ..small(12, 2)
    })
    .unwrap();
    let (train, val) = data.split(0.2, 9);
    assert_eq!((train.len(), val.len()), (40, 10));
    for t in Topology::ALL {
        assert_eq!(val.iter().filter(|&&i| data.samples[i].record.topology == t).count(), 2);
    }
    let mut all: Vec<usize> = train.iter().chain(&val).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..50).collect::<Vec<_>>());
    assert_eq!(data.split(0.2, 9), (train, val));
    // A topology never loses its last training sample.
    let (train, val) = data.split(0.99, 9);
    assert_eq!((train.len(), val.len()), (5, 45));
}

#[test]
fn connectivity_sets_are_undirected() {
    let data = Dataset::generate(&GenerationConfig {
        directed: false,
        curve: CurveKind::Connectivity,
        attack: AttackKind::TargetedDegree,
        ..small(15, 4)
    })
    .unwrap();
    assert!(!data.manifest.directed);
    assert_eq!(data.manifest.attack, AttackKind::TargetedDegree);
    assert!(data.samples.iter().all(|s| !s.graph.is_directed() && !s.record.directed));
}

#[test]
fn infeasible_specs_are_skipped() {
    // A 4-node graph cannot reach average degree 9.
    let data = Dataset::generate(&GenerationConfig {
        topologies: vec![Topology::Er],
        k_min: 9.0,
        k_max: 9.0,
        ..small(4, 1)
    })
    .unwrap();
    assert_eq!((data.len(), data.manifest.skipped), (0, 4));
}

#[test]
fn sample_seeds_differ() {
    let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| sample_seed(5, i)).collect();
    assert_eq!(seeds.len(), 1000);
    assert_ne!(sample_seed(5, 0), sample_seed(6, 0));
}
