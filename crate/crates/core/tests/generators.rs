use std::collections::HashSet;

use nrlgt_core::generators::*;
use nrlgt_core::{GenError, Graph};

fn is_simple(g: &Graph) -> bool {
    let mut seen = HashSet::new();
    g.edges().all(|(u, v, _)| {
        let key = if g.is_directed() || u < v { (u, v) } else { (v, u) };
        u != v && seen.insert(key)
    })
}

#[test]
fn er_directed_edge_count() {
    let g = generate(&GenSpec::new(Topology::Er, 100, 5.0, true, 7)).unwrap();
    assert_eq!(g.edge_count(), 500);
    assert!(is_simple(&g));
}

#[test]
fn edge_count_contract_all_topologies() {
    for topology in Topology::ALL {
        for directed in [true, false] {
            for (seed, k) in [(1u64, 1.0), (2, 2.5), (3, 5.5), (4, 10.0), (5, 19.0)] {
                let spec = GenSpec::new(topology, 60, k, directed, seed);
                let g = generate(&spec).unwrap();
                assert_eq!(
                    g.edge_count(),
                    spec.edge_target(),
                    "{topology} directed={directed} k={k}"
                );
                assert!(is_simple(&g));
                assert!(!g.is_weighted());
            }
        }
    }
}

#[test]
fn zero_degree_rejected() {
    let spec = GenSpec::new(Topology::Er, 10, 0.0, false, 1);
    assert!(matches!(generate(&spec), Err(GenError::InvalidSpec(_))));
    let spec = GenSpec::new(Topology::Er, 10, 40.0, false, 1);
    assert!(matches!(generate(&spec), Err(GenError::Infeasible { .. })));
    let spec = GenSpec::new(Topology::Er, 10, 3.0, false, 1).weighted(2.0, 1.0);
    assert!(matches!(generate(&spec), Err(GenError::InvalidSpec(_))));
}

#[test]
fn full_degree_gives_complete_graph() {
    for topology in Topology::ALL {
        let g = generate(&GenSpec::new(topology, 12, 11.0, false, 3)).unwrap();
        assert_eq!(g.edge_count(), 66, "{topology}");
        let g = generate(&GenSpec::new(topology, 12, 11.0, true, 3)).unwrap();
        assert_eq!(g.edge_count(), 132, "{topology}");
    }
}

#[test]
fn deterministic_given_seed() {
    for topology in Topology::ALL {
        let spec = GenSpec::new(topology, 80, 4.3, true, 99);
        let a: Vec<_> = generate(&spec).unwrap().edges().collect();
        let b: Vec<_> = generate(&spec).unwrap().edges().collect();
        assert_eq!(a, b);
        let other = GenSpec { seed: 100, ..spec };
        let c: Vec<_> = generate(&other).unwrap().edges().collect();
        assert_ne!(a, c, "{topology}");
    }
}

#[test]
fn weighted_variant_keeps_topology() {
    let spec = GenSpec::new(Topology::Ba, 50, 4.0, false, 11);
    let plain = generate(&spec).unwrap();
    let heavy = generate(&spec.clone().weighted(0.5, 1.5)).unwrap();
    assert_eq!(plain, heavy.unweighted());
    assert!(heavy.edges().all(|(_, _, w)| (0.5..=1.5).contains(&w)));
    assert!(heavy.is_weighted());
}

#[test]
fn qsn_contains_backbone_chain() {
    let g = generate(&GenSpec::new(Topology::Qsn, 40, 3.0, true, 5)).unwrap();
    for i in 1..40 {
        assert!(g.has_edge(i - 1, i));
    }
    // every non-chain edge points backwards
    for (u, v, _) in g.edges() {
        assert!(v == u + 1 || v < u);
    }
}

#[test]
fn nw_contains_ring_lattice() {
    let g = generate(&GenSpec::new(Topology::Nw, 30, 6.0, false, 5)).unwrap();
    for i in 0..30 {
        for s in 1..=3 {
            assert!(g.has_edge(i, (i + s) % 30));
        }
    }
}

#[test]
fn topology_labels_round_trip() {
    for t in Topology::ALL {
        assert_eq!(t.label().parse::<Topology>().unwrap(), t);
        assert_eq!(Topology::from_index(t.index()), Some(t));
    }
    assert!("XX".parse::<Topology>().is_err());
}
