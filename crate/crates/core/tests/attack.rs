use nrlgt_core::oracle::*;
use nrlgt_core::Graph;
use nrlgt_core::generators::{generate, GenSpec, Topology};

fn star() -> Graph {
    Graph::from_pairs(4, false, [(0, 1), (0, 2), (0, 3)]).unwrap()
}

#[test]
fn degree_attack_hits_hub_first() {
    let g = Graph::from_pairs(4, false, [(3, 0), (3, 1), (3, 2)]).unwrap();
    let trace = plan_attack(&g, &AttackStrategy::degree());
    assert_eq!(trace.order[0], 3);
    assert_eq!(trace.len(), 3);
    // remaining leaves tie at degree 0: smallest id first
    assert_eq!(trace.order, vec![3, 0, 1]);
    assert_eq!(plan_attack(&star(), &AttackStrategy::degree()).order[0], 0);
}

#[test]
fn betweenness_attack_hits_path_center() {
    let g = Graph::from_pairs(5, false, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let trace = plan_attack(&g, &AttackStrategy::betweenness());
    assert_eq!(trace.order[0], 2);
    assert_eq!(trace.len(), 4);
}

#[test]
fn random_attack_is_seeded_permutation_prefix() {
    let g = generate(&GenSpec::new(Topology::Er, 30, 3.0, true, 1)).unwrap();
    let a = plan_attack(&g, &AttackStrategy::random(5));
    let b = plan_attack(&g, &AttackStrategy::random(5));
    let c = plan_attack(&g, &AttackStrategy::random(6));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.len(), 29);
    let mut seen = a.order.clone();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), 29);
}

#[test]
fn targeted_attacks_are_deterministic_permutations() {
    let g = generate(&GenSpec::new(Topology::Ba, 40, 4.0, true, 3)).unwrap();
    for strat in [
        AttackStrategy::degree(),
        AttackStrategy::betweenness(),
        AttackStrategy::degree().non_adaptive(),
        AttackStrategy::betweenness().non_adaptive(),
    ] {
        let a = plan_attack(&g, &strat);
        assert_eq!(a, plan_attack(&g.clone(), &strat));
        let mut seen = a.order.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 39);
    }
}

#[test]
fn non_adaptive_degree_uses_initial_ranking() {
    // 0 and 4 tie at degree 3; 0 wins on id, then 4 leads both rankings
    let g = Graph::from_pairs(
        6,
        false,
        [(0, 1), (0, 2), (0, 3), (4, 5), (4, 1), (4, 2)],
    )
    .unwrap();
    let fixed = plan_attack(&g, &AttackStrategy::degree().non_adaptive());
    assert_eq!(fixed.order, vec![0, 4, 1, 2, 3]);
    let adaptive = plan_attack(&g, &AttackStrategy::degree());
    assert_eq!(adaptive.order[..2], [0, 4]);
}
