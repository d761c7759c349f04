use nrlgt_core::oracle::*;
use nrlgt_core::Graph;
use nrlgt_core::generators::{generate, GenSpec, Topology};
use nrlgt_core::oracle::plan_attack;

fn path5() -> Graph {
    Graph::from_pairs(5, false, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap()
}

fn trace(order: &[usize]) -> AttackTrace {
    AttackTrace { order: order.to_vec() }
}

#[test]
fn edgeless_controllability_is_all_ones() {
    let g = Graph::new(4, true);
    let t = plan_attack(&g, &AttackStrategy::random(3));
    let c = controllability_curve(&g, &t, ControllabilityMode::Structural).unwrap();
    assert_eq!(c.values, vec![1.0, 1.0, 1.0]);
}

#[test]
fn directed_cycle_remnant_is_a_path() {
    let g = Graph::from_pairs(4, true, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let c = controllability_curve(&g, &trace(&[1, 0, 2]), ControllabilityMode::Structural).unwrap();
    // remnant 2->3->0 matches two edges: one driver of three
    assert_eq!(c.values[0], 1.0 / 3.0);
    assert_eq!(*c.values.last().unwrap(), 1.0);
}

#[test]
fn path_center_removal_halves_lcc() {
    let c = connectivity_curve(&path5(), &trace(&[2, 0, 1, 3])).unwrap();
    assert_eq!(c.values, vec![0.5, 2.0 / 3.0, 1.0, 1.0]);
}

#[test]
fn complete_graph_single_removal_stays_connected() {
    let pairs = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v)));
    let g = Graph::from_pairs(5, false, pairs).unwrap();
    let c = connectivity_curve(&g, &plan_attack(&g, &AttackStrategy::random(1))).unwrap();
    assert_eq!(c.values, vec![1.0; 4]);
}

#[test]
fn invalid_trace_is_rejected() {
    assert!(connectivity_curve(&path5(), &trace(&[1, 1])).is_err());
    assert!(controllability_curve(&path5(), &trace(&[9]), ControllabilityMode::Exact).is_err());
}

#[test]
fn batch_of_five_percent_on_hundred_nodes() {
    let g = generate(&GenSpec::new(Topology::Er, 100, 3.0, false, 2)).unwrap();
    for strat in [AttackStrategy::random(4), AttackStrategy::degree()] {
        let c = batch_curve(&g, &strat, 0.05, CurveKind::Connectivity, Default::default()).unwrap();
        assert_eq!(c.len(), 19);
    }
    let g200 = generate(&GenSpec::new(Topology::Er, 200, 3.0, false, 2)).unwrap();
    let c = batch_curve(&g200, &AttackStrategy::random(4), 0.05, CurveKind::Connectivity, Default::default()).unwrap();
    assert_eq!(c.len(), 19);
}

#[test]
fn unit_batches_reproduce_per_node_curves() {
    let g = generate(&GenSpec::new(Topology::Ba, 40, 3.0, true, 9)).unwrap();
    for strat in [
        AttackStrategy::random(11),
        AttackStrategy::degree(),
        AttackStrategy::betweenness(),
        AttackStrategy::betweenness().non_adaptive(),
    ] {
        let t = plan_attack(&g, &strat);
        for kind in [CurveKind::Controllability, CurveKind::Connectivity] {
            let per_node = simulate(&g, &t, kind, Default::default()).unwrap();
            let batched = batch_curve(&g, &strat, 1.0 / 40.0, kind, Default::default()).unwrap();
            assert_eq!(per_node, batched, "{strat:?} {kind}");
        }
    }
}

#[test]
fn edgeless_batch_connectivity() {
    let g = Graph::new(20, false);
    let c = batch_curve(&g, &AttackStrategy::random(1), 0.1, CurveKind::Connectivity, Default::default()).unwrap();
    let expect: Vec<f64> = [18.0, 16.0, 14.0, 12.0, 10.0, 8.0, 6.0, 4.0, 2.0].iter().map(|r| 1.0 / r).collect();
    assert_eq!(c.values, expect);
}

#[test]
fn batch_fraction_range() {
    let g = Graph::new(5, false);
    for f in [0.0, 1.0, -0.2, f64::NAN] {
        assert!(batch_curve(&g, &AttackStrategy::random(1), f, CurveKind::Connectivity, Default::default()).is_err());
    }
    assert_eq!(batch_size(100, 0.07).unwrap(), 7);
    assert_eq!(batch_size(100, 0.071).unwrap(), 8);
}
