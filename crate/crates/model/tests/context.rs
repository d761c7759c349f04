use nrlgt_model::AttentionGraph;
use nrlgt_core::Graph;

#[test]
fn directed_neighborhoods_use_in_edges() {
    let g = Graph::from_pairs(3, true, [(0, 1), (2, 1), (1, 0)]).unwrap();
    let ag = AttentionGraph::new(&g, 30);
    let pairs: Vec<(usize, usize)> = ag.dst.iter().copied().zip(ag.src.iter().copied()).collect();
    assert_eq!(pairs, vec![(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 2)]);
    assert_eq!(&ag.deg_in[..], &[1, 2, 0]);
    assert_eq!(&ag.deg_out[..], &[1, 1, 1]);
}

#[test]
fn virtual_node_links_everything() {
    let g = Graph::from_pairs(3, false, [(0, 1)]).unwrap();
    let ag = AttentionGraph::new(&g, 1).with_virtual_node();
    assert_eq!(ag.n, 4);
    // 2 + 2 + 1 real slots, 3 virtual->real, 4 into virtual
    assert_eq!(ag.edge_count(), 5 + 3 + 4);
    assert!(ag.dst.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(ag.src.iter().zip(ag.dst.iter()).filter(|&(&s, &d)| s == 3 && d < 3).count(), 3);
}

#[test]
fn degrees_clamp() {
    let g = Graph::from_pairs(5, false, (1..5).map(|i| (0, i))).unwrap();
    assert_eq!(AttentionGraph::new(&g, 2).deg_in[0], 2);
}
