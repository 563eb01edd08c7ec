mod common;

use charnet::graph::{aggregate_segments, EpisodeKey, SegmentGraph, WeightedGraph};
use common::id;
use proptest::prelude::*;

const CAST: [&str; 6] = ["Jon", "Theon", "Robb", "Jaime", "Tyrion", "Ros"];

fn segment_strategy() -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..CAST.len(), 0..CAST.len(), 0.5f64..300.0), 1..8)
}

fn build(raw: &[Vec<(usize, usize, f64)>]) -> Vec<SegmentGraph> {
    raw.iter()
        .enumerate()
        .map(|(i, edges)| {
            let mut seg = SegmentGraph::new(i);
            for &(a, b, w) in edges {
                if a != b {
                    seg.add_interaction(id(CAST[a]), id(CAST[b]), w).unwrap();
                }
            }
            seg
        })
        .collect()
}

fn key() -> EpisodeKey {
    EpisodeKey::new("got", 1, 1)
}

fn assert_close(a: &WeightedGraph, b: &WeightedGraph) {
    assert_eq!(a.nodes(), b.nodes());
    assert_eq!(a.edge_count(), b.edge_count());
    for (x, y, w) in a.edges() {
        let other = b.weight(x, y).expect("edge present in both");
        assert!(
            (w - other).abs() <= 1e-9 * w.abs().max(1.0),
            "{x}-{y}: {w} vs {other}"
        );
    }
}

proptest! {
    #[test]
    fn segment_order_does_not_matter(
        raw in prop::collection::vec(segment_strategy(), 1..10),
        rotate in 0usize..10,
    ) {
        let segments = build(&raw);
        let mut reordered = segments.clone();
        reordered.reverse();
        let len = reordered.len();
        reordered.rotate_left(rotate % len);
        let a = aggregate_segments(&segments, key()).unwrap();
        let b = aggregate_segments(&reordered, key()).unwrap();
        assert_close(&a.graph, &b.graph);
    }

    #[test]
    fn split_then_merge_equals_whole(
        raw in prop::collection::vec(segment_strategy(), 2..10),
        cut in 1usize..9,
    ) {
        let segments = build(&raw);
        let cut = cut.min(segments.len() - 1);
        let whole = aggregate_segments(&segments, key()).unwrap();
        let left = aggregate_segments(&segments[..cut], key()).unwrap();
        let right = aggregate_segments(&segments[cut..], key()).unwrap();
        let merged = left.merge(&right);
        assert_close(&whole.graph, &merged.graph);
        prop_assert_eq!(merged.segment_count, whole.segment_count);
    }

    #[test]
    fn total_weight_is_conserved(raw in prop::collection::vec(segment_strategy(), 1..10)) {
        let segments = build(&raw);
        let input: f64 = segments.iter().map(|s| s.graph.total_weight()).sum();
        let episode = aggregate_segments(&segments, key()).unwrap();
        let total = episode.graph.total_weight();
        prop_assert!((total - input).abs() <= 1e-9 * input.max(1.0));
    }

    #[test]
    fn aggregation_is_bitwise_reproducible(raw in prop::collection::vec(segment_strategy(), 1..10)) {
        let segments = build(&raw);
        let a = aggregate_segments(&segments, key()).unwrap();
        let b = aggregate_segments(&segments, key()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn edge_set_is_union_of_segment_edges(raw in prop::collection::vec(segment_strategy(), 1..10)) {
        let segments = build(&raw);
        let episode = aggregate_segments(&segments, key()).unwrap();
        for seg in &segments {
            for (a, b, _) in seg.graph.edges() {
                prop_assert!(episode.graph.weight(a, b).is_some());
            }
        }
        for (a, b, _) in episode.graph.edges() {
            prop_assert!(segments.iter().any(|s| s.graph.weight(a, b).is_some()));
        }
    }
}
