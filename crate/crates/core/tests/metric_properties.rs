mod common;

use charnet::graph::{CharacterId, EpisodeGraph, EpisodeKey};
use charnet::metrics::{
    compute_episode_metrics, density_of, efficiency_of, eigenvector_of, global_efficiency,
    harmonic_of, transitivity_of, EfficiencyMode, MetricColumn, MetricsConfig,
};
use charnet::traversal::Topology;
use common::*;
use proptest::prelude::*;

fn edges_strategy(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let count = pairs.len();
        (
            Just(n),
            prop::collection::vec(any::<bool>(), count).prop_map(move |mask| {
                pairs
                    .iter()
                    .zip(mask)
                    .filter(|(_, keep)| *keep)
                    .map(|(p, _)| *p)
                    .collect::<Vec<_>>()
            }),
        )
    })
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

fn episode(
    edges: &[(usize, usize)],
    weights: &[f64],
    name: impl Fn(usize) -> String,
) -> EpisodeGraph {
    let mut ep = EpisodeGraph::new(EpisodeKey::new("s", 1, 1));
    for (k, &(a, b)) in edges.iter().enumerate() {
        let w = weights[k % weights.len()];
        ep.add_interaction(
            CharacterId::new(&name(a)).unwrap(),
            CharacterId::new(&name(b)).unwrap(),
            w,
        )
        .unwrap();
    }
    ep
}

proptest! {
    #[test]
    fn bounded_metrics_stay_in_unit_interval((n, edges) in edges_strategy(9)) {
        let topo = Topology::from_edges(n, &edges);
        prop_assert!((0.0..=1.0).contains(&transitivity_of(&topo)));
        prop_assert!((0.0..=1.0).contains(&global_efficiency(&topo)));
        prop_assert!((0.0..=1.0).contains(&density_of(&topo).unwrap()));
        if let Ok(e) = efficiency_of(&topo, EfficiencyMode::ComponentMean) {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
        }
        if let Ok(e) = efficiency_of(&topo, EfficiencyMode::Neighborhood) {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
        }
    }

    #[test]
    fn matches_brute_force((n, edges) in edges_strategy(8)) {
        let topo = Topology::from_edges(n, &edges);
        let adj = adjacency(n, &edges);
        let dist = floyd_warshall(&adj);
        prop_assert!((transitivity_of(&topo) - transitivity_oracle(&adj)).abs() < 1e-12);
        prop_assert!((global_efficiency(&topo) - global_efficiency_oracle(&dist)).abs() < 1e-12);
        for (a, b) in harmonic_of(&topo).iter().zip(harmonic_oracle(&dist)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let degrees: Vec<usize> = (0..n).map(|v| topo.degree(v)).collect();
        prop_assert_eq!(degrees, degree_oracle(&adj));
    }

    #[test]
    fn eigenvector_is_a_unit_fixed_point((n, edges) in edges_strategy(8)) {
        prop_assume!(!edges.is_empty());
        let topo = Topology::from_edges(n, &edges);
        let sol = eigenvector_of(&topo, 1e-12, 100_000).unwrap();
        let norm: f64 = sol.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(sol.vector.iter().all(|&x| x >= -1e-12));
        for v in 0..n {
            let ax: f64 = topo.neighbors(v).iter().map(|&u| sol.vector[u]).sum();
            prop_assert!((ax - sol.eigenvalue * sol.vector[v]).abs() < 1e-8);
        }
    }

    #[test]
    fn relabelling_preserves_every_column(
        (n, edges) in edges_strategy(8),
        weights in prop::collection::vec(0.5f64..200.0, 1..6),
    ) {
        prop_assume!(!edges.is_empty());
        let cfg = MetricsConfig::default();
        let a = compute_episode_metrics(&episode(&edges, &weights, |i| format!("c{i}")), &cfg).metrics;
        let b = compute_episode_metrics(&episode(&edges, &weights, |i| format!("z{}", n - i)), &cfg).metrics;
        for col in MetricColumn::ALL {
            prop_assert!((a.value(col) - b.value(col)).abs() < 1e-9, "{:?}", col);
        }
    }

    #[test]
    fn weight_scaling_moves_only_strength(
        (_n, edges) in edges_strategy(8),
        weights in prop::collection::vec(0.5f64..200.0, 1..6),
        factor in 0.1f64..10.0,
    ) {
        prop_assume!(!edges.is_empty());
        let cfg = MetricsConfig::default();
        let base = episode(&edges, &weights, |i| format!("c{i}"));
        let scaled_weights: Vec<f64> = weights.iter().map(|w| w * factor).collect();
        let scaled = episode(&edges, &scaled_weights, |i| format!("c{i}"));
        let a = compute_episode_metrics(&base, &cfg).metrics;
        let b = compute_episode_metrics(&scaled, &cfg).metrics;
        for col in MetricColumn::ALL {
            let (x, y) = (a.value(col), b.value(col));
            match col {
                MetricColumn::StrengthMax | MetricColumn::StrengthStd => {
                    prop_assert!((x * factor - y).abs() <= 1e-9 * y.abs().max(1.0));
                }
                _ => prop_assert!((x - y).abs() < 1e-12, "{:?}", col),
            }
        }
    }

    #[test]
    fn adding_an_edge_never_lowers_density_or_degree((n, edges) in edges_strategy(8)) {
        let topo = Topology::from_edges(n, &edges);
        let missing = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|p| !edges.contains(p));
        if let Some(extra) = missing {
            let mut more = edges.clone();
            more.push(extra);
            let bigger = Topology::from_edges(n, &more);
            prop_assert!(density_of(&bigger).unwrap() > density_of(&topo).unwrap());
            let max_deg = |t: &Topology| (0..n).map(|v| t.degree(v)).max().unwrap();
            prop_assert!(max_deg(&bigger) >= max_deg(&topo));
            let h_sum = |t: &Topology| harmonic_of(t).iter().sum::<f64>();
            prop_assert!(h_sum(&bigger) > h_sum(&topo));
        }
    }
}

#[test]
fn complete_graph_saturates_every_bounded_metric() {
    for n in 2..=8 {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let topo = Topology::from_edges(n, &edges);
        assert_eq!(density_of(&topo).unwrap(), 1.0);
        assert!((global_efficiency(&topo) - 1.0).abs() < 1e-12);
        if n >= 3 {
            assert!((transitivity_of(&topo) - 1.0).abs() < 1e-12);
        }
        let h = harmonic_of(&topo);
        assert!(h.iter().all(|&x| (x - (n - 1) as f64).abs() < 1e-12));
        let sol = eigenvector_of(&topo, 1e-12, 10_000).unwrap();
        assert!(sol
            .vector
            .iter()
            .all(|&x| (x - 1.0 / (n as f64).sqrt()).abs() < 1e-9));
        assert!((sol.eigenvalue - (n - 1) as f64).abs() < 1e-9);
    }
}
