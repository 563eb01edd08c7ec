//! Seeded generators and brute-force reference implementations shared by the
//! integration tests and the acceptance harness.
#![allow(dead_code, clippy::needless_range_loop)]

use charnet::graph::{CharacterId, SegmentGraph};
use charnet::traversal::Topology;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn id(s: &str) -> CharacterId {
    CharacterId::new(s).unwrap()
}

/// Erdos-Renyi graph on `n` nodes as an edge list and adjacency matrix.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> (Topology, Vec<Vec<bool>>) {
    let mut adj = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                adj[i][j] = true;
                adj[j][i] = true;
                edges.push((i, j));
            }
        }
    }
    (Topology::from_edges(n, &edges), adj)
}

/// Drops nodes without edges, mirroring the active-node projection.
pub fn active_part(adj: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let keep: Vec<usize> = (0..adj.len())
        .filter(|&i| adj[i].iter().any(|&e| e))
        .collect();
    keep.iter()
        .map(|&i| keep.iter().map(|&j| adj[i][j]).collect())
        .collect()
}

pub fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<Option<u32>>> {
    let n = adj.len();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Closed length-2 paths over all length-2 paths, by triple enumeration.
pub fn transitivity_oracle(adj: &[Vec<bool>]) -> f64 {
    let n = adj.len();
    let (mut paths, mut closed) = (0u64, 0u64);
    for centre in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if a != centre && b != centre && adj[centre][a] && adj[centre][b] {
                    paths += 1;
                    if adj[a][b] {
                        closed += 1;
                    }
                }
            }
        }
    }
    if paths == 0 {
        0.0
    } else {
        closed as f64 / paths as f64
    }
}

pub fn harmonic_oracle(dist: &[Vec<Option<u32>>]) -> Vec<f64> {
    let n = dist.len();
    (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u)
                .filter_map(|v| dist[v][u])
                .map(|d| 1.0 / d as f64)
                .sum()
        })
        .collect()
}

fn efficiency_of_nodes(dist: &[Vec<Option<u32>>], nodes: &[usize]) -> f64 {
    let k = nodes.len();
    let mut total = 0.0;
    for &i in nodes {
        for &j in nodes {
            if i != j {
                if let Some(d) = dist[i][j] {
                    total += 1.0 / d as f64;
                }
            }
        }
    }
    total / (k * (k - 1)) as f64
}

pub fn global_efficiency_oracle(dist: &[Vec<Option<u32>>]) -> f64 {
    let all: Vec<usize> = (0..dist.len()).collect();
    if all.len() < 2 {
        return 0.0;
    }
    efficiency_of_nodes(dist, &all)
}

/// Mean global efficiency over components of size >= 2, components read
/// off the reachability matrix.
pub fn component_mean_efficiency_oracle(dist: &[Vec<Option<u32>>]) -> Option<f64> {
    let n = dist.len();
    let mut seen = vec![false; n];
    let mut parts = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&j| dist[i][j].is_some()).collect();
        for &m in &members {
            seen[m] = true;
        }
        if members.len() >= 2 {
            parts.push(efficiency_of_nodes(dist, &members));
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.iter().sum::<f64>() / parts.len() as f64)
    }
}

pub fn degree_oracle(adj: &[Vec<bool>]) -> Vec<usize> {
    adj.iter()
        .map(|row| row.iter().filter(|&&e| e).count())
        .collect()
}

pub fn adjacency_matrix(adj: &[Vec<bool>]) -> DMatrix<f64> {
    let n = adj.len();
    DMatrix::from_fn(n, n, |i, j| if adj[i][j] { 1.0 } else { 0.0 })
}

/// Largest eigenvalue, gap to the runner-up, and a unit eigenvector with
/// non-negative sum, from a dense symmetric solver.
pub fn dense_dominant_eigen(adj: &[Vec<bool>]) -> (f64, f64, Vec<f64>) {
    let eig = adjacency_matrix(adj).symmetric_eigen();
    let mut order: Vec<usize> = (0..adj.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = order[0];
    let gap = if order.len() > 1 {
        eig.eigenvalues[top] - eig.eigenvalues[order[1]]
    } else {
        f64::INFINITY
    };
    let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (eig.eigenvalues[top], gap, v)
}

pub fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

const NAMES: [&str; 10] = [
    "Jon", "Theon", "Robb", "Jaime", "Tyrion", "Ros", "Arya", "Sansa", "Cersei", "Bran",
];

/// Random episode as a list of segment graphs over a small cast.
pub fn random_segments<R: Rng>(rng: &mut R) -> Vec<SegmentGraph> {
    let count = rng.gen_range(1..=12);
    (0..count)
        .map(|index| {
            let mut seg = SegmentGraph::new(index);
            let size = rng.gen_range(2..=6);
            let cast: Vec<&str> = NAMES.choose_multiple(rng, size).copied().collect();
            for _ in 0..rng.gen_range(1..=8) {
                let pair: Vec<&&str> = cast.choose_multiple(rng, 2).collect();
                let w = (rng.gen_range(1.0..120.0f64) * 10.0).round() / 10.0;
                seg.add_interaction(id(pair[0]), id(pair[1]), w).unwrap();
            }
            seg
        })
        .collect()
}

/// Tie-free `(x, y)` of length `n` whose Spearman rho is as close to
/// `target` as a seeded pair-swap search gets.
pub fn pair_with_rho<R: Rng>(rng: &mut R, target: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let mut y = x.clone();
    y.shuffle(rng);
    let rho_of = |y: &[f64]| {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        1.0 - 6.0 * d2 / (n * (n * n - 1)) as f64
    };
    let mut best = (rho_of(&y) - target).abs();
    for _ in 0..200_000 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        y.swap(i, j);
        let err = (rho_of(&y) - target).abs();
        if err <= best {
            best = err;
        } else {
            y.swap(i, j);
        }
        if best < 1e-4 {
            break;
        }
    }
    (x, y)
}
