//! Unweighted traversal over character graphs.
//!
//! Every topological metric works on hop counts, so the weighted graph is
//! projected once into a [`Topology`]: dense indices, sorted adjacency lists.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{CharacterId, GraphError, WeightedGraph};

/// Index-based simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    names: Vec<CharacterId>,
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    /// Projection over every node of `graph`, isolated ones included.
    pub fn from_graph(graph: &WeightedGraph) -> Self {
        Self::project(graph, graph.nodes().iter().cloned().collect())
    }

    /// Projection over the nodes of `graph` with at least one edge.
    pub fn active(graph: &WeightedGraph) -> Self {
        let mut active = BTreeSet::new();
        for (a, b, _) in graph.edges() {
            active.insert(a.clone());
            active.insert(b.clone());
        }
        Self::project(graph, active.into_iter().collect())
    }

    fn project(graph: &WeightedGraph, names: Vec<CharacterId>) -> Self {
        let index: BTreeMap<&CharacterId, usize> =
            names.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut adjacency = vec![Vec::new(); names.len()];
        for (a, b, _) in graph.edges() {
            if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { names, adjacency }
    }

    /// Builds a topology on `n` anonymous nodes named `v0..v{n-1}`.
    ///
    /// Duplicate pairs and self-loops are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let names = (0..n)
            .map(|i| CharacterId::new(&format!("v{i}")).expect("non-empty"))
            .collect();
        let mut sets = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        Self {
            names,
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[CharacterId] {
        &self.names
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn index_of(&self, id: &CharacterId) -> Option<usize> {
        self.names.iter().position(|n| n == id)
    }

    /// Hop distances from `source`; `None` marks unreachable nodes.
    pub fn bfs(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let next = dist[u].expect("queued nodes have a distance") + 1;
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(next);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut parts = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut part = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        part.push(v);
                        stack.push(v);
                    }
                }
            }
            part.sort_unstable();
            parts.push(part);
        }
        parts
    }

    /// Subgraph induced by `nodes` (indices into `self`), in the given order.
    pub fn induced(&self, nodes: &[usize]) -> Topology {
        let position: BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adjacency = nodes
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adjacency[v]
                    .iter()
                    .filter_map(|u| position.get(u).copied())
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        Topology {
            names: nodes.iter().map(|&v| self.names[v].clone()).collect(),
            adjacency,
        }
    }
}

/// Hop distances from one character to every node of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    pub source: CharacterId,
    /// `None` means unreachable.
    pub distances: BTreeMap<CharacterId, Option<u32>>,
}

impl DistanceMap {
    pub fn get(&self, id: &CharacterId) -> Option<Option<u32>> {
        self.distances.get(id).copied()
    }
}

/// Unweighted shortest-path distances from `source` over all nodes of `graph`.
pub fn bfs_distances(
    graph: &WeightedGraph,
    source: &CharacterId,
) -> Result<DistanceMap, GraphError> {
    let topo = Topology::from_graph(graph);
    let src = topo
        .index_of(source)
        .ok_or_else(|| GraphError::UnknownNode(source.to_string()))?;
    let distances = topo.names().iter().cloned().zip(topo.bfs(src)).collect();
    Ok(DistanceMap {
        source: source.clone(),
        distances,
    })
}

/// Partition of all nodes (isolated ones as singletons) into connected
/// components, ordered by their smallest member.
pub fn connected_components(graph: &WeightedGraph) -> Vec<BTreeSet<CharacterId>> {
    let topo = Topology::from_graph(graph);
    topo.components()
        .into_iter()
        .map(|part| part.into_iter().map(|i| topo.names()[i].clone()).collect())
        .collect()
}
