//! Weighted undirected character graphs.
//!
//! A [`SegmentGraph`] covers one window of scenes; an [`EpisodeGraph`] is the
//! edgewise sum of all segment graphs of one episode. Edge weights are
//! conversation time in seconds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("character name is empty")]
    EmptyName,
    #[error("self-loop on character {0:?}")]
    SelfLoop(String),
    #[error("weight {weight} on pair ({a:?}, {b:?}) is not strictly positive")]
    NonPositiveWeight { a: String, b: String, weight: f64 },
    #[error("weight on pair ({a:?}, {b:?}) is not finite")]
    NonFiniteWeight { a: String, b: String },
    #[error("episode {0} has no segment graphs")]
    EmptyEpisode(EpisodeKey),
    #[error("character {0:?} is not in the graph")]
    UnknownNode(String),
}

/// A speaking character. Names are trimmed; comparison is exact and
/// case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CharacterId(String);

impl CharacterId {
    pub fn new(name: &str) -> Result<Self, GraphError> {
        let trimmed = name.trim();
        if trimmed.is_empty() {
            return Err(GraphError::EmptyName);
        }
        Ok(Self(trimmed.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for CharacterId {
    type Error = GraphError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(&value)
    }
}

impl From<CharacterId> for String {
    fn from(id: CharacterId) -> Self {
        id.0
    }
}

impl fmt::Display for CharacterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identity of one episode. Orders lexicographically by series, season,
/// then episode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpisodeKey {
    pub series: String,
    pub season: u32,
    pub episode: u32,
}

impl EpisodeKey {
    pub fn new(series: impl Into<String>, season: u32, episode: u32) -> Self {
        Self {
            series: series.into(),
            season,
            episode,
        }
    }

    /// Key for a series numbered by a single running ordinal across seasons.
    pub fn flat(series: impl Into<String>, ordinal: u32) -> Self {
        Self::new(series, 1, ordinal)
    }
}

impl fmt::Display for EpisodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.series, self.season, self.episode)
    }
}

/// Unordered pair key: always stored with the smaller name first.
fn canonical_pair(a: CharacterId, b: CharacterId) -> (CharacterId, CharacterId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn validate_weight(a: &CharacterId, b: &CharacterId, seconds: f64) -> Result<(), GraphError> {
    if seconds.is_nan() || seconds <= 0.0 {
        return Err(GraphError::NonPositiveWeight {
            a: a.to_string(),
            b: b.to_string(),
            weight: seconds,
        });
    }
    if !seconds.is_finite() {
        return Err(GraphError::NonFiniteWeight {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    Ok(())
}

/// Simple undirected graph with strictly positive edge weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedGraph {
    nodes: BTreeSet<CharacterId>,
    edges: BTreeMap<(CharacterId, CharacterId), f64>,
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: CharacterId) {
        self.nodes.insert(id);
    }

    /// Adds `seconds` of conversation between `a` and `b`, creating the edge
    /// and both endpoints when absent.
    pub fn add_interaction(
        &mut self,
        a: CharacterId,
        b: CharacterId,
        seconds: f64,
    ) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        validate_weight(&a, &b, seconds)?;
        let pair = canonical_pair(a, b);
        let total = self.edges.get(&pair).copied().unwrap_or(0.0) + seconds;
        if !total.is_finite() {
            return Err(GraphError::NonFiniteWeight {
                a: pair.0.to_string(),
                b: pair.1.to_string(),
            });
        }
        self.nodes.insert(pair.0.clone());
        self.nodes.insert(pair.1.clone());
        self.edges.insert(pair, total);
        Ok(())
    }

    pub fn nodes(&self) -> &BTreeSet<CharacterId> {
        &self.nodes
    }

    pub fn contains(&self, id: &CharacterId) -> bool {
        self.nodes.contains(id)
    }

    /// Edges in canonical order, each pair reported once with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (&CharacterId, &CharacterId, f64)> + '_ {
        self.edges.iter().map(|((a, b), w)| (a, b, *w))
    }

    pub fn weight(&self, a: &CharacterId, b: &CharacterId) -> Option<f64> {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.edges.get(&key).copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    /// Nodes that appear in no edge.
    pub fn isolated_nodes(&self) -> BTreeSet<&CharacterId> {
        let mut touched = BTreeSet::new();
        for (a, b) in self.edges.keys() {
            touched.insert(a);
            touched.insert(b);
        }
        self.nodes.iter().filter(|n| !touched.contains(n)).collect()
    }

    /// Adds every node and edge weight of `other` into `self`.
    pub fn absorb(&mut self, other: &WeightedGraph) {
        self.nodes.extend(other.nodes.iter().cloned());
        for (pair, w) in &other.edges {
            *self.edges.entry(pair.clone()).or_insert(0.0) += *w;
        }
    }

    /// Copy with every edge weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightedGraph {
        WeightedGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|(pair, w)| (pair.clone(), w * factor))
                .collect(),
        }
    }
}

/// Character network for one window of consecutive scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGraph {
    pub index: usize,
    pub graph: WeightedGraph,
}

impl SegmentGraph {
    pub fn new(index: usize) -> Self {
        Self {
            index,
            graph: WeightedGraph::new(),
        }
    }

    pub fn add_interaction(
        &mut self,
        a: CharacterId,
        b: CharacterId,
        seconds: f64,
    ) -> Result<(), GraphError> {
        self.graph.add_interaction(a, b, seconds)
    }
}

/// Weighted union of all segment graphs of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeGraph {
    pub key: EpisodeKey,
    /// Running episode number across seasons, when known.
    pub ordinal: Option<u32>,
    pub graph: WeightedGraph,
    pub segment_count: usize,
}

impl EpisodeGraph {
    pub fn new(key: EpisodeKey) -> Self {
        Self {
            key,
            ordinal: None,
            graph: WeightedGraph::new(),
            segment_count: 0,
        }
    }

    pub fn add_interaction(
        &mut self,
        a: CharacterId,
        b: CharacterId,
        seconds: f64,
    ) -> Result<(), GraphError> {
        self.graph.add_interaction(a, b, seconds)
    }

    /// Edgewise sum of two partial aggregations of the same episode.
    pub fn merge(&self, other: &EpisodeGraph) -> EpisodeGraph {
        let mut merged = self.clone();
        merged.graph.absorb(&other.graph);
        merged.segment_count += other.segment_count;
        merged
    }
}

/// Sums the segment graphs of one episode into a single weighted graph.
///
/// Segments are folded in the given order; within a segment edges are visited
/// in canonical pair order, so the result is reproducible bit for bit.
pub fn aggregate_segments(
    segments: &[SegmentGraph],
    key: EpisodeKey,
) -> Result<EpisodeGraph, GraphError> {
    if segments.is_empty() {
        return Err(GraphError::EmptyEpisode(key));
    }
    let mut episode = EpisodeGraph::new(key);
    for segment in segments {
        episode.graph.absorb(&segment.graph);
    }
    if let Some((a, b, _)) = episode.graph.edges().find(|(_, _, w)| !w.is_finite()) {
        return Err(GraphError::NonFiniteWeight {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    episode.segment_count = segments.len();
    Ok(episode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> CharacterId {
        CharacterId::new(s).unwrap()
    }

    fn segment(index: usize, edges: &[(&str, &str, f64)]) -> SegmentGraph {
        let mut s = SegmentGraph::new(index);
        for (a, b, w) in edges {
            s.add_interaction(id(a), id(b), *w).unwrap();
        }
        s
    }

    #[test]
    fn names_are_trimmed_and_case_sensitive() {
        assert_eq!(id("  Jaime Lannister "), id("Jaime Lannister"));
        assert_ne!(id("jaime"), id("Jaime"));
        assert_eq!(CharacterId::new("   "), Err(GraphError::EmptyName));
    }

    #[test]
    fn add_interaction_accumulates_orientation_free() {
        let mut g = WeightedGraph::new();
        g.add_interaction(id("A"), id("B"), 5.0).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(&id("A"), &id("B")), Some(5.0));
        g.add_interaction(id("A"), id("B"), 2.5).unwrap();
        assert_eq!(g.weight(&id("A"), &id("B")), Some(7.5));
        g.add_interaction(id("B"), id("A"), 1.0).unwrap();
        assert_eq!(g.weight(&id("B"), &id("A")), Some(8.5));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn add_interaction_rejects_bad_input() {
        let mut g = WeightedGraph::new();
        assert!(matches!(
            g.add_interaction(id("A"), id("A"), 1.0),
            Err(GraphError::SelfLoop(_))
        ));
        for w in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                g.add_interaction(id("A"), id("B"), w),
                Err(GraphError::NonPositiveWeight { .. })
            ));
        }
        assert!(matches!(
            g.add_interaction(id("A"), id("B"), f64::INFINITY),
            Err(GraphError::NonFiniteWeight { .. })
        ));
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn aggregation_sums_recurring_pair() {
        // pair present in segments 1, 4, 7 and 10 of a ten-segment episode
        let weights = [3.25, 11.0, 0.5, 42.125];
        let segments: Vec<_> = (1..=10)
            .map(|i| match i {
                1 => segment(i, &[("A", "B", weights[0])]),
                4 => segment(i, &[("A", "B", weights[1])]),
                7 => segment(i, &[("B", "A", weights[2])]),
                10 => segment(i, &[("A", "B", weights[3])]),
                _ => segment(i, &[("C", "D", 1.0)]),
            })
            .collect();
        let ep = aggregate_segments(&segments, EpisodeKey::new("got", 1, 1)).unwrap();
        assert_eq!(
            ep.graph.weight(&id("A"), &id("B")),
            Some(weights.iter().sum())
        );
        assert_eq!(ep.graph.weight(&id("C"), &id("D")), Some(6.0));
        assert_eq!(ep.segment_count, 10);
    }

    #[test]
    fn aggregation_of_single_segment_is_identity() {
        let s = segment(0, &[("A", "B", 2.0), ("B", "C", 4.0)]);
        let ep = aggregate_segments(std::slice::from_ref(&s), EpisodeKey::new("x", 1, 1)).unwrap();
        assert_eq!(ep.graph, s.graph);
    }

    #[test]
    fn aggregation_two_pairs() {
        let segs = [
            segment(0, &[("A", "B", 3.0)]),
            segment(1, &[("B", "C", 2.0)]),
            segment(2, &[("A", "B", 1.0)]),
        ];
        let ep = aggregate_segments(&segs, EpisodeKey::new("x", 1, 1)).unwrap();
        assert_eq!(ep.graph.edge_count(), 2);
        assert_eq!(ep.graph.weight(&id("A"), &id("B")), Some(4.0));
        assert_eq!(ep.graph.weight(&id("B"), &id("C")), Some(2.0));
        let names: Vec<_> = ep.graph.nodes().iter().map(|n| n.as_str()).collect();
        assert_eq!(names, ["A", "B", "C"]);
    }

    #[test]
    fn aggregation_keeps_isolated_nodes() {
        let mut s = segment(0, &[("A", "B", 1.0)]);
        s.graph.add_node(id("Z"));
        let ep = aggregate_segments(&[s], EpisodeKey::new("x", 1, 1)).unwrap();
        assert_eq!(ep.graph.node_count(), 3);
        assert_eq!(ep.graph.isolated_nodes().len(), 1);
    }

    #[test]
    fn empty_episode_is_an_error() {
        let key = EpisodeKey::new("x", 1, 2);
        assert_eq!(
            aggregate_segments(&[], key.clone()),
            Err(GraphError::EmptyEpisode(key))
        );
    }

    #[test]
    fn episode_keys_order_lexicographically() {
        let mut keys = vec![
            EpisodeKey::new("got", 2, 1),
            EpisodeKey::new("bb", 1, 9),
            EpisodeKey::new("got", 1, 10),
            EpisodeKey::new("got", 1, 2),
        ];
        keys.sort();
        assert_eq!(
            keys,
            vec![
                EpisodeKey::new("bb", 1, 9),
                EpisodeKey::new("got", 1, 2),
                EpisodeKey::new("got", 1, 10),
                EpisodeKey::new("got", 2, 1),
            ]
        );
    }

    #[test]
    fn overflowing_sums_are_rejected() {
        let big = f64::MAX / 1.5;
        let mut g = WeightedGraph::new();
        g.add_interaction(id("A"), id("B"), big).unwrap();
        assert!(matches!(
            g.add_interaction(id("B"), id("A"), big),
            Err(GraphError::NonFiniteWeight { .. })
        ));
        assert_eq!(g.weight(&id("A"), &id("B")), Some(big));

        let s0 = segment(0, &[("A", "B", big)]);
        let s1 = segment(1, &[("A", "B", big)]);
        assert!(matches!(
            aggregate_segments(&[s0, s1], EpisodeKey::new("s", 1, 1)),
            Err(GraphError::NonFiniteWeight { .. })
        ));
    }
}
