//! Per-episode network metrics.
//!
//! Everything except node strength is computed on the unweighted graph
//! restricted to active nodes (characters with at least one conversation).
//! Standard deviations are population standard deviations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CharacterId, EpisodeGraph, EpisodeKey, WeightedGraph};
use crate::traversal::Topology;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),
    #[error("graph has no edges")]
    NoEdges,
    #[error(
        "power iteration did not converge after {iterations} iterations (last step {last_step:e})"
    )]
    Convergence { iterations: usize, last_step: f64 },
    #[error("cannot summarize an empty vector")]
    EmptyVector,
}

/// How the "Efficiency" column is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EfficiencyMode {
    /// Mean global efficiency of the connected components with two or more
    /// nodes.
    #[default]
    ComponentMean,
    /// Mean over active nodes of the global efficiency of the subgraph
    /// induced by each node's neighbours.
    Neighborhood,
}

impl EfficiencyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EfficiencyMode::ComponentMean => "component-mean",
            EfficiencyMode::Neighborhood => "neighborhood",
        }
    }
}

impl fmt::Display for EfficiencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EfficiencyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "component-mean" => Ok(EfficiencyMode::ComponentMean),
            "neighborhood" => Ok(EfficiencyMode::Neighborhood),
            other => Err(format!(
                "unknown efficiency mode {other:?} (expected component-mean or neighborhood)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    pub efficiency: EfficiencyMode,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            efficiency: EfficiencyMode::default(),
            eigen_tol: DEFAULT_EIGEN_TOL,
            eigen_max_iter: DEFAULT_EIGEN_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CentralityKind {
    Degree,
    Strength,
    Harmonic,
    Eigenvector,
}

/// Per-character scores over the active node set.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub kind: CentralityKind,
    pub scores: BTreeMap<CharacterId, f64>,
}

impl CentralityVector {
    fn from_topology(kind: CentralityKind, topo: &Topology, values: Vec<f64>) -> Self {
        Self {
            kind,
            scores: topo.names().iter().cloned().zip(values).collect(),
        }
    }

    pub fn get(&self, id: &CharacterId) -> Option<f64> {
        self.scores.get(id).copied()
    }

    pub fn values(&self) -> Vec<f64> {
        self.scores.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// One column of the per-episode metric table, in correlation-table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricColumn {
    ActiveNodes,
    Density,
    Efficiency,
    Transitivity,
    StrengthMax,
    StrengthStd,
    DegreeMax,
    DegreeStd,
    HarmonicMax,
    HarmonicStd,
    EigenMax,
    EigenStd,
}

impl MetricColumn {
    pub const ALL: [MetricColumn; 12] = [
        MetricColumn::ActiveNodes,
        MetricColumn::Density,
        MetricColumn::Efficiency,
        MetricColumn::Transitivity,
        MetricColumn::StrengthMax,
        MetricColumn::StrengthStd,
        MetricColumn::DegreeMax,
        MetricColumn::DegreeStd,
        MetricColumn::HarmonicMax,
        MetricColumn::HarmonicStd,
        MetricColumn::EigenMax,
        MetricColumn::EigenStd,
    ];

    /// Column order of the metric CSV, after `Episode` and `Review`.
    pub const CSV_ORDER: [MetricColumn; 12] = [
        MetricColumn::Density,
        MetricColumn::Efficiency,
        MetricColumn::Transitivity,
        MetricColumn::StrengthMax,
        MetricColumn::StrengthStd,
        MetricColumn::DegreeMax,
        MetricColumn::DegreeStd,
        MetricColumn::HarmonicMax,
        MetricColumn::HarmonicStd,
        MetricColumn::EigenMax,
        MetricColumn::EigenStd,
        MetricColumn::ActiveNodes,
    ];

    /// Row label used in correlation tables.
    pub fn label(self) -> &'static str {
        match self {
            MetricColumn::ActiveNodes => "Active Nodes",
            MetricColumn::Density => "Density",
            MetricColumn::Efficiency => "Efficiency",
            MetricColumn::Transitivity => "Transitivity",
            MetricColumn::StrengthMax => "Max Strength",
            MetricColumn::StrengthStd => "Std Strength",
            MetricColumn::DegreeMax => "Max Degree",
            MetricColumn::DegreeStd => "Std Degree",
            MetricColumn::HarmonicMax => "Max Harmonic",
            MetricColumn::HarmonicStd => "Std Harmonic",
            MetricColumn::EigenMax => "Max Eigen",
            MetricColumn::EigenStd => "Std Eigen",
        }
    }

    /// Header used in metric CSV files.
    pub fn csv_header(self) -> &'static str {
        match self {
            MetricColumn::ActiveNodes => "Active_Nodes",
            MetricColumn::Density => "Density",
            MetricColumn::Efficiency => "Efficiency",
            MetricColumn::Transitivity => "Transitivity",
            MetricColumn::StrengthMax => "Strength_max",
            MetricColumn::StrengthStd => "Strength_std",
            MetricColumn::DegreeMax => "Degree_max",
            MetricColumn::DegreeStd => "Degree_std",
            MetricColumn::HarmonicMax => "Harmonic_max",
            MetricColumn::HarmonicStd => "Harmonic_std",
            MetricColumn::EigenMax => "Eigen_max",
            MetricColumn::EigenStd => "Eigen_std",
        }
    }

    /// Lower-case identifier used on the command line and in file names.
    pub fn slug(self) -> &'static str {
        match self {
            MetricColumn::ActiveNodes => "active_nodes",
            MetricColumn::Density => "density",
            MetricColumn::Efficiency => "efficiency",
            MetricColumn::Transitivity => "transitivity",
            MetricColumn::StrengthMax => "strength_max",
            MetricColumn::StrengthStd => "strength_std",
            MetricColumn::DegreeMax => "degree_max",
            MetricColumn::DegreeStd => "degree_std",
            MetricColumn::HarmonicMax => "harmonic_max",
            MetricColumn::HarmonicStd => "harmonic_std",
            MetricColumn::EigenMax => "eigen_max",
            MetricColumn::EigenStd => "eigen_std",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, MetricColumn::ActiveNodes | MetricColumn::DegreeMax)
    }

    pub fn from_slug(s: &str) -> Option<MetricColumn> {
        MetricColumn::ALL.into_iter().find(|c| c.slug() == s)
    }
}

impl fmt::Display for MetricColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One row of the per-episode metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub key: EpisodeKey,
    pub active_nodes: usize,
    pub density: f64,
    pub efficiency: f64,
    pub transitivity: f64,
    pub strength_max: f64,
    pub strength_std: f64,
    pub degree_max: usize,
    pub degree_std: f64,
    pub harmonic_max: f64,
    pub harmonic_std: f64,
    pub eigen_max: f64,
    pub eigen_std: f64,
}

impl EpisodeMetrics {
    pub fn zeroed(key: EpisodeKey) -> Self {
        Self {
            key,
            active_nodes: 0,
            density: 0.0,
            efficiency: 0.0,
            transitivity: 0.0,
            strength_max: 0.0,
            strength_std: 0.0,
            degree_max: 0,
            degree_std: 0.0,
            harmonic_max: 0.0,
            harmonic_std: 0.0,
            eigen_max: 0.0,
            eigen_std: 0.0,
        }
    }

    pub fn value(&self, column: MetricColumn) -> f64 {
        match column {
            MetricColumn::ActiveNodes => self.active_nodes as f64,
            MetricColumn::Density => self.density,
            MetricColumn::Efficiency => self.efficiency,
            MetricColumn::Transitivity => self.transitivity,
            MetricColumn::StrengthMax => self.strength_max,
            MetricColumn::StrengthStd => self.strength_std,
            MetricColumn::DegreeMax => self.degree_max as f64,
            MetricColumn::DegreeStd => self.degree_std,
            MetricColumn::HarmonicMax => self.harmonic_max,
            MetricColumn::HarmonicStd => self.harmonic_std,
            MetricColumn::EigenMax => self.eigen_max,
            MetricColumn::EigenStd => self.eigen_std,
        }
    }
}

/// A metric that could not be computed and was reported as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricWarning {
    /// `None` when the whole row is degenerate.
    pub column: Option<MetricColumn>,
    pub error: MetricError,
}

impl fmt::Display for MetricWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "{}: {}", c.slug(), self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsOutcome {
    pub metrics: EpisodeMetrics,
    pub warnings: Vec<MetricWarning>,
}

pub fn active_nodes(graph: &WeightedGraph) -> usize {
    Topology::active(graph).len()
}

/// `2m / (n(n-1))` over active nodes.
pub fn density(graph: &WeightedGraph) -> Result<f64, MetricError> {
    density_of(&Topology::active(graph))
}

pub fn density_of(topo: &Topology) -> Result<f64, MetricError> {
    let n = topo.len();
    if n < 2 {
        return Err(MetricError::DegenerateGraph(format!(
            "density needs at least 2 active nodes, found {n}"
        )));
    }
    let m = topo.edge_count();
    Ok(2.0 * m as f64 / (n * (n - 1)) as f64)
}

/// Total conversation seconds per active character.
pub fn node_strengths(graph: &WeightedGraph) -> CentralityVector {
    let mut scores = BTreeMap::new();
    for (a, b, w) in graph.edges() {
        *scores.entry(a.clone()).or_insert(0.0) += w;
        *scores.entry(b.clone()).or_insert(0.0) += w;
    }
    CentralityVector {
        kind: CentralityKind::Strength,
        scores,
    }
}

/// Mean of `1/d(i, j)` over ordered pairs of distinct nodes, unreachable
/// pairs contributing 0. Graphs with fewer than two nodes have efficiency 0.
pub fn global_efficiency(topo: &Topology) -> f64 {
    let n = topo.len();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .map(|s| {
            topo.bfs(s)
                .into_iter()
                .flatten()
                .filter(|&d| d > 0)
                .map(|d| 1.0 / d as f64)
                .sum::<f64>()
        })
        .sum();
    total / (n * (n - 1)) as f64
}

pub fn efficiency_metric(graph: &WeightedGraph, mode: EfficiencyMode) -> Result<f64, MetricError> {
    efficiency_of(&Topology::active(graph), mode)
}

pub fn efficiency_of(topo: &Topology, mode: EfficiencyMode) -> Result<f64, MetricError> {
    if topo.is_empty() {
        return Err(MetricError::DegenerateGraph(
            "efficiency needs at least one active node".into(),
        ));
    }
    match mode {
        EfficiencyMode::ComponentMean => {
            let parts: Vec<f64> = topo
                .components()
                .into_iter()
                .filter(|c| c.len() >= 2)
                .map(|c| global_efficiency(&topo.induced(&c)))
                .collect();
            if parts.is_empty() {
                return Err(MetricError::DegenerateGraph(
                    "no component has 2 or more nodes".into(),
                ));
            }
            Ok(parts.iter().sum::<f64>() / parts.len() as f64)
        }
        EfficiencyMode::Neighborhood => {
            let n = topo.len();
            let total: f64 = (0..n)
                .map(|v| global_efficiency(&topo.induced(topo.neighbors(v))))
                .sum();
            Ok(total / n as f64)
        }
    }
}

/// Three times the triangle count over the number of length-2 paths.
pub fn transitivity(graph: &WeightedGraph) -> f64 {
    transitivity_of(&Topology::active(graph))
}

pub fn transitivity_of(topo: &Topology) -> f64 {
    let mut triangles = 0u64;
    let mut triads = 0u64;
    for u in 0..topo.len() {
        let deg = topo.degree(u) as u64;
        triads += deg * deg.saturating_sub(1) / 2;
        for &v in topo.neighbors(u).iter().filter(|&&v| v > u) {
            // common neighbours w > v, so each triangle is counted once
            triangles += count_common_above(topo.neighbors(u), topo.neighbors(v), v);
        }
    }
    if triads == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triads as f64
    }
}

fn count_common_above(a: &[usize], b: &[usize], floor: usize) -> u64 {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i] > floor {
                    count += 1;
                }
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn degree_vector(graph: &WeightedGraph) -> CentralityVector {
    let topo = Topology::active(graph);
    let degrees = (0..topo.len()).map(|v| topo.degree(v) as f64).collect();
    CentralityVector::from_topology(CentralityKind::Degree, &topo, degrees)
}

/// Unnormalised harmonic centrality: `H(u) = sum over v != u of 1/d(v, u)`.
pub fn harmonic_vector(graph: &WeightedGraph) -> CentralityVector {
    let topo = Topology::active(graph);
    let scores = harmonic_of(&topo);
    CentralityVector::from_topology(CentralityKind::Harmonic, &topo, scores)
}

pub fn harmonic_of(topo: &Topology) -> Vec<f64> {
    (0..topo.len())
        .map(|u| {
            topo.bfs(u)
                .into_iter()
                .flatten()
                .filter(|&d| d > 0)
                .map(|d| 1.0 / d as f64)
                .sum()
        })
        .collect()
}

/// Result of power iteration on the adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// Unit Euclidean norm, non-negative entries, indexed like the topology.
    pub vector: Vec<f64>,
    /// Rayleigh quotient of `vector`.
    pub eigenvalue: f64,
    pub iterations: usize,
}

pub fn eigenvector_vector(
    graph: &WeightedGraph,
    tol: f64,
    max_iter: usize,
) -> Result<CentralityVector, MetricError> {
    let topo = Topology::active(graph);
    let solution = eigenvector_of(&topo, tol, max_iter)?;
    Ok(CentralityVector::from_topology(
        CentralityKind::Eigenvector,
        &topo,
        solution.vector,
    ))
}

/// Dominant eigenvector of the unweighted adjacency matrix.
///
/// Iterates `x <- (A + I) x / |(A + I) x|` from the uniform vector. The unit
/// shift leaves eigenvectors unchanged and makes the Perron root strictly
/// dominant in magnitude, so bipartite graphs converge instead of
/// oscillating. Stops once successive iterates differ by less than `tol` in
/// max-norm.
pub fn eigenvector_of(
    topo: &Topology,
    tol: f64,
    max_iter: usize,
) -> Result<EigenSolution, MetricError> {
    let n = topo.len();
    if topo.edge_count() == 0 {
        return Err(MetricError::NoEdges);
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    let mut last_step = f64::INFINITY;
    for iteration in 1..=max_iter {
        for v in 0..n {
            next[v] = x[v] + topo.neighbors(v).iter().map(|&u| x[u]).sum::<f64>();
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut next {
            *v /= norm;
        }
        last_step = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if last_step < tol {
            let eigenvalue = (0..n)
                .map(|v| x[v] * topo.neighbors(v).iter().map(|&u| x[u]).sum::<f64>())
                .sum();
            return Ok(EigenSolution {
                vector: x,
                eigenvalue,
                iterations: iteration,
            });
        }
    }
    Err(MetricError::Convergence {
        iterations: max_iter,
        last_step,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub max: f64,
    pub std: f64,
}

pub fn summarize(vector: &CentralityVector) -> Result<Summary, MetricError> {
    summarize_values(&vector.values())
}

/// Maximum and population standard deviation.
pub fn summarize_values(values: &[f64]) -> Result<Summary, MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptyVector);
    }
    let n = values.len() as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Summary {
        max,
        std: var.sqrt(),
    })
}

/// Fills every column for one episode. A metric that cannot be computed is
/// reported as 0 with a warning instead of failing the row.
pub fn compute_episode_metrics(episode: &EpisodeGraph, config: &MetricsConfig) -> MetricsOutcome {
    let graph = &episode.graph;
    let topo = Topology::active(graph);
    let mut metrics = EpisodeMetrics::zeroed(episode.key.clone());
    let mut warnings = Vec::new();

    if topo.edge_count() == 0 {
        warnings.push(MetricWarning {
            column: None,
            error: MetricError::DegenerateGraph("episode graph has no edges".into()),
        });
        return MetricsOutcome { metrics, warnings };
    }

    let mut record = |column: MetricColumn, result: Result<f64, MetricError>| match result {
        Ok(v) => v,
        Err(error) => {
            warnings.push(MetricWarning {
                column: Some(column),
                error,
            });
            0.0
        }
    };

    metrics.active_nodes = topo.len();
    metrics.density = record(MetricColumn::Density, density_of(&topo));
    metrics.efficiency = record(
        MetricColumn::Efficiency,
        efficiency_of(&topo, config.efficiency),
    );
    metrics.transitivity = transitivity_of(&topo);

    let strength = summarize(&node_strengths(graph)).expect("active set is non-empty");
    metrics.strength_max = strength.max;
    metrics.strength_std = strength.std;

    let degrees: Vec<f64> = (0..topo.len()).map(|v| topo.degree(v) as f64).collect();
    let degree = summarize_values(&degrees).expect("active set is non-empty");
    metrics.degree_max = degree.max as usize;
    metrics.degree_std = degree.std;

    let harmonic = summarize_values(&harmonic_of(&topo)).expect("active set is non-empty");
    metrics.harmonic_max = harmonic.max;
    metrics.harmonic_std = harmonic.std;

    match eigenvector_of(&topo, config.eigen_tol, config.eigen_max_iter)
        .and_then(|s| summarize_values(&s.vector))
    {
        Ok(s) => {
            metrics.eigen_max = s.max;
            metrics.eigen_std = s.std;
        }
        Err(error) => {
            record(MetricColumn::EigenMax, Err(error.clone()));
            record(MetricColumn::EigenStd, Err(error));
        }
    }

    MetricsOutcome { metrics, warnings }
}
