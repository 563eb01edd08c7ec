//! Character networks for TV episodes.
//!
//! Segment graphs (one per window of scenes) are summed into weighted episode
//! graphs, a fixed suite of network metrics is computed per episode, and each
//! metric is correlated with episode ratings using Spearman's rho.
//!
//! ```
//! use charnet::graph::{CharacterId, EpisodeGraph, EpisodeKey};
//! use charnet::metrics::{compute_episode_metrics, MetricsConfig};
//!
//! let mut ep = EpisodeGraph::new(EpisodeKey::new("got", 1, 1));
//! let id = |s: &str| CharacterId::new(s).unwrap();
//! ep.add_interaction(id("Jaime Lannister"), id("Tyrion Lannister"), 40.0).unwrap();
//! ep.add_interaction(id("Tyrion Lannister"), id("Ros"), 35.5).unwrap();
//! let row = compute_episode_metrics(&ep, &MetricsConfig::default()).metrics;
//! assert_eq!(row.active_nodes, 3);
//! assert_eq!(row.degree_max, 2);
//! ```

pub mod cli;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod special;
pub mod stats;
pub mod svg;
pub mod traversal;

pub use graph::{
    aggregate_segments, CharacterId, EpisodeGraph, EpisodeKey, SegmentGraph, WeightedGraph,
};
pub use ingest::{load_dataset, parse_ratings_csv, parse_segment_file, RatingsTable};
pub use metrics::{compute_episode_metrics, EpisodeMetrics, MetricColumn, MetricsConfig};
pub use stats::{correlate_all, spearman_pvalue, spearman_rho, CorrelationReport};
pub use traversal::{bfs_distances, connected_components};
