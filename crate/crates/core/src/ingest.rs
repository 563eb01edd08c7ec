//! Parsers for episode segment files, the ratings CSV, and metric tables,
//! plus dataset assembly.
//!
//! Segment files are JSON, one episode per file:
//!
//! ```json
//! {"series": "got", "season": 1, "episode": 1, "ordinal": 1,
//!  "segments": [{"index": 0, "nodes": ["Jaime Lannister", "Ros"],
//!                "edges": [{"a": "Jaime Lannister", "b": "Ros", "w": 12.5}]}]}
//! ```
//!
//! `ordinal`, `index` and `nodes` are optional. Every parser returns a
//! structured error on bad input and never panics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::graph::EpisodeKey;
use crate::graph::{aggregate_segments, CharacterId, EpisodeGraph, GraphError, SegmentGraph};
use crate::metrics::MetricColumn;
use crate::stats::MetricSource;

pub const RATINGS_HEADER: [&str; 4] = ["series", "season", "episode", "rating"];
pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 10.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("format error{}: {message}", line_suffix(*.line))]
    Format {
        line: Option<usize>,
        message: String,
    },
    #[error("invalid segment {segment}: {reason}")]
    Invariant { segment: usize, reason: String },
    #[error("rating {value} out of range [1, 10]{}", line_suffix(*.line))]
    Range { line: Option<usize>, value: f64 },
    #[error("duplicate key {key}{}", line_suffix(*.line))]
    DuplicateKey {
        line: Option<usize>,
        key: EpisodeKey,
    },
    #[error("no episode files found")]
    EmptyDataset,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{name}: {source}")]
    InFile {
        name: String,
        #[source]
        source: Box<IngestError>,
    },
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl IngestError {
    fn format(line: Option<usize>, message: impl Into<String>) -> Self {
        IngestError::Format {
            line,
            message: message.into(),
        }
    }

    fn in_file(self, name: &str) -> Self {
        IngestError::InFile {
            name: name.to_owned(),
            source: Box::new(self),
        }
    }
}

/// Non-fatal findings reported alongside parsed data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    /// The same unordered pair was declared twice in one segment; weights
    /// were summed.
    DuplicateEdge {
        segment: usize,
        a: String,
        b: String,
    },
    /// A listed character has no conversation in this segment.
    IsolatedNode {
        segment: usize,
        name: String,
    },
    DuplicateEpisode {
        key: EpisodeKey,
        source: String,
    },
    MissingRating {
        key: EpisodeKey,
    },
    RatingWithoutEpisode {
        key: EpisodeKey,
    },
    DuplicateMetricsRow {
        line: usize,
        key: EpisodeKey,
    },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::DuplicateEdge { segment, a, b } => {
                write!(
                    f,
                    "segment {segment}: duplicate edge {a} -- {b}, weights summed"
                )
            }
            IngestWarning::IsolatedNode { segment, name } => {
                write!(f, "segment {segment}: isolated node {name}")
            }
            IngestWarning::DuplicateEpisode { key, source } => {
                write!(
                    f,
                    "{key}: duplicate episode key, first kept (dropped {source})"
                )
            }
            IngestWarning::MissingRating { key } => write!(f, "{key}: missing rating"),
            IngestWarning::RatingWithoutEpisode { key } => {
                write!(f, "{key}: rating without episode")
            }
            IngestWarning::DuplicateMetricsRow { line, key } => {
                write!(
                    f,
                    "line {line}: duplicate metrics row for {key}, first kept"
                )
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEpisode {
    series: String,
    season: u32,
    episode: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ordinal: Option<u32>,
    segments: Vec<RawSegment>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<String>>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    a: String,
    b: String,
    w: f64,
}

/// One parsed segment file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedEpisode {
    pub key: EpisodeKey,
    pub ordinal: Option<u32>,
    pub segments: Vec<SegmentGraph>,
    pub warnings: Vec<IngestWarning>,
}

impl ParsedEpisode {
    pub fn aggregate(&self) -> Result<EpisodeGraph, GraphError> {
        let mut episode = aggregate_segments(&self.segments, self.key.clone())?;
        episode.ordinal = self.ordinal;
        Ok(episode)
    }
}

/// Parses one episode's segment file.
pub fn parse_segment_file(bytes: &[u8]) -> Result<ParsedEpisode, IngestError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| IngestError::format(None, format!("input is not UTF-8: {e}")))?;
    let raw: RawEpisode = serde_json::from_str(text)
        .map_err(|e| IngestError::format(Some(e.line()), e.to_string()))?;

    if raw.series.trim().is_empty() {
        return Err(IngestError::format(None, "series is empty"));
    }
    if raw.season == 0 || raw.episode == 0 {
        return Err(IngestError::format(
            None,
            "season and episode must be positive",
        ));
    }
    if raw.ordinal == Some(0) {
        return Err(IngestError::format(None, "ordinal must be positive"));
    }
    let key = EpisodeKey::new(raw.series.trim(), raw.season, raw.episode);

    let mut warnings = Vec::new();
    let mut segments = Vec::with_capacity(raw.segments.len());
    for (position, seg) in raw.segments.into_iter().enumerate() {
        if let Some(index) = seg.index {
            if index != position {
                return Err(IngestError::format(
                    None,
                    format!("segment at position {position} declares index {index}"),
                ));
            }
        }
        segments.push(build_segment(position, seg, &mut warnings)?);
    }
    Ok(ParsedEpisode {
        key,
        ordinal: raw.ordinal,
        segments,
        warnings,
    })
}

fn build_segment(
    index: usize,
    raw: RawSegment,
    warnings: &mut Vec<IngestWarning>,
) -> Result<SegmentGraph, IngestError> {
    let invariant = |reason: String| IngestError::Invariant {
        segment: index,
        reason,
    };
    let name =
        |s: &str| CharacterId::new(s).map_err(|_| invariant(format!("empty character name {s:?}")));

    let listed: Option<BTreeSet<CharacterId>> = raw
        .nodes
        .as_ref()
        .map(|names| names.iter().map(|n| name(n)).collect())
        .transpose()?;

    let mut segment = SegmentGraph::new(index);
    for edge in &raw.edges {
        let a = name(&edge.a)?;
        let b = name(&edge.b)?;
        if let Some(listed) = &listed {
            for end in [&a, &b] {
                if !listed.contains(end) {
                    return Err(invariant(format!(
                        "edge endpoint {end} is not in the node list"
                    )));
                }
            }
        }
        if segment.graph.weight(&a, &b).is_some() {
            let (lo, hi) = if a <= b { (&a, &b) } else { (&b, &a) };
            warnings.push(IngestWarning::DuplicateEdge {
                segment: index,
                a: lo.to_string(),
                b: hi.to_string(),
            });
        }
        segment
            .add_interaction(a.clone(), b.clone(), edge.w)
            .map_err(|e| invariant(format!("pair ({a}, {b}): {e}")))?;
    }

    if let Some(listed) = listed {
        for node in listed {
            segment.graph.add_node(node);
        }
        for node in segment.graph.isolated_nodes() {
            warnings.push(IngestWarning::IsolatedNode {
                segment: index,
                name: node.to_string(),
            });
        }
    }
    Ok(segment)
}

/// Canonical JSON for a parsed episode: sorted nodes, canonical edge order,
/// shortest round-trip float formatting.
pub fn episode_to_json(episode: &ParsedEpisode) -> String {
    let raw = RawEpisode {
        series: episode.key.series.clone(),
        season: episode.key.season,
        episode: episode.key.episode,
        ordinal: episode.ordinal,
        segments: episode
            .segments
            .iter()
            .map(|s| RawSegment {
                index: Some(s.index),
                nodes: Some(s.graph.nodes().iter().map(|n| n.to_string()).collect()),
                edges: s
                    .graph
                    .edges()
                    .map(|(a, b, w)| RawEdge {
                        a: a.to_string(),
                        b: b.to_string(),
                        w,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("episode serializes")
}

/// Review score per episode, each within [1, 10].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsTable {
    ratings: BTreeMap<EpisodeKey, f64>,
}

impl RatingsTable {
    pub fn insert(&mut self, key: EpisodeKey, rating: f64) -> Result<(), IngestError> {
        if !(MIN_RATING..=MAX_RATING).contains(&rating) {
            return Err(IngestError::Range {
                line: None,
                value: rating,
            });
        }
        if self.ratings.contains_key(&key) {
            return Err(IngestError::DuplicateKey { line: None, key });
        }
        self.ratings.insert(key, rating);
        Ok(())
    }

    pub fn get(&self, key: &EpisodeKey) -> Option<f64> {
        self.ratings.get(key).copied()
    }

    pub fn contains(&self, key: &EpisodeKey) -> bool {
        self.ratings.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EpisodeKey, f64)> + '_ {
        self.ratings.iter().map(|(k, v)| (k, *v))
    }
}

fn csv_line(err: &csv::Error) -> Option<usize> {
    err.position().map(|p| p.line() as usize)
}

fn record_line(record: &csv::StringRecord) -> Option<usize> {
    record.position().map(|p| p.line() as usize)
}

fn parse_positive(field: &str, what: &str, line: Option<usize>) -> Result<u32, IngestError> {
    match field.parse::<u32>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(IngestError::format(
            line,
            format!("{what} must be a positive integer, got {field:?}"),
        )),
    }
}

fn csv_reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes)
}

/// Parses `series,season,episode,rating` rows.
pub fn parse_ratings_csv(bytes: &[u8]) -> Result<RatingsTable, IngestError> {
    std::str::from_utf8(bytes)
        .map_err(|e| IngestError::format(None, format!("input is not UTF-8: {e}")))?;
    let mut reader = csv_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| IngestError::format(csv_line(&e), e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != RATINGS_HEADER {
        return Err(IngestError::format(
            Some(1),
            format!(
                "expected header {:?}, got {:?}",
                RATINGS_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut table = RatingsTable::default();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::format(csv_line(&e), e.to_string()))?;
        let line = record_line(&record);
        let series = &record[0];
        if series.is_empty() {
            return Err(IngestError::format(line, "series is empty"));
        }
        let season = parse_positive(&record[1], "season", line)?;
        let episode = parse_positive(&record[2], "episode", line)?;
        let rating: f64 = record[3].parse().map_err(|_| {
            IngestError::format(line, format!("rating {:?} is not a number", &record[3]))
        })?;
        table
            .insert(EpisodeKey::new(series, season, episode), rating)
            .map_err(|e| match e {
                IngestError::Range { value, .. } => IngestError::Range { line, value },
                IngestError::DuplicateKey { key, .. } => IngestError::DuplicateKey { line, key },
                other => other,
            })?;
    }
    Ok(table)
}

/// A metric-table row read back from CSV. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub key: EpisodeKey,
    pub review: Option<f64>,
    pub values: BTreeMap<MetricColumn, f64>,
}

impl MetricSource for MetricRecord {
    fn key(&self) -> &EpisodeKey {
        &self.key
    }

    fn metric(&self, column: MetricColumn) -> Option<f64> {
        self.values.get(&column).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTable {
    pub records: Vec<MetricRecord>,
    pub warnings: Vec<IngestWarning>,
}

impl MetricsTable {
    /// Ratings taken from the `Review` column.
    pub fn ratings(&self) -> Result<RatingsTable, IngestError> {
        let mut table = RatingsTable::default();
        for r in &self.records {
            if let Some(review) = r.review {
                table.insert(r.key.clone(), review)?;
            }
        }
        Ok(table)
    }
}

/// Header of the metric CSV: `Episode`, `Review`, then
/// [`MetricColumn::CSV_ORDER`].
pub fn metrics_csv_header() -> Vec<&'static str> {
    let mut header = vec!["Episode", "Review"];
    header.extend(MetricColumn::CSV_ORDER.iter().map(|c| c.csv_header()));
    header
}

fn optional_cell(cell: &str) -> Option<&str> {
    match cell {
        "" | "NA" => None,
        other => Some(other),
    }
}

/// Parses a metric table as written by the `metrics` command. Episodes are
/// keyed by running ordinal (`EpisodeKey::flat`). The trailing
/// `Active_Nodes` column may be omitted. Rows repeating an episode are
/// dropped with a warning, keeping the first.
pub fn parse_metrics_csv(series: &str, bytes: &[u8]) -> Result<MetricsTable, IngestError> {
    std::str::from_utf8(bytes)
        .map_err(|e| IngestError::format(None, format!("input is not UTF-8: {e}")))?;
    let mut reader = csv_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::format(csv_line(&e), e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let full = metrics_csv_header();
    let columns: &[MetricColumn] = if header == full {
        &MetricColumn::CSV_ORDER
    } else if header == full[..full.len() - 1] {
        &MetricColumn::CSV_ORDER[..MetricColumn::CSV_ORDER.len() - 1]
    } else {
        return Err(IngestError::format(
            None,
            format!("unexpected metrics header {:?}", header.join(",")),
        ));
    };

    let mut table = MetricsTable::default();
    let mut seen = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::format(csv_line(&e), e.to_string()))?;
        let line = record_line(&record);
        let ordinal = parse_positive(&record[0], "Episode", line)?;
        let key = EpisodeKey::flat(series, ordinal);
        let review = optional_cell(&record[1])
            .map(|cell| {
                let v: f64 = cell.parse().map_err(|_| {
                    IngestError::format(line, format!("Review {cell:?} is not a number"))
                })?;
                if (MIN_RATING..=MAX_RATING).contains(&v) {
                    Ok(v)
                } else {
                    Err(IngestError::Range { line, value: v })
                }
            })
            .transpose()?;
        let mut values = BTreeMap::new();
        for (column, cell) in columns.iter().zip(record.iter().skip(2)) {
            if let Some(cell) = optional_cell(cell) {
                let v: f64 = cell.parse().map_err(|_| {
                    IngestError::format(
                        line,
                        format!("{} {cell:?} is not a number", column.csv_header()),
                    )
                })?;
                if !v.is_finite() {
                    return Err(IngestError::format(
                        line,
                        format!("{} is not finite", column.csv_header()),
                    ));
                }
                values.insert(*column, v);
            }
        }
        if !seen.insert(key.clone()) {
            table.warnings.push(IngestWarning::DuplicateMetricsRow {
                line: line.unwrap_or(0),
                key,
            });
            continue;
        }
        table.records.push(MetricRecord {
            key,
            review,
            values,
        });
    }
    Ok(table)
}

/// Raw bytes of one input file with a name for diagnostics.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl SourceFile {
    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(Self {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            bytes,
        })
    }
}

/// All `*.json` files directly inside `dir`, sorted by file name.
pub fn read_segment_dir(dir: &Path) -> Result<Vec<SourceFile>, IngestError> {
    let io = |source| IngestError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(|p| SourceFile::read(p)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub key: EpisodeKey,
    pub source: String,
    pub segment_count: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub warnings: Vec<IngestWarning>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Dataset-level findings: duplicates, ratings without episodes.
    pub warnings: Vec<IngestWarning>,
}

impl DatasetManifest {
    pub fn warning_count(&self) -> usize {
        self.warnings.len() + self.entries.iter().map(|e| e.warnings.len()).sum::<usize>()
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.warnings
            .iter()
            .filter(|w| matches!(w, IngestWarning::DuplicateEpisode { .. }))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Aggregated episodes sorted by key, one per key.
    pub episodes: Vec<EpisodeGraph>,
    pub ratings: RatingsTable,
    pub manifest: DatasetManifest,
}

impl Dataset {
    pub fn series(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .episodes
            .iter()
            .map(|e| e.key.series.as_str())
            .collect();
        set.into_iter().map(str::to_owned).collect()
    }

    pub fn episodes_of<'a>(
        &'a self,
        series: &'a str,
    ) -> impl Iterator<Item = &'a EpisodeGraph> + 'a {
        self.episodes.iter().filter(move |e| e.key.series == series)
    }
}

/// Parses and aggregates every segment file, then joins ratings.
///
/// Files are parsed in parallel; duplicates keep the first file in input
/// order. Episodes without an explicit ordinal are numbered by their position
/// within the series.
pub fn load_dataset(files: &[SourceFile], ratings: &[u8]) -> Result<Dataset, IngestError> {
    if files.is_empty() {
        return Err(IngestError::EmptyDataset);
    }
    let ratings = parse_ratings_csv(ratings).map_err(|e| e.in_file("ratings"))?;
    let parsed: Vec<(ParsedEpisode, EpisodeGraph)> = files
        .par_iter()
        .map(|f| {
            let episode = parse_segment_file(&f.bytes).map_err(|e| e.in_file(&f.name))?;
            let graph = episode
                .aggregate()
                .map_err(|e| IngestError::from(e).in_file(&f.name))?;
            Ok((episode, graph))
        })
        .collect::<Result<_, IngestError>>()?;

    let mut manifest = DatasetManifest::default();
    let mut kept: BTreeMap<EpisodeKey, (ManifestEntry, EpisodeGraph)> = BTreeMap::new();
    for ((episode, graph), file) in parsed.into_iter().zip(files) {
        if kept.contains_key(&episode.key) {
            manifest.warnings.push(IngestWarning::DuplicateEpisode {
                key: episode.key,
                source: file.name.clone(),
            });
            continue;
        }
        let mut warnings = episode.warnings;
        if !ratings.contains(&episode.key) {
            warnings.push(IngestWarning::MissingRating {
                key: episode.key.clone(),
            });
        }
        let entry = ManifestEntry {
            key: episode.key.clone(),
            source: file.name.clone(),
            segment_count: graph.segment_count,
            node_count: graph.graph.node_count(),
            edge_count: graph.graph.edge_count(),
            warnings,
        };
        kept.insert(episode.key, (entry, graph));
    }
    for (key, _) in ratings.iter() {
        if !kept.contains_key(key) {
            manifest
                .warnings
                .push(IngestWarning::RatingWithoutEpisode { key: key.clone() });
        }
    }

    let mut episodes = Vec::with_capacity(kept.len());
    let mut position: BTreeMap<String, u32> = BTreeMap::new();
    for (_, (entry, mut graph)) in kept {
        let counter = position.entry(graph.key.series.clone()).or_insert(0);
        *counter += 1;
        graph.ordinal.get_or_insert(*counter);
        manifest.entries.push(entry);
        episodes.push(graph);
    }
    Ok(Dataset {
        episodes,
        ratings,
        manifest,
    })
}
