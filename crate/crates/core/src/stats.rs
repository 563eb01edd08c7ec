//! Spearman rank correlation of metric columns against episode ratings.
//!
//! Rho is the Pearson correlation of average ranks, which stays exact under
//! ties. Two-sided p-values use the Student t approximation with `n - 2`
//! degrees of freedom; a seeded permutation test is available as a
//! cross-check.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::EpisodeKey;
use crate::ingest::RatingsTable;
use crate::metrics::{EpisodeMetrics, MetricColumn};
use crate::special::student_t_two_sided;

pub const MIN_PERMUTATIONS: usize = 1000;
pub const MIN_CORRELATION_SAMPLES: usize = 4;
/// Largest sample for which every permutation is enumerated.
pub const MAX_EXHAUSTIVE_N: usize = 10;
const PERMUTATION_BLOCK: usize = 4096;
/// Permuted statistics within this distance of the observed one count as
/// "at least as extreme".
const TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("length mismatch: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("degenerate input: {0} is constant")]
    DegenerateInput(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("permutation test needs at least {MIN_PERMUTATIONS} iterations, got {0}")]
    TooFewIterations(usize),
    #[error("exhaustive permutation test supports n <= {MAX_EXHAUSTIVE_N}, got {0}")]
    TooLargeForExhaustive(usize),
    #[error("insufficient data for {series}: {paired} rated episodes, need at least {MIN_CORRELATION_SAMPLES}")]
    InsufficientData { series: String, paired: usize },
    #[error("rows span more than one series ({0} and {1})")]
    MixedSeries(String, String),
}

/// Values with their 1-based average ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub values: Vec<f64>,
    pub ranks: Vec<f64>,
}

/// Ascending 1-based ranks; tied values share the mean of their positions.
pub fn rank_with_ties(values: &[f64]) -> Result<RankVector, StatsError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    Ok(RankVector {
        values: values.to_vec(),
        ranks,
    })
}

/// Mean-centred ranks and their root sum of squares.
fn centred_ranks(values: &[f64], name: &'static str) -> Result<(Vec<f64>, f64), StatsError> {
    let ranks = rank_with_ties(values)?.ranks;
    let mean = (ranks.len() + 1) as f64 / 2.0;
    let centred: Vec<f64> = ranks.iter().map(|r| r - mean).collect();
    let sum_sq = centred.iter().map(|c| c * c).sum::<f64>();
    if sum_sq == 0.0 {
        return Err(StatsError::DegenerateInput(name));
    }
    Ok((centred, sum_sq))
}

struct RankPair {
    x: Vec<f64>,
    y: Vec<f64>,
    scale: f64,
}

impl RankPair {
    fn new(x: &[f64], y: &[f64]) -> Result<Self, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        if x.len() < 3 {
            return Err(StatsError::TooFewSamples { n: x.len(), min: 3 });
        }
        let (cx, sx) = centred_ranks(x, "x")?;
        let (cy, sy) = centred_ranks(y, "y")?;
        Ok(Self {
            x: cx,
            y: cy,
            scale: (sx * sy).sqrt(),
        })
    }

    fn rho_with(&self, y: &[f64]) -> f64 {
        let dot: f64 = self.x.iter().zip(y).map(|(a, b)| a * b).sum();
        (dot / self.scale).clamp(-1.0, 1.0)
    }

    fn rho(&self) -> f64 {
        self.rho_with(&self.y)
    }

    fn len(&self) -> usize {
        self.x.len()
    }
}

/// Spearman rank correlation, computed as Pearson correlation of average
/// ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    Ok(RankPair::new(x, y)?.rho())
}

/// Two-sided p-value of `rho` on `n` pairs via `t = rho sqrt((n-2)/(1-rho^2))`.
pub fn spearman_pvalue(rho: f64, n: usize) -> Result<f64, StatsError> {
    if rho.is_nan() || rho.abs() > 1.0 {
        return Err(StatsError::Domain(format!("|rho| must be <= 1, got {rho}")));
    }
    if n < 4 {
        return Err(StatsError::Domain(format!("n must be >= 4, got {n}")));
    }
    if rho.abs() == 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    Ok(student_t_two_sided(t, df).clamp(0.0, 1.0))
}

/// Monte-Carlo permutation p-value: the share of random reorderings of `y`
/// whose `|rho|` is at least the observed one, with +1 smoothing.
///
/// Iterations are split into fixed-size blocks, each driven by its own
/// ChaCha stream of `seed`, so the result does not depend on thread count.
pub fn permutation_pvalue(
    x: &[f64],
    y: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    let pair = RankPair::new(x, y)?;
    if iterations < MIN_PERMUTATIONS {
        return Err(StatsError::TooFewIterations(iterations));
    }
    let observed = pair.rho().abs();
    let blocks = iterations.div_ceil(PERMUTATION_BLOCK);
    let hits: usize = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let count = PERMUTATION_BLOCK.min(iterations - block * PERMUTATION_BLOCK);
            let mut shuffled = pair.y.clone();
            (0..count)
                .filter(|_| {
                    shuffled.shuffle(&mut rng);
                    pair.rho_with(&shuffled).abs() >= observed - TIE_SLACK
                })
                .count()
        })
        .sum();
    Ok((hits + 1) as f64 / (iterations + 1) as f64)
}

/// Exact permutation p-value by enumerating all `n!` orderings of `y`.
pub fn exhaustive_permutation_pvalue(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let pair = RankPair::new(x, y)?;
    let n = pair.len();
    if n > MAX_EXHAUSTIVE_N {
        return Err(StatsError::TooLargeForExhaustive(n));
    }
    let observed = pair.rho().abs();
    let mut perm = pair.y.clone();
    let mut hits = 0usize;
    let mut total = 0usize;
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut visit = |p: &[f64]| {
        total += 1;
        if pair.rho_with(p).abs() >= observed - TIE_SLACK {
            hits += 1;
        }
    };
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Significance {
    #[default]
    None,
    /// p < 0.05
    One,
    /// p < 0.01
    Two,
}

impl Significance {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            Significance::Two
        } else if p < 0.05 {
            Significance::One
        } else {
            Significance::None
        }
    }

    pub fn stars(self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::One => "*",
            Significance::Two => "**",
        }
    }
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.stars())
    }
}

/// Anything that can supply metric values for an episode.
pub trait MetricSource {
    fn key(&self) -> &EpisodeKey;
    /// `None` when the value is not available for this episode.
    fn metric(&self, column: MetricColumn) -> Option<f64>;
}

impl MetricSource for EpisodeMetrics {
    fn key(&self) -> &EpisodeKey {
        &self.key
    }

    fn metric(&self, column: MetricColumn) -> Option<f64> {
        Some(self.value(column))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub column: MetricColumn,
    pub metric_name: String,
    /// `None` when the column could not be correlated; see `note`.
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub permutation_p: Option<f64>,
    pub n: usize,
    pub significance: Significance,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationSpec {
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrelationOptions {
    pub permutations: Option<PermutationSpec>,
    /// Configuration echoed verbatim into the report.
    pub echo: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub series: String,
    /// Number of episodes with both metrics and a rating.
    pub n: usize,
    /// Episodes dropped for lacking a rating.
    pub excluded: Vec<EpisodeKey>,
    /// One row per metric column, in [`MetricColumn::ALL`] order.
    pub results: Vec<CorrelationResult>,
    pub echo: Vec<(String, String)>,
}

/// Correlates every metric column of one series with its ratings.
pub fn correlate_all<M: MetricSource>(
    rows: &[M],
    ratings: &RatingsTable,
    options: &CorrelationOptions,
) -> Result<CorrelationReport, StatsError> {
    let series = match rows.first() {
        Some(r) => r.key().series.clone(),
        None => {
            return Err(StatsError::InsufficientData {
                series: String::new(),
                paired: 0,
            })
        }
    };
    if let Some(other) = rows.iter().find(|r| r.key().series != series) {
        return Err(StatsError::MixedSeries(series, other.key().series.clone()));
    }

    let mut paired = Vec::new();
    let mut excluded = Vec::new();
    for row in rows {
        match ratings.get(row.key()) {
            Some(rating) => paired.push((row, rating)),
            None => excluded.push(row.key().clone()),
        }
    }
    if paired.len() < MIN_CORRELATION_SAMPLES {
        return Err(StatsError::InsufficientData {
            series,
            paired: paired.len(),
        });
    }
    let reviews: Vec<f64> = paired.iter().map(|(_, r)| *r).collect();
    let n = paired.len();

    let results = MetricColumn::ALL
        .iter()
        .enumerate()
        .map(|(i, &column)| {
            let mut result = CorrelationResult {
                column,
                metric_name: column.label().to_owned(),
                rho: None,
                p_value: None,
                permutation_p: None,
                n,
                significance: Significance::None,
                note: None,
            };
            let values: Option<Vec<f64>> =
                paired.iter().map(|(row, _)| row.metric(column)).collect();
            let Some(values) = values else {
                result.note = Some("missing values".into());
                return result;
            };
            match spearman_rho(&values, &reviews) {
                Ok(rho) => {
                    let p = spearman_pvalue(rho, n).expect("rho in range and n >= 4");
                    result.rho = Some(rho);
                    result.p_value = Some(p);
                    result.significance = Significance::from_p(p);
                    if let Some(spec) = options.permutations {
                        result.permutation_p = permutation_pvalue(
                            &values,
                            &reviews,
                            spec.iterations,
                            spec.seed.wrapping_add(i as u64),
                        )
                        .ok();
                    }
                }
                Err(StatsError::DegenerateInput("x")) => {
                    result.note = Some("constant metric column".into());
                }
                Err(StatsError::DegenerateInput(_)) => {
                    result.note = Some("constant ratings".into());
                }
                Err(e) => result.note = Some(e.to_string()),
            }
            result
        })
        .collect();

    Ok(CorrelationReport {
        series,
        n,
        excluded,
        results,
        echo: options.echo.clone(),
    })
}
