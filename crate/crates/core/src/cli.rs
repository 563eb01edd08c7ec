//! `charnet` command-line front end.
//!
//! Exit codes: 0 success, 1 success with warnings, 2 error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::graph::EpisodeGraph;
use crate::ingest::{load_dataset, read_segment_dir, Dataset, IngestError};
use crate::metrics::{
    compute_episode_metrics, EfficiencyMode, MetricColumn, MetricsConfig, MetricsOutcome,
    DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL,
};
use crate::report::{
    render_correlations_csv, render_correlations_markdown, render_manifest, render_metrics_csv,
    render_metrics_markdown, MetricTableRow,
};
use crate::stats::{correlate_all, CorrelationOptions, CorrelationReport, PermutationSpec};
use crate::svg::render_scatter;

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "charnet",
    version,
    about = "Character-network metrics and rating correlations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the dataset and write manifest.txt
    Validate(CommonArgs),
    /// Write per-series metric tables
    Metrics(CommonArgs),
    /// Write per-series Spearman correlation tables
    Correlate(CommonArgs),
    /// Write a metric-vs-review scatter plot
    Plot(PlotArgs),
    /// Run validate, metrics and correlate (and plots when svg is requested)
    All(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Md,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Directory of per-episode segment JSON files
    #[arg(long)]
    pub segments: PathBuf,
    /// Ratings CSV (series,season,episode,rating)
    #[arg(long)]
    pub ratings: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// component-mean or neighborhood
    #[arg(long, default_value = "component-mean", value_parser = parse_efficiency)]
    pub efficiency: EfficiencyMode,
    /// Power-iteration stopping tolerance (max-norm step)
    #[arg(long, default_value_t = DEFAULT_EIGEN_TOL)]
    pub eigen_tol: f64,
    #[arg(long, default_value_t = DEFAULT_EIGEN_MAX_ITER)]
    pub eigen_max_iter: usize,
    /// Also compute permutation p-values with this many shuffles
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated output formats
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv")]
    pub format: Vec<OutputFormat>,
    /// Worker threads (defaults to the number of CPUs)
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Metric identifier, e.g. density or eigen_std
    #[arg(long)]
    pub metric: String,
    #[arg(long)]
    pub series: String,
}

fn parse_efficiency(s: &str) -> Result<EfficiencyMode, String> {
    s.parse()
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let jobs = match &cli.command {
        Command::Plot(p) => p.common.jobs,
        Command::Validate(c) | Command::Metrics(c) | Command::Correlate(c) | Command::All(c) => {
            c.jobs
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(false) => EXIT_OK,
        Ok(true) => EXIT_WARNINGS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

fn execute(command: &Command) -> Outcome {
    match command {
        Command::Validate(args) => {
            let ctx = Context::load(args)?;
            ctx.write_manifest()
        }
        Command::Metrics(args) => {
            let ctx = Context::load(args)?;
            let computed = ctx.compute_metrics();
            ctx.write_metrics(&computed)?;
            Ok(ctx.dataset_warned() | computed.warned)
        }
        Command::Correlate(args) => {
            let ctx = Context::load(args)?;
            let computed = ctx.compute_metrics();
            let reports = ctx.correlate(&computed)?;
            ctx.write_correlations(&reports)?;
            Ok(ctx.dataset_warned() | computed.warned)
        }
        Command::Plot(plot) => {
            let column = MetricColumn::from_slug(&plot.metric).ok_or_else(|| {
                let known: Vec<_> = MetricColumn::ALL.iter().map(|c| c.slug()).collect();
                Failure(format!(
                    "unknown metric {:?} (expected one of {})",
                    plot.metric,
                    known.join(", ")
                ))
            })?;
            let ctx = Context::load(&plot.common)?;
            if !ctx.dataset.series().contains(&plot.series) {
                return Err(Failure(format!("unknown series {:?}", plot.series)));
            }
            let computed = ctx.compute_metrics();
            ctx.write_plot(&computed, &plot.series, column)?;
            Ok(ctx.dataset_warned() | computed.warned)
        }
        Command::All(args) => {
            let ctx = Context::load(args)?;
            let mut warned = ctx.write_manifest()?;
            let computed = ctx.compute_metrics();
            warned |= computed.warned;
            let reports = ctx.correlate(&computed)?;
            ctx.write_metrics(&computed)?;
            ctx.write_correlations(&reports)?;
            if ctx.args.format.contains(&OutputFormat::Svg) {
                for series in ctx.dataset.series() {
                    for column in MetricColumn::ALL {
                        ctx.write_plot(&computed, &series, column)?;
                    }
                }
            }
            Ok(warned)
        }
    }
}

struct Computed {
    /// `(episode, outcome)` in dataset order.
    rows: Vec<(EpisodeGraph, MetricsOutcome)>,
    warned: bool,
}

struct Context<'a> {
    args: &'a CommonArgs,
    config: MetricsConfig,
    dataset: Dataset,
}

impl<'a> Context<'a> {
    fn load(args: &'a CommonArgs) -> Result<Self, Failure> {
        if !args.segments.is_dir() {
            return Err(Failure(format!(
                "segments directory {} does not exist",
                args.segments.display()
            )));
        }
        if !args.ratings.is_file() {
            return Err(Failure(format!(
                "ratings file {} does not exist",
                args.ratings.display()
            )));
        }
        if args.eigen_tol.is_nan() || args.eigen_tol <= 0.0 || args.eigen_max_iter == 0 {
            return Err(Failure(
                "eigenvector tolerance and iteration cap must be positive".into(),
            ));
        }
        if let Some(n) = args.permutations {
            if n < crate::stats::MIN_PERMUTATIONS {
                return Err(Failure(format!(
                    "--permutations must be at least {}",
                    crate::stats::MIN_PERMUTATIONS
                )));
            }
        }
        let files = read_segment_dir(&args.segments)?;
        if files.is_empty() {
            return Err(IngestError::EmptyDataset.into());
        }
        let ratings = fs::read(&args.ratings).map_err(|source| IngestError::Io {
            path: args.ratings.clone(),
            source,
        })?;
        let dataset = load_dataset(&files, &ratings)?;
        fs::create_dir_all(&args.out)
            .map_err(|e| Failure(format!("{}: {e}", args.out.display())))?;
        Ok(Self {
            args,
            config: MetricsConfig {
                efficiency: args.efficiency,
                eigen_tol: args.eigen_tol,
                eigen_max_iter: args.eigen_max_iter,
            },
            dataset,
        })
    }

    fn dataset_warned(&self) -> bool {
        let count = self.dataset.manifest.warning_count();
        if count > 0 {
            eprintln!("warning: dataset has {count} warnings (see `charnet validate`)");
        }
        count > 0
    }

    fn echo(&self) -> Vec<(String, String)> {
        let mut echo = vec![
            ("efficiency".to_owned(), self.config.efficiency.to_string()),
            ("std".to_owned(), "population".to_owned()),
            (
                "distances".to_owned(),
                "unweighted hops over active nodes".to_owned(),
            ),
            (
                "eigenvector".to_owned(),
                format!(
                    "global power iteration, tol {:e}, max_iter {}",
                    self.config.eigen_tol, self.config.eigen_max_iter
                ),
            ),
            (
                "duplicates dropped".to_owned(),
                self.dataset.manifest.duplicates_dropped().to_string(),
            ),
        ];
        if let Some(n) = self.args.permutations {
            echo.push((
                "permutations".to_owned(),
                format!("{n}, seed {}", self.args.seed),
            ));
        }
        echo
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.args.out.join(name)
    }

    fn write(&self, path: &Path, contents: &str) -> Result<(), Failure> {
        fs::write(path, contents).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_manifest(&self) -> Outcome {
        let text = render_manifest(&self.dataset.manifest);
        print!("{text}");
        self.write(&self.out_path("manifest.txt"), &text)?;
        Ok(self.dataset.manifest.warning_count() > 0)
    }

    fn compute_metrics(&self) -> Computed {
        let rows: Vec<(EpisodeGraph, MetricsOutcome)> = self
            .dataset
            .episodes
            .par_iter()
            .map(|ep| (ep.clone(), compute_episode_metrics(ep, &self.config)))
            .collect();
        let mut warned = false;
        for (ep, outcome) in &rows {
            for w in &outcome.warnings {
                eprintln!("warning: {}: {w}", ep.key);
                warned = true;
            }
        }
        Computed { rows, warned }
    }

    fn table_rows(&self, computed: &Computed, series: &str) -> Vec<MetricTableRow> {
        computed
            .rows
            .iter()
            .filter(|(ep, _)| ep.key.series == series)
            .map(|(ep, outcome)| MetricTableRow {
                ordinal: ep.ordinal.unwrap_or(ep.key.episode),
                review: self.dataset.ratings.get(&ep.key),
                metrics: outcome.metrics.clone(),
            })
            .collect()
    }

    fn write_metrics(&self, computed: &Computed) -> Result<(), Failure> {
        let echo = self.echo();
        for series in self.dataset.series() {
            let rows = self.table_rows(computed, &series);
            if self.args.format.contains(&OutputFormat::Csv) {
                self.write(
                    &self.out_path(&format!("{series}_metrics.csv")),
                    &render_metrics_csv(&rows, &echo),
                )?;
            }
            if self.args.format.contains(&OutputFormat::Md) {
                self.write(
                    &self.out_path(&format!("{series}_metrics.md")),
                    &render_metrics_markdown(&series, &rows, &echo),
                )?;
            }
        }
        Ok(())
    }

    fn correlate(&self, computed: &Computed) -> Result<Vec<CorrelationReport>, Failure> {
        let options = CorrelationOptions {
            permutations: self.args.permutations.map(|iterations| PermutationSpec {
                iterations,
                seed: self.args.seed,
            }),
            echo: self.echo(),
        };
        self.dataset
            .series()
            .iter()
            .map(|series| {
                let rows: Vec<_> = computed
                    .rows
                    .iter()
                    .filter(|(ep, _)| &ep.key.series == series)
                    .map(|(_, o)| o.metrics.clone())
                    .collect();
                correlate_all(&rows, &self.dataset.ratings, &options).map_err(Failure::from)
            })
            .collect()
    }

    fn write_correlations(&self, reports: &[CorrelationReport]) -> Result<(), Failure> {
        for report in reports {
            let series = &report.series;
            if self.args.format.contains(&OutputFormat::Csv) {
                self.write(
                    &self.out_path(&format!("{series}_correlations.csv")),
                    &render_correlations_csv(report),
                )?;
            }
            if self.args.format.contains(&OutputFormat::Md) {
                self.write(
                    &self.out_path(&format!("{series}_correlations.md")),
                    &render_correlations_markdown(report),
                )?;
            }
        }
        Ok(())
    }

    fn write_plot(
        &self,
        computed: &Computed,
        series: &str,
        column: MetricColumn,
    ) -> Result<(), Failure> {
        let points: Vec<(f64, f64)> = self
            .table_rows(computed, series)
            .iter()
            .filter_map(|row| row.review.map(|r| (row.metrics.value(column), r)))
            .collect();
        let svg = render_scatter(&points, column.label(), "Review", series, &self.echo());
        self.write(
            &self.out_path(&format!("{series}_{}_scatter.svg", column.slug())),
            &svg,
        )
    }
}
