use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use citenet::config::{OutputFormat, RunConfig, Thresholds};
use citenet::corpus::{corpus_stats, load_snapshot, read_corpus_file, save_snapshot, CorpusStats};
use citenet::metrics::{journal_series, write_series_table, CitationFilter, CiteYearMode};
use citenet::report::analyze;
use citenet::synth::{generate, PlantManifest};
use citenet::{Error, JournalId, Result, WindowLen, YearRange};

/// Journal citation graph analysis: pruning, pattern census, impact-factor
/// series and author attribution.
#[derive(Parser, Debug)]
#[command(name = "citenet", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Directory holding the ingested snapshot and default report location.
    #[arg(long, global = true, default_value = ".citenet")]
    workdir: PathBuf,
    /// Analysis period, inclusive.
    #[arg(long, global = true, value_name = "Y1:Y2")]
    period: Option<YearRange>,
    /// Impact-factor window length in years (2 or 5).
    #[arg(long, global = true)]
    window: Option<WindowLen>,
    #[arg(long, global = true, value_name = "N")]
    in_threshold: Option<i64>,
    #[arg(long, global = true, value_name = "N")]
    out_threshold: Option<i64>,
    #[arg(long, global = true, value_name = "R")]
    self_loop_ratio: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    bucket_high: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    bucket_med: Option<f64>,
    #[arg(long, global = true, value_name = "R")]
    peak_ratio: Option<f64>,
    /// Smallest impact factor that can count as a peak.
    #[arg(long, global = true, value_name = "X")]
    peak_floor: Option<f64>,
    #[arg(long, global = true, value_name = "R")]
    surge_factor: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    cartel_min_donors: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    cartel_back_max: Option<u64>,
    /// Which citing years count toward the impact factor (current|window).
    #[arg(long, global = true)]
    cite_year_mode: Option<CiteYearMode>,
    /// Authors listed per directed pair in the attribution report.
    #[arg(long, global = true, value_name = "N")]
    top_authors: Option<usize>,
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    /// Generator seed; overrides the manifest's seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a JSON-lines corpus and store it as a snapshot.
    Ingest { path: PathBuf },
    /// Print corpus statistics for the stored snapshot.
    Stats,
    /// Run the full pipeline and write the report bundle.
    Analyze {
        /// Output directory (default: <workdir>/report).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print IF and RIF side by side with window counts for one journal.
    Series {
        #[arg(long)]
        journal: JournalId,
        /// Drop the journal's self-citations from the revised factor.
        #[arg(long)]
        exclude_self: bool,
        /// Comma-separated journals whose citations the revised factor ignores.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<JournalId>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic corpus from a plant manifest.
    Synth {
        manifest: PathBuf,
        /// Corpus output path; the resolved manifest is written next to it.
        #[arg(long)]
        output: PathBuf,
    },
}

impl GlobalArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let t = Thresholds::default();
        let config = RunConfig {
            period: self.period.unwrap_or(d.period),
            window: self.window.unwrap_or(d.window),
            cite_year_mode: self.cite_year_mode.unwrap_or(d.cite_year_mode),
            thresholds: Thresholds {
                in_threshold: self.in_threshold.unwrap_or(t.in_threshold),
                out_threshold: self.out_threshold.unwrap_or(t.out_threshold),
                self_loop_ratio: self.self_loop_ratio.unwrap_or(t.self_loop_ratio),
                bucket_high: self.bucket_high.unwrap_or(t.bucket_high),
                bucket_med: self.bucket_med.unwrap_or(t.bucket_med),
                peak_ratio: self.peak_ratio.unwrap_or(t.peak_ratio),
                peak_min_abs: self.peak_floor.unwrap_or(t.peak_min_abs),
                surge_factor: self.surge_factor.unwrap_or(t.surge_factor),
                cartel_min_donors: self.cartel_min_donors.unwrap_or(t.cartel_min_donors),
                cartel_back_max: self.cartel_back_max.unwrap_or(t.cartel_back_max),
                ..t
            },
            top_authors: self.top_authors.unwrap_or(d.top_authors),
            format: self.format.unwrap_or(d.format),
        };
        config.validate()?;
        Ok(config)
    }

    fn snapshot_dir(&self) -> PathBuf {
        self.workdir.join("snapshot")
    }
}

fn print_stats(stats: &CorpusStats, config: &RunConfig) -> Result<()> {
    let mut out = io::stdout().lock();
    match config.format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &json!({ "config": config, "stats": stats }))?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "year,papers,citations")?;
            for y in &stats.per_year {
                writeln!(out, "{},{},{}", y.year, y.papers, y.citations)?;
            }
        }
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let config = g.run_config()?;
    match cli.command {
        Command::Ingest { path } => {
            let corpus = read_corpus_file(&path, config.period)?;
            save_snapshot(&corpus, &g.snapshot_dir())?;
            print_stats(&corpus_stats(&corpus), &config)?;
        }
        Command::Stats => {
            let corpus = load_snapshot(&g.snapshot_dir())?;
            print_stats(&corpus_stats(&corpus), &config)?;
        }
        Command::Analyze { out } => {
            let corpus = load_snapshot(&g.snapshot_dir())?;
            let dir = out.unwrap_or_else(|| g.workdir.join("report"));
            let analysis = analyze(&corpus, &config)?;
            let files = analysis.write_bundle(&dir)?;
            let census = analysis.census();
            let mut stdout = io::stdout().lock();
            for (kind, n) in &census.counts {
                writeln!(stdout, "{}\t{n}", kind.as_str())?;
            }
            for f in files {
                writeln!(stdout, "wrote {}", f.display())?;
            }
        }
        Command::Series {
            journal,
            exclude_self,
            exclude,
            output: path,
        } => {
            let corpus = load_snapshot(&g.snapshot_dir())?;
            let filter = CitationFilter {
                exclude_self,
                exclude_sources: exclude.into_iter().collect(),
            };
            let cp = corpus.period();
            let years = YearRange::new(
                config.period.start.max(cp.start),
                config.period.end.min(cp.end),
            )
            .map_err(|_| {
                Error::InvalidConfig(format!("period {} is outside the snapshot", config.period))
            })?;
            let s = journal_series(&corpus, &journal, years, config.impact_window(), &filter)?;
            let mut w = output(path.as_deref())?;
            write_series_table(&mut w, &s)?;
            w.flush()?;
        }
        Command::Synth {
            manifest,
            output: path,
        } => {
            let mut m: PlantManifest = serde_json::from_slice(&fs::read(&manifest)?)?;
            if let Some(seed) = g.seed {
                m.background.seed = seed;
            }
            let records = generate(&m)?;
            let mut w = BufWriter::new(File::create(&path)?);
            for r in &records {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            let echo = path.with_extension("manifest.json");
            fs::write(&echo, serde_json::to_vec_pretty(&m)?)?;
            println!("wrote {} papers to {}", records.len(), path.display());
            println!("wrote {}", echo.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
