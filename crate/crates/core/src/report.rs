//! The full analysis pipeline and its on-disk report bundle.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::attribution::{
    attribute_instance, paper_count_surge, publisher_self_citation_stats, same_publisher_share,
    AttributionParams, InstanceAttribution, PublisherStats, SamePublisherShare,
};
use crate::config::RunConfig;
use crate::corpus::{corpus_stats, Corpus, CorpusStats};
use crate::error::{Error, Result};
use crate::graph::{build_journal_graph, prune, JournalGraph, Pruned};
use crate::ids::{JournalId, YearRange};
use crate::metrics::{
    detect_sudden_peaks, journal_series, rif_gap_score, write_series_csv, CitationFilter,
    JournalSeries, RifGap,
};
use crate::patterns::{extract_patterns, Census, PatternInstance, PatternKind, PatternSet};

/// Temporal signals for one journal that appears in some pattern instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JournalSignals {
    pub journal_id: JournalId,
    /// Citations removed when computing the revised impact factor.
    pub filter: CitationFilter,
    pub if_peaks: Vec<i32>,
    pub rif_gap: Option<RifGap>,
    pub surge_years: Vec<i32>,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub config: RunConfig,
    pub years: YearRange,
    pub stats: CorpusStats,
    pub graph: JournalGraph,
    pub pruned: Pruned,
    pub patterns: PatternSet,
    pub attribution: Vec<InstanceAttribution>,
    pub signals: Vec<JournalSignals>,
    pub series: Vec<JournalSeries>,
    pub publishers: Vec<PublisherStats>,
    pub same_publisher: Vec<SamePublisherShare>,
}

impl Analysis {
    pub fn census(&self) -> Census {
        self.patterns.census()
    }

    pub fn instances(&self) -> Vec<PatternInstance> {
        self.patterns.instances()
    }
}

/// Partners of every flagged journal: other members of its multi-journal
/// instances, plus itself when it has an excessive self-loop.
fn flagged_filters(instances: &[PatternInstance]) -> BTreeMap<JournalId, CitationFilter> {
    let mut out: BTreeMap<JournalId, CitationFilter> = BTreeMap::new();
    for inst in instances {
        for m in &inst.members {
            let f = out.entry(m.clone()).or_default();
            if inst.kind == PatternKind::SelfLoop {
                f.exclude_self = true;
            }
            f.exclude_sources
                .extend(inst.members.iter().filter(|o| *o != m).cloned());
        }
    }
    out
}

pub fn analyze(corpus: &Corpus, config: &RunConfig) -> Result<Analysis> {
    config.validate()?;
    let cp = corpus.period();
    let years = YearRange::new(
        config.period.start.max(cp.start),
        config.period.end.min(cp.end),
    )
    .map_err(|_| {
        Error::config(format!(
            "period {} does not overlap the corpus period {cp}",
            config.period
        ))
    })?;
    let t = &config.thresholds;

    let graph = build_journal_graph(corpus);
    let pruned = prune(&graph, t.in_threshold, t.out_threshold)?;
    let patterns = extract_patterns(&pruned.resultant, &graph, &config.pattern_config())?;
    let instances = patterns.instances();

    let params = AttributionParams {
        window: config.window,
        surge_factor: t.surge_factor,
        top_authors: config.top_authors,
    };
    let attribution = instances
        .iter()
        .map(|inst| attribute_instance(corpus, &graph, inst, params))
        .collect::<Result<Vec<_>>>()?;

    let window = config.impact_window();
    let mut signals = Vec::new();
    let mut series = Vec::new();
    for (j, filter) in flagged_filters(&instances) {
        let s = journal_series(corpus, &j, years, window, &filter)?;
        signals.push(JournalSignals {
            journal_id: j.clone(),
            filter,
            if_peaks: detect_sudden_peaks(&s.impact_factor, t.peak_ratio, t.peak_min_abs)?,
            rif_gap: rif_gap_score(&s.impact_factor, &s.revised_impact_factor),
            surge_years: paper_count_surge(corpus, &j, years, t.surge_factor)?,
        });
        series.push(s);
    }

    Ok(Analysis {
        config: config.clone(),
        years,
        stats: corpus_stats(corpus),
        publishers: publisher_self_citation_stats(corpus, &pruned.resultant),
        same_publisher: same_publisher_share(&instances, corpus),
        graph,
        pruned,
        patterns,
        attribution,
        signals,
        series,
    })
}

#[derive(Serialize)]
struct WithConfig<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct CensusBody<'a> {
    counts: &'a BTreeMap<PatternKind, usize>,
    self_loop_edges: usize,
    multi_journal_total: usize,
}

#[derive(Serialize)]
struct AttributionBody<'a> {
    instances: &'a [InstanceAttribution],
    journals: &'a [JournalSignals],
    publishers: &'a [PublisherStats],
    same_publisher: &'a [SamePublisherShare],
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

impl Analysis {
    /// Writes the report bundle into `dir` and returns the written paths in
    /// a fixed order. Output bytes depend only on the corpus and config.
    pub fn write_bundle(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let cfg = &self.config;
        let mut written = Vec::new();
        let mut path = |name: &str| {
            let p = dir.join(name);
            written.push(p.clone());
            p
        };

        write_json(&path("config.json"), cfg)?;
        write_json(
            &path("stats.json"),
            &WithConfig {
                config: cfg,
                body: &self.stats,
            },
        )?;
        write_json(
            &path("prune_report.json"),
            &WithConfig {
                config: cfg,
                body: &self.pruned.report,
            },
        )?;
        let census = self.census();
        write_json(
            &path("census.json"),
            &WithConfig {
                config: cfg,
                body: CensusBody {
                    counts: &census.counts,
                    self_loop_edges: census.self_loop_edges,
                    multi_journal_total: census.multi_journal_total(),
                },
            },
        )?;

        let mut w = BufWriter::new(File::create(path("patterns.jsonl"))?);
        for inst in self.instances() {
            serde_json::to_writer(&mut w, &inst)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;

        write_json(
            &path("attribution.json"),
            &WithConfig {
                config: cfg,
                body: AttributionBody {
                    instances: &self.attribution,
                    journals: &self.signals,
                    publishers: &self.publishers,
                    same_publisher: &self.same_publisher,
                },
            },
        )?;

        write_series_csv(
            BufWriter::new(File::create(path("series.csv"))?),
            &self.series,
        )?;
        self.pruned
            .resultant
            .write_edges_csv(BufWriter::new(File::create(path("resultant_edges.csv"))?))?;
        self.pruned
            .resultant
            .write_edge_years_csv(BufWriter::new(File::create(path(
                "resultant_edge_years.csv",
            ))?))?;
        Ok(written)
    }
}

/// Journals flagged by any instance.
pub fn flagged_journals(instances: &[PatternInstance]) -> BTreeSet<JournalId> {
    instances
        .iter()
        .flat_map(|i| i.members.iter().cloned())
        .collect()
}
