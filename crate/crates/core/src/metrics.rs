//! Windowed paper/citation counts, impact factor (IF) and revised impact
//! factor (RIF) series, and simple detectors over those series.
//!
//! A citation is dated by its citing paper's year. For year `y` and window
//! length `k`, the window holds the journal's papers published in
//! `[y - k, y - 1]`. In [`CiteYearMode::Current`] only citations made in
//! year `y` count; in [`CiteYearMode::Window`] citations made during the
//! window years themselves count instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, JournalIx};
use crate::error::{Error, Result};
use crate::ids::{JournalId, WindowLen, YearRange};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiteYearMode {
    #[default]
    Current,
    Window,
}

impl FromStr for CiteYearMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "current" => Ok(CiteYearMode::Current),
            "window" => Ok(CiteYearMode::Window),
            other => Err(Error::config(format!(
                "cite-year mode must be current|window, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for CiteYearMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CiteYearMode::Current => "current",
            CiteYearMode::Window => "window",
        })
    }
}

/// Window length plus citation dating mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImpactWindow {
    pub len: WindowLen,
    pub mode: CiteYearMode,
}

impl ImpactWindow {
    pub fn new(len: WindowLen, mode: CiteYearMode) -> Self {
        ImpactWindow { len, mode }
    }

    fn counts_citing_year(&self, year: i32, citing_year: i32) -> bool {
        match self.mode {
            CiteYearMode::Current => citing_year == year,
            CiteYearMode::Window => {
                let (lo, hi) = self.len.span(year);
                lo <= citing_year && citing_year <= hi
            }
        }
    }
}

impl From<WindowLen> for ImpactWindow {
    fn from(len: WindowLen) -> Self {
        ImpactWindow {
            len,
            mode: CiteYearMode::Current,
        }
    }
}

/// Citation sources removed from the RIF numerator.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationFilter {
    pub exclude_self: bool,
    pub exclude_sources: BTreeSet<JournalId>,
}

impl CitationFilter {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn self_citations() -> Self {
        CitationFilter {
            exclude_self: true,
            exclude_sources: BTreeSet::new(),
        }
    }

    pub fn sources<I: IntoIterator<Item = JournalId>>(sources: I) -> Self {
        CitationFilter {
            exclude_self: false,
            exclude_sources: sources.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.exclude_self && self.exclude_sources.is_empty()
    }

    fn resolve(&self, corpus: &Corpus) -> ResolvedFilter {
        ResolvedFilter {
            exclude_self: self.exclude_self,
            sources: self
                .exclude_sources
                .iter()
                .filter_map(|j| corpus.journal_ix(j).ok())
                .collect(),
        }
    }
}

struct ResolvedFilter {
    exclude_self: bool,
    sources: BTreeSet<JournalIx>,
}

impl ResolvedFilter {
    fn removes(&self, subject: JournalIx, citing: JournalIx) -> bool {
        (self.exclude_self && citing == subject) || self.sources.contains(&citing)
    }
}

/// Year-indexed values; years whose denominator was zero are kept apart.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub points: BTreeMap<i32, f64>,
    pub undefined_years: BTreeSet<i32>,
}

impl TimeSeries {
    pub fn push(&mut self, year: i32, value: Option<f64>) {
        match value {
            Some(v) => {
                self.undefined_years.remove(&year);
                self.points.insert(year, v);
            }
            None => {
                self.points.remove(&year);
                self.undefined_years.insert(year);
            }
        }
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.points.get(&year).copied()
    }

    /// All years, defined or not, in order.
    pub fn years(&self) -> BTreeSet<i32> {
        self.points
            .keys()
            .chain(self.undefined_years.iter())
            .copied()
            .collect()
    }
}

pub fn window_paper_count(
    corpus: &Corpus,
    j: &JournalId,
    year: i32,
    len: WindowLen,
) -> Result<u64> {
    let jix = corpus.journal_ix(j)?;
    Ok(corpus.window_papers(jix, year, len).count() as u64)
}

fn citation_count_ix(
    corpus: &Corpus,
    jix: JournalIx,
    year: i32,
    window: ImpactWindow,
    filter: &ResolvedFilter,
) -> u64 {
    let mut n = 0;
    for cited in corpus.window_papers(jix, year, window.len) {
        for &citer in corpus.cited_by(cited) {
            let p = corpus.paper(citer);
            if window.counts_citing_year(year, p.year) && !filter.removes(jix, p.journal) {
                n += 1;
            }
        }
    }
    n
}

/// References dated in the counting year(s) whose cited paper falls in the
/// journal's window, after removing filtered sources.
pub fn window_citation_count(
    corpus: &Corpus,
    j: &JournalId,
    year: i32,
    window: ImpactWindow,
    filter: &CitationFilter,
) -> Result<u64> {
    let jix = corpus.journal_ix(j)?;
    Ok(citation_count_ix(
        corpus,
        jix,
        year,
        window,
        &filter.resolve(corpus),
    ))
}

/// IF for one year; `None` when the window holds no papers.
pub fn impact_factor(
    corpus: &Corpus,
    j: &JournalId,
    year: i32,
    window: ImpactWindow,
) -> Result<Option<f64>> {
    revised_impact_factor(corpus, j, year, window, &CitationFilter::none())
}

/// RIF for one year: the IF denominator over a filtered numerator.
pub fn revised_impact_factor(
    corpus: &Corpus,
    j: &JournalId,
    year: i32,
    window: ImpactWindow,
    filter: &CitationFilter,
) -> Result<Option<f64>> {
    let papers = window_paper_count(corpus, j, year, window.len)?;
    if papers == 0 {
        return Ok(None);
    }
    let cites = window_citation_count(corpus, j, year, window, filter)?;
    Ok(Some(cites as f64 / papers as f64))
}

/// IF (empty filter) or RIF series over `years`.
pub fn if_series(
    corpus: &Corpus,
    j: &JournalId,
    years: YearRange,
    window: ImpactWindow,
    filter: &CitationFilter,
) -> Result<TimeSeries> {
    let jix = corpus.journal_ix(j)?;
    let resolved = filter.resolve(corpus);
    let mut out = TimeSeries::default();
    for y in years.years() {
        let papers = corpus.window_papers(jix, y, window.len).count();
        let value = (papers > 0)
            .then(|| citation_count_ix(corpus, jix, y, window, &resolved) as f64 / papers as f64);
        out.push(y, value);
    }
    Ok(out)
}

/// Years whose value jumps to at least `ratio` times the previous year's
/// value and at least `min_abs`. Both years must be defined.
pub fn detect_sudden_peaks(series: &TimeSeries, ratio: f64, min_abs: f64) -> Result<Vec<i32>> {
    if !(ratio > 1.0) {
        return Err(Error::config(format!(
            "peak ratio must be > 1, got {ratio}"
        )));
    }
    if !(min_abs >= 0.0) {
        return Err(Error::config(format!(
            "peak floor must be >= 0, got {min_abs}"
        )));
    }
    Ok(series
        .points
        .iter()
        .filter(|&(&y, &v)| {
            series
                .get(y - 1)
                .is_some_and(|prev| v >= ratio * prev && v >= min_abs)
        })
        .map(|(&y, _)| y)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RifGap {
    pub year: i32,
    /// `(IF - RIF) / IF`, in `[0, 1]`.
    pub gap: f64,
}

/// Year with the largest relative IF-to-RIF drop, over years where IF > 0
/// and both series are defined. Ties go to the earliest year.
pub fn rif_gap_score(if_s: &TimeSeries, rif_s: &TimeSeries) -> Option<RifGap> {
    let mut best: Option<RifGap> = None;
    for (&year, &iff) in &if_s.points {
        let Some(rif) = rif_s.get(year) else { continue };
        if iff <= 0.0 {
            continue;
        }
        let gap = ((iff - rif) / iff).clamp(0.0, 1.0);
        if best.is_none_or(|b| gap > b.gap) {
            best = Some(RifGap { year, gap });
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    If,
    Rif,
    PaperCount,
    CitationCount,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::If => "if",
            Metric::Rif => "rif",
            Metric::PaperCount => "paper_count",
            Metric::CitationCount => "citation_count",
        }
    }
}

/// Everything needed to plot one journal: window paper counts as bars,
/// IF and RIF as lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JournalSeries {
    pub journal_id: JournalId,
    pub filter: CitationFilter,
    pub paper_count: TimeSeries,
    pub citation_count: TimeSeries,
    pub impact_factor: TimeSeries,
    pub revised_impact_factor: TimeSeries,
}

pub fn journal_series(
    corpus: &Corpus,
    j: &JournalId,
    years: YearRange,
    window: ImpactWindow,
    filter: &CitationFilter,
) -> Result<JournalSeries> {
    let jix = corpus.journal_ix(j)?;
    let none = CitationFilter::none().resolve(corpus);
    let mut paper_count = TimeSeries::default();
    let mut citation_count = TimeSeries::default();
    for y in years.years() {
        paper_count.push(
            y,
            Some(corpus.window_papers(jix, y, window.len).count() as f64),
        );
        citation_count.push(
            y,
            Some(citation_count_ix(corpus, jix, y, window, &none) as f64),
        );
    }
    Ok(JournalSeries {
        journal_id: j.clone(),
        filter: filter.clone(),
        paper_count,
        citation_count,
        impact_factor: if_series(corpus, j, years, window, &CitationFilter::none())?,
        revised_impact_factor: if_series(corpus, j, years, window, filter)?,
    })
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Long-format export: `journal_id,year,metric,value,defined`.
pub fn write_series_csv<'a, W, I>(out: W, series: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a JournalSeries>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["journal_id", "year", "metric", "value", "defined"])?;
    for s in series {
        let metrics = [
            (Metric::If, &s.impact_factor),
            (Metric::Rif, &s.revised_impact_factor),
            (Metric::PaperCount, &s.paper_count),
            (Metric::CitationCount, &s.citation_count),
        ];
        for (metric, ts) in metrics {
            for y in ts.years() {
                let v = ts.get(y);
                w.write_record([
                    s.journal_id.as_str(),
                    &y.to_string(),
                    metric.as_str(),
                    &fmt_value(v),
                    if v.is_some() { "true" } else { "false" },
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Wide export for a single journal: one row per year with paper count,
/// citation count, IF and RIF side by side.
pub fn write_series_table<W: Write>(out: W, s: &JournalSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "journal_id",
        "year",
        "paper_count",
        "citation_count",
        "if",
        "rif",
    ])?;
    for y in s.impact_factor.years() {
        w.write_record([
            s.journal_id.as_str(),
            &y.to_string(),
            &fmt_value(s.paper_count.get(y)),
            &fmt_value(s.citation_count.get(y)),
            &fmt_value(s.impact_factor.get(y)),
            &fmt_value(s.revised_impact_factor.get(y)),
        ])?;
    }
    w.flush()?;
    Ok(())
}
