//! Bibliographic corpus: parsing, validation and year/journal/author indexes.
//!
//! The canonical input is UTF-8 JSON lines, one paper per line:
//!
//! ```text
//! {"paper_id":"p1","year":2004,"journal_id":"TIT","journal_name":"Trans. Inf. Theory",
//!  "author_ids":["a1","a2"],"references":["p0"],"publisher":"IEEE"}
//! ```
//!
//! Papers outside the analysis period are dropped. References that do not
//! resolve to a retained paper are dropped and counted as dangling.
//! Duplicate and self references are dropped and counted separately.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AuthorId, JournalId, PaperId, Publisher, WindowLen, YearRange};

/// Dense index of a retained paper inside a [`Corpus`].
pub type PaperIx = u32;
/// Dense index of a journal inside a [`Corpus`].
pub type JournalIx = u32;
/// Dense index of an author inside a [`Corpus`].
pub type AuthorIx = u32;

/// One line of the canonical corpus format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub paper_id: PaperId,
    pub year: i32,
    pub journal_id: JournalId,
    pub journal_name: String,
    pub author_ids: Vec<AuthorId>,
    pub references: Vec<PaperId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publisher: Option<Publisher>,
}

/// Lenient line shape used to report missing fields by name.
#[derive(Deserialize)]
struct RawLine {
    paper_id: Option<String>,
    year: Option<i64>,
    journal_id: Option<String>,
    journal_name: Option<String>,
    author_ids: Option<Vec<String>>,
    references: Option<Vec<String>>,
    publisher: Option<String>,
}

impl RawLine {
    fn into_record(self, line: usize) -> Result<CorpusRecord> {
        let missing = |field| Error::MissingField { line, field };
        let year = self.year.ok_or_else(|| missing("year"))?;
        let year = i32::try_from(year).map_err(|_| Error::MalformedRecord {
            line,
            message: format!("year {year} out of range"),
        })?;
        let publisher = match self.publisher {
            None => None,
            Some(p) => Some(
                p.parse::<Publisher>()
                    .map_err(|message| Error::MalformedRecord { line, message })?,
            ),
        };
        Ok(CorpusRecord {
            paper_id: PaperId(self.paper_id.ok_or_else(|| missing("paper_id"))?),
            year,
            journal_id: JournalId(self.journal_id.ok_or_else(|| missing("journal_id"))?),
            journal_name: self.journal_name.ok_or_else(|| missing("journal_name"))?,
            author_ids: self
                .author_ids
                .ok_or_else(|| missing("author_ids"))?
                .into_iter()
                .map(AuthorId)
                .collect(),
            references: self
                .references
                .ok_or_else(|| missing("references"))?
                .into_iter()
                .map(PaperId)
                .collect(),
            publisher,
        })
    }
}

/// Iterator over the records of a JSON-lines stream. Blank lines are skipped.
pub struct JsonLines<R> {
    reader: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> JsonLines<R> {
    pub fn new(reader: R) -> Self {
        JsonLines {
            reader,
            line: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for JsonLines<R> {
    type Item = Result<(usize, CorpusRecord)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    let line = self.line;
                    return Some(Err(Error::MalformedRecord {
                        line,
                        message: e.to_string(),
                    }));
                }
            }
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            let line = self.line;
            let parsed = serde_json::from_str::<RawLine>(text)
                .map_err(|e| Error::MalformedRecord {
                    line,
                    message: e.to_string(),
                })
                .and_then(|raw| raw.into_record(line));
            return Some(parsed.map(|r| (line, r)));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub journal_id: JournalId,
    pub name: String,
    pub publisher: Publisher,
    pub first_pub_year: i32,
}

/// A retained paper with its references resolved to corpus indexes.
#[derive(Clone, Debug, PartialEq)]
pub struct Paper {
    pub id: PaperId,
    pub year: i32,
    pub journal: JournalIx,
    pub authors: Vec<AuthorIx>,
    pub references: Vec<PaperIx>,
}

/// Immutable, indexed corpus. Safe to share across threads for reads.
#[derive(Clone, Debug)]
pub struct Corpus {
    period: YearRange,
    papers: Vec<Paper>,
    paper_index: HashMap<PaperId, PaperIx>,
    journals: Vec<JournalRecord>,
    journal_index: HashMap<JournalId, JournalIx>,
    authors: Vec<AuthorId>,
    by_journal_year: Vec<BTreeMap<i32, Vec<PaperIx>>>,
    cited_by: Vec<Vec<PaperIx>>,
    dangling_ref_count: u64,
    invalid_ref_count: u64,
}

/// Parses a canonical JSON-lines corpus, keeping papers published in `period`.
pub fn parse_corpus<R: BufRead>(input: R, period: YearRange) -> Result<Corpus> {
    Corpus::from_records(JsonLines::new(input), period)
}

pub fn read_corpus_file(path: &Path, period: YearRange) -> Result<Corpus> {
    let file = File::open(path)?;
    parse_corpus(BufReader::new(file), period)
}

impl Corpus {
    /// Builds a corpus from any record source. Each item carries the
    /// 1-based position (line number) used in error messages; this is the
    /// hook for readers of formats other than JSON lines.
    pub fn from_records<I>(records: I, period: YearRange) -> Result<Corpus>
    where
        I: IntoIterator<Item = Result<(usize, CorpusRecord)>>,
    {
        let mut seen: HashSet<PaperId> = HashSet::new();
        let mut kept: Vec<CorpusRecord> = Vec::new();
        for item in records {
            let (line, record) = item?;
            if !seen.insert(record.paper_id.clone()) {
                return Err(Error::DuplicatePaper {
                    line,
                    paper_id: record.paper_id.0,
                });
            }
            if period.contains(record.year) {
                kept.push(record);
            }
        }
        Ok(Self::assemble(kept, period, 0))
    }

    fn assemble(records: Vec<CorpusRecord>, period: YearRange, dangling_carry: u64) -> Corpus {
        let mut journals: Vec<JournalRecord> = Vec::new();
        let mut journal_index: HashMap<JournalId, JournalIx> = HashMap::new();
        let mut authors: Vec<AuthorId> = Vec::new();
        let mut author_index: HashMap<AuthorId, AuthorIx> = HashMap::new();
        let mut paper_index: HashMap<PaperId, PaperIx> = HashMap::with_capacity(records.len());

        for (ix, r) in records.iter().enumerate() {
            paper_index.insert(r.paper_id.clone(), ix as PaperIx);
        }

        let mut papers = Vec::with_capacity(records.len());
        let mut dangling = dangling_carry;
        let mut invalid = 0u64;
        let mut seen_refs: HashSet<PaperIx> = HashSet::new();

        for (ix, r) in records.into_iter().enumerate() {
            let jix = match journal_index.get(&r.journal_id) {
                Some(&j) => {
                    let rec = &mut journals[j as usize];
                    rec.first_pub_year = rec.first_pub_year.min(r.year);
                    if rec.publisher == Publisher::Unknown {
                        if let Some(p) = r.publisher {
                            rec.publisher = p;
                        }
                    }
                    j
                }
                None => {
                    let j = journals.len() as JournalIx;
                    journals.push(JournalRecord {
                        journal_id: r.journal_id.clone(),
                        name: r.journal_name.clone(),
                        publisher: r.publisher.unwrap_or(Publisher::Unknown),
                        first_pub_year: r.year,
                    });
                    journal_index.insert(r.journal_id.clone(), j);
                    j
                }
            };

            let mut paper_authors = Vec::with_capacity(r.author_ids.len());
            for a in r.author_ids {
                let aix = *author_index.entry(a.clone()).or_insert_with(|| {
                    authors.push(a);
                    (authors.len() - 1) as AuthorIx
                });
                if !paper_authors.contains(&aix) {
                    paper_authors.push(aix);
                }
            }

            seen_refs.clear();
            let mut refs = Vec::with_capacity(r.references.len());
            for target in &r.references {
                match paper_index.get(target) {
                    Some(&t) if t as usize == ix => invalid += 1,
                    Some(&t) => {
                        if seen_refs.insert(t) {
                            refs.push(t);
                        } else {
                            invalid += 1;
                        }
                    }
                    None if *target == r.paper_id => invalid += 1,
                    None => dangling += 1,
                }
            }

            papers.push(Paper {
                id: r.paper_id,
                year: r.year,
                journal: jix,
                authors: paper_authors,
                references: refs,
            });
        }

        let mut by_journal_year = vec![BTreeMap::<i32, Vec<PaperIx>>::new(); journals.len()];
        let mut cited_by = vec![Vec::new(); papers.len()];
        for (ix, p) in papers.iter().enumerate() {
            by_journal_year[p.journal as usize]
                .entry(p.year)
                .or_default()
                .push(ix as PaperIx);
            for &t in &p.references {
                cited_by[t as usize].push(ix as PaperIx);
            }
        }

        Corpus {
            period,
            papers,
            paper_index,
            journals,
            journal_index,
            authors,
            by_journal_year,
            cited_by,
            dangling_ref_count: dangling,
            invalid_ref_count: invalid,
        }
    }

    pub fn period(&self) -> YearRange {
        self.period
    }

    pub fn papers(&self) -> &[Paper] {
        &self.papers
    }

    pub fn paper(&self, ix: PaperIx) -> &Paper {
        &self.papers[ix as usize]
    }

    pub fn paper_ix(&self, id: &PaperId) -> Option<PaperIx> {
        self.paper_index.get(id).copied()
    }

    pub fn journals(&self) -> &[JournalRecord] {
        &self.journals
    }

    pub fn journal(&self, ix: JournalIx) -> &JournalRecord {
        &self.journals[ix as usize]
    }

    pub fn journal_ix(&self, id: &JournalId) -> Result<JournalIx> {
        self.journal_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownJournal(vec![id.0.clone()]))
    }

    pub fn contains_journal(&self, id: &JournalId) -> bool {
        self.journal_index.contains_key(id)
    }

    pub fn journal_id_of(&self, paper: PaperIx) -> &JournalId {
        &self.journals[self.papers[paper as usize].journal as usize].journal_id
    }

    pub fn author(&self, ix: AuthorIx) -> &AuthorId {
        &self.authors[ix as usize]
    }

    pub fn author_count(&self) -> usize {
        self.authors.len()
    }

    /// Papers citing `paper`.
    pub fn cited_by(&self, paper: PaperIx) -> &[PaperIx] {
        &self.cited_by[paper as usize]
    }

    /// Per-year paper lists of a journal.
    pub fn journal_years(&self, journal: JournalIx) -> &BTreeMap<i32, Vec<PaperIx>> {
        &self.by_journal_year[journal as usize]
    }

    pub fn dangling_ref_count(&self) -> u64 {
        self.dangling_ref_count
    }

    /// Duplicate and self references dropped at ingest.
    pub fn invalid_ref_count(&self) -> u64 {
        self.invalid_ref_count
    }

    pub fn citation_count(&self) -> u64 {
        self.papers.iter().map(|p| p.references.len() as u64).sum()
    }

    /// Papers of journal `journal` published in `[year - k, year - 1]`.
    pub fn papers_in_window(
        &self,
        journal: &JournalId,
        year: i32,
        window: WindowLen,
    ) -> Result<Vec<PaperIx>> {
        let j = self.journal_ix(journal)?;
        Ok(self.window_papers(j, year, window).collect())
    }

    pub(crate) fn window_papers(
        &self,
        journal: JournalIx,
        year: i32,
        window: WindowLen,
    ) -> impl Iterator<Item = PaperIx> + '_ {
        let (lo, hi) = window.span(year);
        self.by_journal_year[journal as usize]
            .range(lo..=hi)
            .flat_map(|(_, ps)| ps.iter().copied())
    }

    /// Number of papers a journal published in `year`.
    pub fn papers_in_year(&self, journal: JournalIx, year: i32) -> usize {
        self.by_journal_year[journal as usize]
            .get(&year)
            .map_or(0, Vec::len)
    }

    /// Canonical records of the retained papers, in corpus order.
    pub fn records(&self) -> impl Iterator<Item = CorpusRecord> + '_ {
        self.papers.iter().map(move |p| {
            let j = &self.journals[p.journal as usize];
            CorpusRecord {
                paper_id: p.id.clone(),
                year: p.year,
                journal_id: j.journal_id.clone(),
                journal_name: j.name.clone(),
                author_ids: p
                    .authors
                    .iter()
                    .map(|&a| self.authors[a as usize].clone())
                    .collect(),
                references: p
                    .references
                    .iter()
                    .map(|&t| self.papers[t as usize].id.clone())
                    .collect(),
                publisher: (j.publisher != Publisher::Unknown).then_some(j.publisher),
            }
        })
    }

    /// Writes the corpus in the canonical JSON-lines format.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Restricts the corpus to papers of the `keep` journals. References into
    /// dropped journals are removed and added to the dangling count.
    pub fn filter_journals(&self, keep: &BTreeSet<JournalId>) -> Result<Corpus> {
        let unknown: Vec<String> = keep
            .iter()
            .filter(|j| !self.journal_index.contains_key(*j))
            .map(|j| j.0.clone())
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownJournal(unknown));
        }
        let records: Vec<CorpusRecord> = self
            .records()
            .filter(|r| keep.contains(&r.journal_id))
            .collect();
        let mut filtered = Self::assemble(records, self.period, self.dangling_ref_count);
        filtered.invalid_ref_count = self.invalid_ref_count;
        Ok(filtered)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YearCounts {
    pub year: i32,
    pub papers: u64,
    /// References made by papers published that year.
    pub citations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub period: YearRange,
    pub papers: u64,
    pub journals: u64,
    pub authors: u64,
    pub citations: u64,
    pub dangling_references: u64,
    pub mean_authors_per_paper: f64,
    pub mean_papers_per_author: f64,
    /// False when the corpus has no papers or no authors and the means are
    /// reported as 0.
    pub means_defined: bool,
    pub per_year: Vec<YearCounts>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let papers = corpus.papers.len() as u64;
    let authors = corpus.authors.len() as u64;
    let authorships: u64 = corpus.papers.iter().map(|p| p.authors.len() as u64).sum();
    let means_defined = papers > 0 && authors > 0;
    let (per_paper, per_author) = if means_defined {
        (
            authorships as f64 / papers as f64,
            authorships as f64 / authors as f64,
        )
    } else {
        (0.0, 0.0)
    };

    let mut by_year: BTreeMap<i32, (u64, u64)> =
        corpus.period.years().map(|y| (y, (0, 0))).collect();
    for p in &corpus.papers {
        let e = by_year.entry(p.year).or_default();
        e.0 += 1;
        e.1 += p.references.len() as u64;
    }

    CorpusStats {
        period: corpus.period,
        papers,
        journals: corpus.journals.len() as u64,
        authors,
        citations: corpus.citation_count(),
        dangling_references: corpus.dangling_ref_count,
        mean_authors_per_paper: per_paper,
        mean_papers_per_author: per_author,
        means_defined,
        per_year: by_year
            .into_iter()
            .map(|(year, (papers, citations))| YearCounts {
                year,
                papers,
                citations,
            })
            .collect(),
    }
}

const SNAPSHOT_CORPUS: &str = "corpus.jsonl";
const SNAPSHOT_META: &str = "snapshot.json";

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotMeta {
    period: YearRange,
    papers: u64,
    dangling_ref_count: u64,
    invalid_ref_count: u64,
}

/// Persists the corpus as a re-loadable snapshot directory.
pub fn save_snapshot(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = File::create(dir.join(SNAPSHOT_CORPUS))?;
    corpus.write_jsonl(BufWriter::new(file))?;
    let meta = SnapshotMeta {
        period: corpus.period,
        papers: corpus.papers.len() as u64,
        dangling_ref_count: corpus.dangling_ref_count,
        invalid_ref_count: corpus.invalid_ref_count,
    };
    fs::write(dir.join(SNAPSHOT_META), serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}

pub fn load_snapshot(dir: &Path) -> Result<Corpus> {
    let meta_path = dir.join(SNAPSHOT_META);
    if !meta_path.exists() {
        return Err(Error::MissingSnapshot(dir.display().to_string()));
    }
    let meta: SnapshotMeta = serde_json::from_slice(&fs::read(meta_path)?)?;
    let mut corpus = read_corpus_file(&dir.join(SNAPSHOT_CORPUS), meta.period)?;
    corpus.dangling_ref_count += meta.dangling_ref_count;
    corpus.invalid_ref_count += meta.invalid_ref_count;
    Ok(corpus)
}
