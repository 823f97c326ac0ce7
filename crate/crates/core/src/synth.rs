//! Synthetic corpora with planted citation anomalies.
//!
//! Background references are drawn uniformly over all earlier papers. Each
//! plant then injects references between its member journals in its active
//! years, always pointing at papers inside the citing year's impact window so
//! the injected citations show up in both the graph and the IF series.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusRecord};
use crate::error::{Error, Result};
use crate::ids::{AuthorId, JournalId, PaperId, Publisher, WindowLen, YearRange};
use crate::patterns::PatternKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    SelfLoop,
    Mutual,
    Chain,
    Triangle,
    Mesh,
    Cartel,
    PaperSurge,
}

impl PlantKind {
    pub const ALL: [PlantKind; 7] = [
        PlantKind::SelfLoop,
        PlantKind::Mutual,
        PlantKind::Chain,
        PlantKind::Triangle,
        PlantKind::Mesh,
        PlantKind::Cartel,
        PlantKind::PaperSurge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlantKind::SelfLoop => "self_loop",
            PlantKind::Mutual => "mutual",
            PlantKind::Chain => "chain",
            PlantKind::Triangle => "triangle",
            PlantKind::Mesh => "mesh",
            PlantKind::Cartel => "cartel",
            PlantKind::PaperSurge => "paper_surge",
        }
    }

    /// Allowed member counts.
    fn arity(self) -> (usize, usize) {
        match self {
            PlantKind::SelfLoop | PlantKind::PaperSurge => (1, 1),
            PlantKind::Mutual => (2, 2),
            PlantKind::Chain => (3, 5),
            PlantKind::Triangle => (3, 3),
            PlantKind::Mesh => (4, 5),
            PlantKind::Cartel => (3, usize::MAX),
        }
    }
}

impl fmt::Display for PlantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlantKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown plant kind `{s}`")))
    }
}

fn default_authors_per_paper() -> usize {
    2
}

fn default_authors_per_journal() -> usize {
    30
}

/// Noise model shared by every generated journal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub journals: usize,
    pub papers_per_year: usize,
    /// Uniform background references per paper.
    pub refs_per_paper: usize,
    #[serde(default = "default_authors_per_paper")]
    pub authors_per_paper: usize,
    #[serde(default = "default_authors_per_journal")]
    pub authors_per_journal: usize,
    #[serde(default)]
    pub period: YearRange,
    /// Window that planted citations target.
    #[serde(default)]
    pub window: WindowLen,
    #[serde(default)]
    pub seed: u64,
}

impl Default for Background {
    fn default() -> Self {
        Background {
            journals: 40,
            papers_per_year: 20,
            refs_per_paper: 5,
            authors_per_paper: default_authors_per_paper(),
            authors_per_journal: default_authors_per_journal(),
            period: YearRange::default(),
            window: WindowLen::Two,
            seed: 0,
        }
    }
}

fn default_citations() -> u64 {
    300
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    pub kind: PlantKind,
    /// Chains list members in path order; cartels list donors, then the target.
    pub members: Vec<JournalId>,
    /// Injected references per planted directed edge over the active years.
    #[serde(default = "default_citations")]
    pub citations: u64,
    pub years: YearRange,
    /// Yearly growth for paper-count surges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    /// Overrides the publisher of every member journal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publisher: Option<Publisher>,
}

impl Plant {
    pub fn new(kind: PlantKind, members: &[&str], years: YearRange) -> Self {
        Plant {
            kind,
            members: members.iter().map(|&m| JournalId::from(m)).collect(),
            citations: default_citations(),
            years,
            factor: None,
            publisher: None,
        }
    }

    /// Directed journal pairs that receive injected references.
    pub fn planted_edges(&self) -> Vec<(JournalId, JournalId)> {
        let m = &self.members;
        let mut out = Vec::new();
        let both = |out: &mut Vec<_>, a: &JournalId, b: &JournalId| {
            out.push((a.clone(), b.clone()));
            out.push((b.clone(), a.clone()));
        };
        match self.kind {
            PlantKind::SelfLoop => out.push((m[0].clone(), m[0].clone())),
            PlantKind::PaperSurge => {}
            PlantKind::Mutual | PlantKind::Chain => {
                for w in m.windows(2) {
                    both(&mut out, &w[0], &w[1]);
                }
            }
            PlantKind::Triangle | PlantKind::Mesh => {
                for (i, a) in m.iter().enumerate() {
                    for b in &m[i + 1..] {
                        both(&mut out, a, b);
                    }
                }
            }
            PlantKind::Cartel => {
                let (target, donors) = m.split_last().expect("validated arity");
                out.extend(donors.iter().map(|d| (d.clone(), target.clone())));
            }
        }
        out
    }

    /// Pattern instances the plant should produce at default thresholds,
    /// as (kind, sorted member set).
    pub fn expected_instances(&self) -> Vec<(PatternKind, Vec<JournalId>)> {
        let sorted = |v: &[JournalId]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        let m = &self.members;
        let mut out = Vec::new();
        match self.kind {
            PlantKind::PaperSurge => {}
            PlantKind::SelfLoop => out.push((PatternKind::SelfLoop, m.clone())),
            PlantKind::Cartel => out.push((PatternKind::Cartel, sorted(m))),
            PlantKind::Mutual | PlantKind::Chain => {
                for w in m.windows(2) {
                    out.push((PatternKind::MutualCitation, sorted(w)));
                }
                if self.kind == PlantKind::Chain {
                    out.push((PatternKind::Chain, sorted(m)));
                }
            }
            PlantKind::Triangle | PlantKind::Mesh => {
                for (i, a) in m.iter().enumerate() {
                    for b in &m[i + 1..] {
                        out.push((PatternKind::MutualCitation, sorted(&[a.clone(), b.clone()])));
                    }
                }
                for i in 0..m.len() {
                    for j in i + 1..m.len() {
                        for k in j + 1..m.len() {
                            out.push((
                                PatternKind::Triangle,
                                sorted(&[m[i].clone(), m[j].clone(), m[k].clone()]),
                            ));
                        }
                    }
                }
                if self.kind == PlantKind::Mesh {
                    out.push((PatternKind::Mesh, sorted(m)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantManifest {
    pub background: Background,
    #[serde(default)]
    pub plants: Vec<Plant>,
}

impl PlantManifest {
    pub fn journal_ids(&self) -> Vec<JournalId> {
        let width = (self.background.journals.saturating_sub(1).to_string().len()).max(3);
        (0..self.background.journals)
            .map(|i| JournalId::from(format!("J{i:0width$}")))
            .collect()
    }

    /// Census counts the plants should produce, assuming the background
    /// contributes nothing.
    pub fn expected_census(&self) -> BTreeMap<PatternKind, usize> {
        let mut out: BTreeMap<PatternKind, usize> =
            PatternKind::ALL.into_iter().map(|k| (k, 0)).collect();
        for p in &self.plants {
            for (k, _) in p.expected_instances() {
                *out.entry(k).or_default() += 1;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bg = &self.background;
        let bad = |msg: String| Err(Error::InfeasibleManifest(msg));
        if bg.journals == 0 || bg.papers_per_year == 0 {
            return bad("background needs at least one journal and one paper per year".into());
        }
        if bg.authors_per_paper == 0 || bg.authors_per_paper > bg.authors_per_journal {
            return bad(format!(
                "cannot draw {} authors per paper from a pool of {}",
                bg.authors_per_paper, bg.authors_per_journal
            ));
        }
        let known: BTreeSet<JournalId> = self.journal_ids().into_iter().collect();
        let mut used = BTreeSet::new();
        let k = bg.window.years();
        for (n, p) in self.plants.iter().enumerate() {
            let (lo, hi) = p.kind.arity();
            if p.members.len() < lo || p.members.len() > hi {
                return bad(format!(
                    "plant {n} ({}) has {} members",
                    p.kind,
                    p.members.len()
                ));
            }
            for m in &p.members {
                if !known.contains(m) {
                    return bad(format!("plant {n} names unknown journal {m}"));
                }
                if !used.insert(m.clone()) {
                    return bad(format!("journal {m} appears in more than one plant slot"));
                }
            }
            if p.years.start < bg.period.start + k || p.years.end > bg.period.end {
                return bad(format!(
                    "plant {n} years {} must lie in {}:{}",
                    p.years,
                    bg.period.start + k,
                    bg.period.end
                ));
            }
            match p.kind {
                PlantKind::PaperSurge => {
                    if !(p.factor.unwrap_or(2.0) > 1.0) {
                        return bad(format!("plant {n} surge factor must exceed 1"));
                    }
                }
                _ if p.citations == 0 => return bad(format!("plant {n} injects no citations")),
                _ => {}
            }
        }
        Ok(())
    }
}

struct Layout {
    /// (journal, year) -> paper indexes, year-major.
    cells: BTreeMap<(usize, i32), Vec<usize>>,
    year_of: Vec<i32>,
    journal_of: Vec<usize>,
    /// Index of the first paper of each year.
    year_start: BTreeMap<i32, usize>,
}

fn paper_counts(manifest: &PlantManifest, journals: &[JournalId]) -> BTreeMap<(usize, i32), usize> {
    let bg = &manifest.background;
    let mut counts = BTreeMap::new();
    for y in bg.period.years() {
        for j in 0..journals.len() {
            counts.insert((j, y), bg.papers_per_year);
        }
    }
    for p in manifest
        .plants
        .iter()
        .filter(|p| p.kind == PlantKind::PaperSurge)
    {
        let j = journals
            .iter()
            .position(|x| *x == p.members[0])
            .expect("validated member");
        let factor = p.factor.unwrap_or(2.0);
        let mut prev = bg.papers_per_year;
        for y in p.years.years() {
            let n = (prev as f64 * factor).ceil() as usize;
            counts.insert((j, y), n);
            prev = n;
        }
    }
    counts
}

fn layout(counts: &BTreeMap<(usize, i32), usize>, period: YearRange, journals: usize) -> Layout {
    let mut l = Layout {
        cells: BTreeMap::new(),
        year_of: Vec::new(),
        journal_of: Vec::new(),
        year_start: BTreeMap::new(),
    };
    for y in period.years() {
        l.year_start.insert(y, l.year_of.len());
        for j in 0..journals {
            let n = counts[&(j, y)];
            let ixs = (l.year_of.len()..l.year_of.len() + n).collect();
            l.year_of.extend(std::iter::repeat_n(y, n));
            l.journal_of.extend(std::iter::repeat_n(j, n));
            l.cells.insert((j, y), ixs);
        }
    }
    l
}

/// Generates the corpus described by `manifest`. Identical manifests yield
/// identical records.
pub fn generate(manifest: &PlantManifest) -> Result<Vec<CorpusRecord>> {
    manifest.validate()?;
    let bg = &manifest.background;
    let journals = manifest.journal_ids();
    let jpos = |id: &JournalId| {
        journals
            .iter()
            .position(|x| x == id)
            .expect("validated member")
    };
    let mut rng = ChaCha8Rng::seed_from_u64(bg.seed);

    let counts = paper_counts(manifest, &journals);
    let lay = layout(&counts, bg.period, journals.len());
    let n = lay.year_of.len();
    let mut refs: Vec<Vec<usize>> = vec![Vec::new(); n];

    // Planted references first, so background draws can skip duplicates.
    let k = bg.window.years();
    let mut blocked: HashSet<(usize, usize)> = HashSet::new();
    for (pn, plant) in manifest.plants.iter().enumerate() {
        if plant.kind == PlantKind::Cartel {
            let (target, donors) = plant.members.split_last().expect("validated arity");
            for d in donors {
                blocked.insert((jpos(target), jpos(d)));
            }
        }
        let years: Vec<i32> = plant.years.years().collect();
        let per_year = plant.citations / years.len() as u64;
        let extra = (plant.citations % years.len() as u64) as usize;
        for (src, dst) in plant.planted_edges() {
            let (s, d) = (jpos(&src), jpos(&dst));
            for (i, &y) in years.iter().enumerate() {
                let want = per_year as usize + usize::from(i < extra);
                let citing = &lay.cells[&(s, y)];
                let cited: Vec<usize> = (y - k..y)
                    .flat_map(|wy| lay.cells[&(d, wy)].iter().copied())
                    .collect();
                let space = citing.len() * cited.len();
                if want > space {
                    return Err(Error::InfeasibleManifest(format!(
                        "plant {pn}: {want} citations {src}->{dst} in {y} exceed the {space} available paper pairs"
                    )));
                }
                for slot in index::sample(&mut rng, space, want) {
                    refs[citing[slot / cited.len()]].push(cited[slot % cited.len()]);
                }
            }
        }
    }

    for (p, own) in refs.iter_mut().enumerate() {
        let earlier = lay.year_start[&lay.year_of[p]];
        if earlier == 0 || bg.refs_per_paper == 0 {
            continue;
        }
        let src = lay.journal_of[p];
        let mut added = 0;
        let mut attempts = 0;
        while added < bg.refs_per_paper && attempts < bg.refs_per_paper * 20 {
            attempts += 1;
            let q = rng.gen_range(0..earlier);
            if !blocked.is_empty() && blocked.contains(&(src, lay.journal_of[q])) {
                continue;
            }
            if own.contains(&q) {
                continue;
            }
            own.push(q);
            added += 1;
        }
    }

    let mut publishers: Vec<Publisher> = (0..journals.len())
        .map(|j| {
            let cycle = &Publisher::ALL[..Publisher::ALL.len() - 1];
            cycle[j % cycle.len()]
        })
        .collect();
    for plant in &manifest.plants {
        if let Some(pb) = plant.publisher {
            for m in &plant.members {
                publishers[jpos(m)] = pb;
            }
        }
    }

    let width = n.to_string().len().max(6);
    let pid = |p: usize| PaperId::from(format!("P{p:0width$}"));
    let mut out = Vec::with_capacity(n);
    for (p, mut r) in refs.into_iter().enumerate() {
        let j = lay.journal_of[p];
        let authors = index::sample(&mut rng, bg.authors_per_journal, bg.authors_per_paper)
            .into_iter()
            .map(|a| AuthorId::from(format!("{}-A{a:02}", journals[j])))
            .collect();
        r.sort_unstable();
        out.push(CorpusRecord {
            paper_id: pid(p),
            year: lay.year_of[p],
            journal_id: journals[j].clone(),
            journal_name: format!("Synthetic Journal {}", &journals[j].as_str()[1..]),
            author_ids: authors,
            references: r.into_iter().map(pid).collect(),
            publisher: Some(publishers[j]),
        });
    }
    Ok(out)
}

/// Generates and indexes the corpus in one step.
pub fn generate_corpus(manifest: &PlantManifest) -> Result<Corpus> {
    let records = generate(manifest)?;
    Corpus::from_records(
        records.into_iter().enumerate().map(|(i, r)| Ok((i + 1, r))),
        manifest.background.period,
    )
}
