//! Micro-level signals behind journal-level patterns: which authors supply
//! the citations, author overlap between journals, author self-citation,
//! paper-count surges and publisher concentration.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorIx, Corpus, JournalIx};
use crate::error::{Error, Result};
use crate::graph::JournalGraph;
use crate::ids::{AuthorId, JournalId, Publisher, WindowLen, YearRange};
use crate::patterns::{Bucket, Evidence, PatternInstance, PatternKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorContribution {
    pub author_id: AuthorId,
    pub src_journal: JournalId,
    pub dst_journal: JournalId,
    pub year: i32,
    /// References in the author's year-`year` papers of `src_journal` that
    /// point into `dst_journal`'s impact-factor window.
    pub citation_count: u64,
}

fn author_counts(
    corpus: &Corpus,
    src: JournalIx,
    dst: JournalIx,
    year: i32,
    window: WindowLen,
) -> HashMap<AuthorIx, u64> {
    let (lo, hi) = window.span(year);
    let mut counts: HashMap<AuthorIx, u64> = HashMap::new();
    let Some(citing) = corpus.journal_years(src).get(&year) else {
        return counts;
    };
    for &p in citing {
        let paper = corpus.paper(p);
        let hits = paper
            .references
            .iter()
            .map(|&q| corpus.paper(q))
            .filter(|q| q.journal == dst && lo <= q.year && q.year <= hi)
            .count() as u64;
        if hits > 0 {
            for &a in &paper.authors {
                *counts.entry(a).or_insert(0) += hits;
            }
        }
    }
    counts
}

/// Authors of `src`'s year-`year` papers ranked by how many references they
/// put into `dst`'s window papers. Every author of a citing paper is
/// credited with each of its references. Ties break on author id.
pub fn top_contributing_authors(
    corpus: &Corpus,
    src: &JournalId,
    dst: &JournalId,
    year: i32,
    window: WindowLen,
    n: usize,
) -> Result<Vec<AuthorContribution>> {
    if n == 0 {
        return Err(Error::config("top-author count must be at least 1"));
    }
    let (s, d) = (corpus.journal_ix(src)?, corpus.journal_ix(dst)?);
    let mut ranked: Vec<(u64, &AuthorId)> = author_counts(corpus, s, d, year, window)
        .into_iter()
        .map(|(a, c)| (c, corpus.author(a)))
        .collect();
    ranked.sort_by(|x, y| y.0.cmp(&x.0).then_with(|| x.1.cmp(y.1)));
    Ok(ranked
        .into_iter()
        .take(n)
        .map(|(citation_count, a)| AuthorContribution {
            author_id: a.clone(),
            src_journal: src.clone(),
            dst_journal: dst.clone(),
            year,
            citation_count,
        })
        .collect())
}

fn authors_in(corpus: &Corpus, j: JournalIx, years: YearRange) -> BTreeSet<AuthorIx> {
    corpus
        .journal_years(j)
        .range(years.start..=years.end)
        .flat_map(|(_, ps)| ps.iter())
        .flat_map(|&p| corpus.paper(p).authors.iter().copied())
        .collect()
}

/// Authors with at least one paper in each journal within `years`.
pub fn overlapping_authors(
    corpus: &Corpus,
    j1: &JournalId,
    j2: &JournalId,
    years: YearRange,
) -> Result<BTreeSet<AuthorId>> {
    let a = authors_in(corpus, corpus.journal_ix(j1)?, years);
    let b = authors_in(corpus, corpus.journal_ix(j2)?, years);
    Ok(a.intersection(&b)
        .map(|&x| corpus.author(x).clone())
        .collect())
}

/// Fraction of citations received by `j` where citing and cited paper share
/// an author. `None` when `j` was never cited.
pub fn author_self_citation_share(corpus: &Corpus, j: &JournalId) -> Result<Option<f64>> {
    let jix = corpus.journal_ix(j)?;
    let (mut total, mut shared) = (0u64, 0u64);
    for ps in corpus.journal_years(jix).values() {
        for &cited in ps {
            let cited_authors = &corpus.paper(cited).authors;
            for &citer in corpus.cited_by(cited) {
                total += 1;
                if corpus
                    .paper(citer)
                    .authors
                    .iter()
                    .any(|a| cited_authors.contains(a))
                {
                    shared += 1;
                }
            }
        }
    }
    Ok((total > 0).then(|| shared as f64 / total as f64))
}

/// Years in `years` where the journal published at least `factor` times as
/// many papers as the year before, the year before having at least one.
pub fn paper_count_surge(
    corpus: &Corpus,
    j: &JournalId,
    years: YearRange,
    factor: f64,
) -> Result<Vec<i32>> {
    if !(factor > 1.0) {
        return Err(Error::config(format!(
            "surge factor must be > 1, got {factor}"
        )));
    }
    let jix = corpus.journal_ix(j)?;
    Ok(years
        .years()
        .filter(|&y| {
            let prev = corpus.papers_in_year(jix, y - 1);
            prev >= 1 && corpus.papers_in_year(jix, y) as f64 >= factor * prev as f64
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublisherStats {
    pub publisher: Publisher,
    pub journals: u64,
    pub journal_share: f64,
    pub self_citations: u64,
    /// `None` when no journal has any self-citation.
    pub self_citation_share: Option<f64>,
}

/// Share of journals and of self-loop weight per publisher, over the
/// vertices of `graph`. Untagged journals count under `Unknown`.
pub fn publisher_self_citation_stats(corpus: &Corpus, graph: &JournalGraph) -> Vec<PublisherStats> {
    let mut acc: BTreeMap<Publisher, (u64, u64)> = BTreeMap::new();
    for j in graph.vertices() {
        let publisher = corpus
            .journal_ix(j)
            .map_or(Publisher::Unknown, |ix| corpus.journal(ix).publisher);
        let e = acc.entry(publisher).or_default();
        e.0 += 1;
        e.1 += graph.weight(j, j);
    }
    let journals: u64 = acc.values().map(|v| v.0).sum();
    let selfs: u64 = acc.values().map(|v| v.1).sum();
    acc.into_iter()
        .map(|(publisher, (n, s))| PublisherStats {
            publisher,
            journals: n,
            journal_share: n as f64 / journals as f64,
            self_citations: s,
            self_citation_share: (selfs > 0).then(|| s as f64 / selfs as f64),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamePublisherShare {
    pub kind: PatternKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket: Option<Bucket>,
    pub same_publisher: u64,
    /// Instances whose members all carry a known publisher.
    pub tagged: u64,
    pub share: Option<f64>,
}

fn publisher_of(corpus: &Corpus, j: &JournalId) -> Publisher {
    corpus
        .journal_ix(j)
        .map_or(Publisher::Unknown, |ix| corpus.journal(ix).publisher)
}

/// `Some(true)` when every member has the same known publisher, `None` if
/// any member is untagged.
pub fn same_publisher(corpus: &Corpus, members: &[JournalId]) -> Option<bool> {
    let pubs: Vec<Publisher> = members.iter().map(|m| publisher_of(corpus, m)).collect();
    if pubs.contains(&Publisher::Unknown) {
        return None;
    }
    Some(pubs.windows(2).all(|w| w[0] == w[1]))
}

/// Fraction of same-publisher instances: mutual pairs per bucket, chains and
/// triangles overall. Instances with an untagged member are left out of both
/// numerator and denominator.
pub fn same_publisher_share(
    patterns: &[PatternInstance],
    corpus: &Corpus,
) -> Vec<SamePublisherShare> {
    let mut keys: Vec<(PatternKind, Option<Bucket>)> = Bucket::ALL
        .iter()
        .map(|&b| (PatternKind::MutualCitation, Some(b)))
        .collect();
    keys.push((PatternKind::Chain, None));
    keys.push((PatternKind::Triangle, None));
    let mut acc: BTreeMap<(PatternKind, Option<Bucket>), (u64, u64)> =
        keys.iter().map(|&k| (k, (0, 0))).collect();

    for p in patterns {
        let key = match (p.kind, &p.evidence) {
            (PatternKind::MutualCitation, Evidence::Pairs { pairs }) if pairs.len() == 1 => {
                (p.kind, Some(pairs[0].bucket))
            }
            (PatternKind::Chain | PatternKind::Triangle, _) => (p.kind, None),
            _ => continue,
        };
        if let Some(same) = same_publisher(corpus, &p.members) {
            let e = acc.get_mut(&key).expect("key preseeded");
            e.1 += 1;
            if same {
                e.0 += 1;
            }
        }
    }
    keys.into_iter()
        .map(|k| {
            let (same, tagged) = acc[&k];
            SamePublisherShare {
                kind: k.0,
                bucket: k.1,
                same_publisher: same,
                tagged,
                share: (tagged > 0).then(|| same as f64 / tagged as f64),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectedContributors {
    pub src: JournalId,
    pub dst: JournalId,
    /// Citing year with the largest `src -> dst` weight.
    pub peak_year: i32,
    pub authors: Vec<AuthorContribution>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorOverlap {
    pub a: JournalId,
    pub b: JournalId,
    pub shared_authors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceAttribution {
    pub kind: PatternKind,
    pub members: Vec<JournalId>,
    pub top_authors: Vec<DirectedContributors>,
    pub author_overlap: Vec<AuthorOverlap>,
    pub author_self_citation_share: BTreeMap<JournalId, Option<f64>>,
    pub surge_years: BTreeMap<JournalId, Vec<i32>>,
    pub same_publisher: Option<bool>,
}

#[derive(Clone, Copy, Debug)]
pub struct AttributionParams {
    pub window: WindowLen,
    pub surge_factor: f64,
    pub top_authors: usize,
}

/// Collects every micro-level signal for one pattern instance. Directed
/// member pairs are taken from `graph` (the analysed graph).
pub fn attribute_instance(
    corpus: &Corpus,
    graph: &JournalGraph,
    instance: &PatternInstance,
    params: AttributionParams,
) -> Result<InstanceAttribution> {
    let members = &instance.members;
    let mut top_authors = Vec::new();
    for src in members {
        for dst in members {
            let self_pair = src == dst;
            if self_pair != (instance.kind == PatternKind::SelfLoop) {
                continue;
            }
            let Some(edge) = graph.edge(src, dst) else {
                continue;
            };
            let Some(&(peak_year, _)) = edge
                .years()
                .iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
            else {
                continue;
            };
            top_authors.push(DirectedContributors {
                src: src.clone(),
                dst: dst.clone(),
                peak_year,
                authors: top_contributing_authors(
                    corpus,
                    src,
                    dst,
                    peak_year,
                    params.window,
                    params.top_authors,
                )?,
            });
        }
    }

    let period = corpus.period();
    let mut author_overlap = Vec::new();
    for (x, a) in members.iter().enumerate() {
        for b in &members[x + 1..] {
            author_overlap.push(AuthorOverlap {
                a: a.clone(),
                b: b.clone(),
                shared_authors: overlapping_authors(corpus, a, b, period)?.len(),
            });
        }
    }

    let mut shares = BTreeMap::new();
    let mut surges = BTreeMap::new();
    for m in members {
        shares.insert(m.clone(), author_self_citation_share(corpus, m)?);
        surges.insert(
            m.clone(),
            paper_count_surge(corpus, m, period, params.surge_factor)?,
        );
    }

    Ok(InstanceAttribution {
        kind: instance.kind,
        members: members.clone(),
        top_authors,
        author_overlap,
        author_self_citation_share: shares,
        surge_years: surges,
        same_publisher: same_publisher(corpus, members),
    })
}
