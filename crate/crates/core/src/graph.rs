//! Weighted directed journal-to-journal citation graph and its pruning.
//!
//! An edge `i -> k` carries `x_ik`, the number of (citing paper in `i`,
//! cited paper in `k`) reference pairs, broken down by the citing paper's
//! year. Self-loops are ordinary edges.
//!
//! Pruning runs in two stages:
//!
//! 1. Edge stage: each journal gets a mean incoming and a mean outgoing
//!    weight, total weight divided by effective citation age (distinct years
//!    with at least one citation in that direction). An edge survives when
//!    its weight strictly exceeds the source's outgoing mean or the
//!    destination's incoming mean.
//! 2. Vertex stage: the incoming view keeps journals whose surviving
//!    incoming weight exceeds the incoming threshold, the outgoing view
//!    those whose surviving outgoing weight exceeds the outgoing threshold.
//!
//! Pattern extraction runs on the subgraph induced on the union of both
//! views.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ids::JournalId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// Edge weight with its citing-year breakdown, sorted by year.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Edge {
    weight: u64,
    years: Vec<(i32, u64)>,
}

impl Edge {
    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn years(&self) -> &[(i32, u64)] {
        &self.years
    }

    pub fn in_year(&self, year: i32) -> u64 {
        self.years
            .binary_search_by_key(&year, |&(y, _)| y)
            .map_or(0, |i| self.years[i].1)
    }

    fn add(&mut self, year: i32, count: u64) {
        if count == 0 {
            return;
        }
        self.weight += count;
        match self.years.binary_search_by_key(&year, |&(y, _)| y) {
            Ok(i) => self.years[i].1 += count,
            Err(i) => self.years.insert(i, (year, count)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JournalGraph {
    vertices: BTreeSet<JournalId>,
    edges: BTreeMap<(JournalId, JournalId), Edge>,
}

impl JournalGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, j: JournalId) {
        self.vertices.insert(j);
    }

    /// Adds `count` citations from `src` to `dst` dated `year`, creating
    /// both vertices if needed. A zero count creates no edge.
    pub fn add_citations(&mut self, src: &JournalId, dst: &JournalId, year: i32, count: u64) {
        self.vertices.insert(src.clone());
        self.vertices.insert(dst.clone());
        if count > 0 {
            self.edges
                .entry((src.clone(), dst.clone()))
                .or_default()
                .add(year, count);
        }
    }

    pub fn vertices(&self) -> &BTreeSet<JournalId> {
        &self.vertices
    }

    pub fn contains(&self, j: &JournalId) -> bool {
        self.vertices.contains(j)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&JournalId, &JournalId, &Edge)> {
        self.edges.iter().map(|((s, d), e)| (s, d, e))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, src: &JournalId, dst: &JournalId) -> Option<&Edge> {
        self.edges.get(&(src.clone(), dst.clone()))
    }

    /// `x_ik`, zero when the edge is absent.
    pub fn weight(&self, src: &JournalId, dst: &JournalId) -> u64 {
        self.edge(src, dst).map_or(0, Edge::weight)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(Edge::weight).sum()
    }

    /// Total incoming (or outgoing) weight per vertex, self-loops included.
    /// Every vertex is present, isolated ones with 0.
    pub fn strengths(&self, dir: Direction) -> BTreeMap<&JournalId, u64> {
        let mut out: BTreeMap<&JournalId, u64> = self.vertices.iter().map(|v| (v, 0)).collect();
        for ((s, d), e) in &self.edges {
            let key = match dir {
                Direction::In => d,
                Direction::Out => s,
            };
            *out.get_mut(key).expect("edge endpoint is a vertex") += e.weight;
        }
        out
    }

    pub fn strength(&self, j: &JournalId, dir: Direction) -> u64 {
        self.edges
            .iter()
            .filter(|((s, d), _)| match dir {
                Direction::In => d == j,
                Direction::Out => s == j,
            })
            .map(|(_, e)| e.weight)
            .sum()
    }

    /// Subgraph induced on `keep` (intersected with the vertex set).
    pub fn induced(&self, keep: &BTreeSet<JournalId>) -> JournalGraph {
        JournalGraph {
            vertices: self.vertices.intersection(keep).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|((s, d), _)| keep.contains(s) && keep.contains(d))
                .map(|(k, e)| (k.clone(), e.clone()))
                .collect(),
        }
    }

    /// Per-year totals over all edges.
    pub fn yearly_totals(&self) -> BTreeMap<i32, u64> {
        let mut out = BTreeMap::new();
        for e in self.edges.values() {
            for &(y, c) in &e.years {
                *out.entry(y).or_insert(0) += c;
            }
        }
        out
    }

    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst", "weight"])?;
        for ((s, d), e) in &self.edges {
            w.write_record([s.as_str(), d.as_str(), &e.weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_edge_years_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst", "year", "weight"])?;
        for ((s, d), e) in &self.edges {
            for &(y, c) in &e.years {
                w.write_record([s.as_str(), d.as_str(), &y.to_string(), &c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Aggregates paper-level references into the journal graph. Every journal
/// with at least one paper becomes a vertex.
pub fn build_journal_graph(corpus: &Corpus) -> JournalGraph {
    let mut counts: HashMap<(u32, u32, i32), u64> = HashMap::new();
    for p in corpus.papers() {
        for &q in &p.references {
            *counts
                .entry((p.journal, corpus.paper(q).journal, p.year))
                .or_insert(0) += 1;
        }
    }
    let mut keys: Vec<_> = counts.into_iter().collect();
    keys.sort_unstable();

    let mut graph = JournalGraph::new();
    for j in corpus.journals() {
        graph.add_vertex(j.journal_id.clone());
    }
    // Keys are sorted by (src, dst, year), so each edge's years arrive in order.
    let mut current: Option<((u32, u32), Edge)> = None;
    let mut flush = |pair: (u32, u32), edge: Edge| {
        let key = (
            corpus.journal(pair.0).journal_id.clone(),
            corpus.journal(pair.1).journal_id.clone(),
        );
        graph.edges.insert(key, edge);
    };
    for ((s, d, y), c) in keys {
        match &mut current {
            Some((pair, edge)) if *pair == (s, d) => {
                edge.weight += c;
                edge.years.push((y, c));
            }
            _ => {
                if let Some((pair, edge)) = current.take() {
                    flush(pair, edge);
                }
                current = Some((
                    (s, d),
                    Edge {
                        weight: c,
                        years: vec![(y, c)],
                    },
                ));
            }
        }
    }
    if let Some((pair, edge)) = current {
        flush(pair, edge);
    }
    graph
}

/// Number of distinct years in which `j` received (`In`) or gave (`Out`)
/// at least one citation. Self-loops count in both directions.
pub fn effective_citation_age(
    graph: &JournalGraph,
    j: &JournalId,
    dir: Direction,
) -> Result<usize> {
    if !graph.contains(j) {
        return Err(Error::UnknownJournal(vec![j.0.clone()]));
    }
    let years: BTreeSet<i32> = graph
        .edges()
        .filter(|(s, d, _)| match dir {
            Direction::In => *d == j,
            Direction::Out => *s == j,
        })
        .flat_map(|(_, _, e)| e.years.iter().map(|&(y, _)| y))
        .collect();
    Ok(years.len())
}

fn citation_ages(graph: &JournalGraph, dir: Direction) -> BTreeMap<&JournalId, usize> {
    let mut years: BTreeMap<&JournalId, BTreeSet<i32>> = graph
        .vertices
        .iter()
        .map(|v| (v, BTreeSet::new()))
        .collect();
    for ((s, d), e) in &graph.edges {
        let key = match dir {
            Direction::In => d,
            Direction::Out => s,
        };
        years
            .get_mut(key)
            .unwrap()
            .extend(e.years.iter().map(|&(y, _)| y));
    }
    years.into_iter().map(|(k, v)| (k, v.len())).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgePruneStats {
    pub per_journal_mean_in: BTreeMap<JournalId, f64>,
    pub per_journal_mean_out: BTreeMap<JournalId, f64>,
    pub edges_before: usize,
    pub edges_removed: usize,
}

/// Edge stage of pruning. Vertices are kept even when all their edges go.
pub fn prune_edges_by_journal_mean(graph: &JournalGraph) -> (JournalGraph, EdgePruneStats) {
    let mean = |dir| -> BTreeMap<JournalId, f64> {
        let ages = citation_ages(graph, dir);
        graph
            .strengths(dir)
            .into_iter()
            .map(|(j, total)| {
                let age = ages[j];
                let m = if age == 0 {
                    0.0
                } else {
                    total as f64 / age as f64
                };
                (j.clone(), m)
            })
            .collect()
    };
    let mean_in = mean(Direction::In);
    let mean_out = mean(Direction::Out);

    let edges: BTreeMap<_, _> = graph
        .edges
        .iter()
        .filter(|((s, d), e)| {
            let w = e.weight as f64;
            w > mean_out[s] || w > mean_in[d]
        })
        .map(|(k, e)| (k.clone(), e.clone()))
        .collect();

    let stats = EdgePruneStats {
        edges_before: graph.edges.len(),
        edges_removed: graph.edges.len() - edges.len(),
        per_journal_mean_in: mean_in,
        per_journal_mean_out: mean_out,
    };
    (
        JournalGraph {
            vertices: graph.vertices.clone(),
            edges,
        },
        stats,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexPruneStats {
    /// Mean incoming strength over all vertices of the edge-pruned graph.
    pub global_mean_in: f64,
    pub global_mean_out: f64,
    /// Population standard deviation of the incoming strengths.
    pub sigma_in: f64,
    pub sigma_out: f64,
    pub in_threshold: u64,
    pub out_threshold: u64,
    pub vertices_before: usize,
    pub kept_in_vertices: usize,
    pub kept_out_vertices: usize,
}

fn mean_and_sigma(values: &[u64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|&v| (v as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

/// Vertex stage of pruning. Returns the incoming and outgoing views, each
/// the subgraph induced on its kept vertices.
pub fn prune_vertices_by_global_threshold(
    graph: &JournalGraph,
    in_threshold: i64,
    out_threshold: i64,
) -> Result<(JournalGraph, JournalGraph, VertexPruneStats)> {
    if in_threshold <= 0 || out_threshold <= 0 {
        return Err(Error::config(format!(
            "vertex thresholds must be positive (in {in_threshold}, out {out_threshold})"
        )));
    }
    let (in_t, out_t) = (in_threshold as u64, out_threshold as u64);
    let s_in = graph.strengths(Direction::In);
    let s_out = graph.strengths(Direction::Out);

    let (global_mean_in, sigma_in) = mean_and_sigma(&s_in.values().copied().collect::<Vec<_>>());
    let (global_mean_out, sigma_out) = mean_and_sigma(&s_out.values().copied().collect::<Vec<_>>());

    let keep_in: BTreeSet<JournalId> = s_in
        .iter()
        .filter(|(_, &w)| w > in_t)
        .map(|(j, _)| (*j).clone())
        .collect();
    let keep_out: BTreeSet<JournalId> = s_out
        .iter()
        .filter(|(_, &w)| w > out_t)
        .map(|(j, _)| (*j).clone())
        .collect();

    let stats = VertexPruneStats {
        global_mean_in,
        global_mean_out,
        sigma_in,
        sigma_out,
        in_threshold: in_t,
        out_threshold: out_t,
        vertices_before: graph.vertices.len(),
        kept_in_vertices: keep_in.len(),
        kept_out_vertices: keep_out.len(),
    };
    Ok((graph.induced(&keep_in), graph.induced(&keep_out), stats))
}

/// Subgraph of the edge-pruned `base` induced on the union of both views'
/// vertices. Edges between an incoming-only and an outgoing-only journal
/// are recovered from `base`, which is why it is needed here.
pub fn resultant_graph(
    base: &JournalGraph,
    in_view: &JournalGraph,
    out_view: &JournalGraph,
) -> Result<JournalGraph> {
    let union: BTreeSet<JournalId> = in_view
        .vertices
        .union(&out_view.vertices)
        .cloned()
        .collect();
    let foreign: Vec<String> = union
        .iter()
        .filter(|v| !base.contains(v))
        .map(|v| v.0.clone())
        .collect();
    if !foreign.is_empty() {
        return Err(Error::UnknownJournal(foreign));
    }
    Ok(base.induced(&union))
}

/// Authoritative record of everything the pruning stage applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    /// Edge survival rule: an edge is kept if it beats either endpoint's mean.
    pub edge_rule: String,
    #[serde(flatten)]
    pub edges: EdgePruneStats,
    #[serde(flatten)]
    pub vertices: VertexPruneStats,
    pub resultant_vertices: usize,
    pub resultant_edges: usize,
}

/// All intermediate graphs of the pruning pipeline.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub edge_pruned: JournalGraph,
    pub in_view: JournalGraph,
    pub out_view: JournalGraph,
    pub resultant: JournalGraph,
    pub report: PruneReport,
}

pub fn prune(graph: &JournalGraph, in_threshold: i64, out_threshold: i64) -> Result<Pruned> {
    let (edge_pruned, edges) = prune_edges_by_journal_mean(graph);
    let (in_view, out_view, vertices) =
        prune_vertices_by_global_threshold(&edge_pruned, in_threshold, out_threshold)?;
    let resultant = resultant_graph(&edge_pruned, &in_view, &out_view)?;
    let report = PruneReport {
        edge_rule: "weight > mean_out(src) OR weight > mean_in(dst)".to_owned(),
        edges,
        vertices,
        resultant_vertices: resultant.vertices.len(),
        resultant_edges: resultant.edge_count(),
    };
    Ok(Pruned {
        edge_pruned,
        in_view,
        out_view,
        resultant,
        report,
    })
}
