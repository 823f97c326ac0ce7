//! Extraction of the six anomalous citation pattern classes from a
//! (pruned) journal graph.
//!
//! Two journals are *mutual* when both directed edges between them are
//! present. Triangles, meshes and chains are shapes in the undirected graph
//! of mutual pairs:
//!
//! - triangle: three pairwise-mutual journals;
//! - mesh: four or five pairwise-mutual journals, maximal among cliques of
//!   at most five (a 4-clique inside a 5-clique is not reported);
//! - chain: an induced path of 2..=4 edges (non-consecutive members are not
//!   mutual), maximal in that it cannot be extended at either end without
//!   exceeding the length cap or losing the open-chain property.
//!
//! Self-loops and cartels also consult the unpruned graph, since pruning can
//! remove exactly the edge under test.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Direction, JournalGraph};
use crate::ids::JournalId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    SelfLoop,
    MutualCitation,
    Chain,
    Triangle,
    Mesh,
    Cartel,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::SelfLoop,
        PatternKind::MutualCitation,
        PatternKind::Chain,
        PatternKind::Triangle,
        PatternKind::Mesh,
        PatternKind::Cartel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::SelfLoop => "self_loop",
            PatternKind::MutualCitation => "mutual_citation",
            PatternKind::Chain => "chain",
            PatternKind::Triangle => "triangle",
            PatternKind::Mesh => "mesh",
            PatternKind::Cartel => "cartel",
        }
    }

    pub fn is_multi_journal(self) -> bool {
        self != PatternKind::SelfLoop
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PatternKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown pattern kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    High,
    Medium,
    Low,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::High, Bucket::Medium, Bucket::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::High => "high",
            Bucket::Medium => "medium",
            Bucket::Low => "low",
        }
    }
}

/// Coupling-weight bucket bounds: High is `w > high_min`, Medium is
/// `med_min < w <= high_min`, Low is `w <= med_min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketBounds {
    pub high_min: f64,
    pub med_min: f64,
}

impl Default for BucketBounds {
    fn default() -> Self {
        BucketBounds {
            high_min: 1200.0,
            med_min: 450.0,
        }
    }
}

impl BucketBounds {
    pub fn validate(&self) -> Result<()> {
        if self.high_min > self.med_min && self.med_min > 0.0 {
            Ok(())
        } else {
            Err(Error::config(format!(
                "bucket bounds need high > med > 0 (high {}, med {})",
                self.high_min, self.med_min
            )))
        }
    }
}

pub fn assign_bucket(w: f64, bounds: BucketBounds) -> Bucket {
    if w > bounds.high_min {
        Bucket::High
    } else if w > bounds.med_min {
        Bucket::Medium
    } else {
        Bucket::Low
    }
}

/// Single weight for a bidirectional pair. With `sigma = |x - y| / sqrt 2`
/// (sample deviation of the two weights) and `mean = (x + y) / 2`, returns
/// `max(x, y)` when `sigma > mean` and `mean` otherwise.
///
/// The branch test is evaluated exactly as `2 (x - y)^2 > (x + y)^2`.
pub fn coupling_weight(x: u64, y: u64) -> Result<f64> {
    if x == 0 && y == 0 {
        return Err(Error::NoCouplingEdge);
    }
    let (x, y) = (x as u128, y as u128);
    let diff = x.abs_diff(y);
    let sum = x + y;
    if 2 * diff * diff > sum * sum {
        Ok(x.max(y) as f64)
    } else {
        Ok(sum as f64 / 2.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutualPair {
    /// The lexicographically smaller journal.
    pub i: JournalId,
    pub k: JournalId,
    pub x_ik: u64,
    pub y_ki: u64,
    pub w: f64,
    pub bucket: Bucket,
}

impl MutualPair {
    fn evidence(&self) -> PairEvidence {
        PairEvidence {
            a: self.i.clone(),
            b: self.k.clone(),
            weight_ab: self.x_ik,
            weight_ba: self.y_ki,
            coupling_weight: self.w,
            bucket: self.bucket,
        }
    }

    fn evidence_from(&self, from: &JournalId) -> PairEvidence {
        let e = self.evidence();
        if *from == self.i {
            e
        } else {
            PairEvidence {
                a: e.b,
                b: e.a,
                weight_ab: e.weight_ba,
                weight_ba: e.weight_ab,
                ..e
            }
        }
    }

    pub fn into_instance(self) -> PatternInstance {
        PatternInstance {
            kind: PatternKind::MutualCitation,
            members: vec![self.i.clone(), self.k.clone()],
            evidence: Evidence::Pairs {
                pairs: vec![self.evidence()],
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub a: JournalId,
    pub b: JournalId,
    pub weight_ab: u64,
    pub weight_ba: u64,
    pub coupling_weight: f64,
    pub bucket: Bucket,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DonorEvidence {
    pub journal: JournalId,
    /// Surviving donor -> target weight.
    pub weight: u64,
    /// Unpruned target -> donor weight.
    pub back_weight: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Evidence {
    SelfLoop {
        self_citations: u64,
        total_incoming: u64,
        ratio: f64,
    },
    /// Mutual pairs, triangles and meshes: every member pair.
    Pairs { pairs: Vec<PairEvidence> },
    /// Chain edges in path order, each oriented along the chain.
    Chain { edges: Vec<PairEvidence> },
    Cartel {
        target: JournalId,
        donors: Vec<DonorEvidence>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternInstance {
    pub kind: PatternKind,
    pub members: Vec<JournalId>,
    pub evidence: Evidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternConfig {
    pub self_loop_ratio: f64,
    pub buckets: BucketBounds,
    pub chain_min_len: usize,
    pub chain_max_len: usize,
    pub cartel_min_donors: usize,
    pub cartel_back_weight_max: u64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        PatternConfig {
            self_loop_ratio: 0.55,
            buckets: BucketBounds::default(),
            chain_min_len: 2,
            chain_max_len: 4,
            cartel_min_donors: 2,
            cartel_back_weight_max: 0,
        }
    }
}

impl PatternConfig {
    pub fn validate(&self) -> Result<()> {
        check_self_loop_ratio(self.self_loop_ratio)?;
        self.buckets.validate()?;
        check_chain_lengths(self.chain_min_len, self.chain_max_len)?;
        check_min_donors(self.cartel_min_donors)
    }
}

fn check_self_loop_ratio(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "self-loop ratio must be in (0, 1), got {r}"
        )))
    }
}

fn check_chain_lengths(min: usize, max: usize) -> Result<()> {
    if 2 <= min && min <= max {
        Ok(())
    } else {
        Err(Error::config(format!(
            "chain lengths need 2 <= min <= max, got {min}..{max}"
        )))
    }
}

fn check_min_donors(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "cartel needs at least 2 donors, got {n}"
        )))
    }
}

/// Journals whose self-citations exceed `ratio` of all citations they
/// received, both taken from `unpruned`. Candidates are the vertices of
/// `graph`; journals never cited are skipped.
pub fn find_self_loops(
    graph: &JournalGraph,
    unpruned: &JournalGraph,
    ratio: f64,
) -> Result<Vec<PatternInstance>> {
    check_self_loop_ratio(ratio)?;
    let incoming = unpruned.strengths(Direction::In);
    let mut out = Vec::new();
    for j in graph.vertices() {
        let total = incoming.get(j).copied().unwrap_or(0);
        if total == 0 {
            continue;
        }
        let own = unpruned.weight(j, j);
        let r = own as f64 / total as f64;
        if r > ratio {
            out.push(PatternInstance {
                kind: PatternKind::SelfLoop,
                members: vec![j.clone()],
                evidence: Evidence::SelfLoop {
                    self_citations: own,
                    total_incoming: total,
                    ratio: r,
                },
            });
        }
    }
    Ok(out)
}

/// Undirected graph of mutual pairs over dense vertex indexes.
struct MutualGraph<'a> {
    names: Vec<&'a JournalId>,
    adj: Vec<BTreeSet<usize>>,
    pairs: BTreeMap<(usize, usize), MutualPair>,
}

impl<'a> MutualGraph<'a> {
    fn new(graph: &'a JournalGraph, bounds: BucketBounds) -> Self {
        let names: Vec<&JournalId> = graph.vertices().iter().collect();
        let index: BTreeMap<&JournalId, usize> =
            names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut adj = vec![BTreeSet::new(); names.len()];
        let mut pairs = BTreeMap::new();
        for (s, d, e) in graph.edges() {
            if s >= d {
                continue;
            }
            let Some(back) = graph.edge(d, s) else {
                continue;
            };
            let (a, b) = (index[s], index[d]);
            adj[a].insert(b);
            adj[b].insert(a);
            let w =
                coupling_weight(e.weight(), back.weight()).expect("stored edges have weight >= 1");
            pairs.insert(
                (a, b),
                MutualPair {
                    i: s.clone(),
                    k: d.clone(),
                    x_ik: e.weight(),
                    y_ki: back.weight(),
                    w,
                    bucket: assign_bucket(w, bounds),
                },
            );
        }
        MutualGraph { names, adj, pairs }
    }

    fn mutual(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    fn pair(&self, a: usize, b: usize) -> &MutualPair {
        &self.pairs[&(a.min(b), a.max(b))]
    }

    fn clique_instance(&self, kind: PatternKind, members: &[usize]) -> PatternInstance {
        let mut pairs = Vec::new();
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                pairs.push(self.pair(a, b).evidence());
            }
        }
        PatternInstance {
            kind,
            members: members.iter().map(|&m| self.names[m].clone()).collect(),
            evidence: Evidence::Pairs { pairs },
        }
    }

    fn common_neighbours_above(&self, members: &[usize], floor: usize) -> Vec<usize> {
        let (first, rest) = members.split_first().expect("non-empty clique");
        self.adj[*first]
            .range(floor + 1..)
            .copied()
            .filter(|&c| rest.iter().all(|&m| self.mutual(m, c)))
            .collect()
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for a in 0..self.names.len() {
            for &b in self.adj[a].range(a + 1..) {
                for c in self.common_neighbours_above(&[a, b], b) {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

/// Every pair of journals with both directed edges present in `graph`.
pub fn find_mutual_pairs(graph: &JournalGraph, bounds: BucketBounds) -> Vec<MutualPair> {
    MutualGraph::new(graph, bounds)
        .pairs
        .into_values()
        .collect()
}

/// All pairwise-mutual triples, members in ascending order.
pub fn find_triangles(graph: &JournalGraph, bounds: BucketBounds) -> Vec<PatternInstance> {
    let mg = MutualGraph::new(graph, bounds);
    mg.triangles()
        .iter()
        .map(|t| mg.clique_instance(PatternKind::Triangle, t))
        .collect()
}

/// Pairwise-mutual sets of five, and of four when not contained in such a
/// five-set.
pub fn find_meshes(graph: &JournalGraph, bounds: BucketBounds) -> Vec<PatternInstance> {
    let mg = MutualGraph::new(graph, bounds);
    let mut out = Vec::new();
    for [a, b, c] in mg.triangles() {
        for d in mg.common_neighbours_above(&[a, b, c], c) {
            let four = [a, b, c, d];
            let extends = mg.adj[a]
                .iter()
                .any(|&e| !four.contains(&e) && four[1..].iter().all(|&m| mg.mutual(m, e)));
            if !extends {
                out.push(mg.clique_instance(PatternKind::Mesh, &four));
            }
            for e in mg.common_neighbours_above(&four, d) {
                out.push(mg.clique_instance(PatternKind::Mesh, &[a, b, c, d, e]));
            }
        }
    }
    // Four-sets come out before the five-sets that share their prefix.
    out.sort_by(|x, y| x.members.cmp(&y.members));
    out
}

/// Open chains of mutual pairs with `min_len..=max_len` edges. Each chain is
/// oriented so its first member sorts before its last.
pub fn find_chains(
    graph: &JournalGraph,
    bounds: BucketBounds,
    min_len: usize,
    max_len: usize,
) -> Result<Vec<PatternInstance>> {
    check_chain_lengths(min_len, max_len)?;
    let mg = MutualGraph::new(graph, bounds);
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut path = Vec::with_capacity(max_len + 1);
    for start in 0..mg.names.len() {
        path.clear();
        path.push(start);
        grow_chains(&mg, &mut path, min_len, max_len, &mut found);
    }
    found.sort();
    Ok(found
        .into_iter()
        .map(|p| {
            let edges = p
                .windows(2)
                .map(|w| mg.pair(w[0], w[1]).evidence_from(mg.names[w[0]]))
                .collect();
            PatternInstance {
                kind: PatternKind::Chain,
                members: p.iter().map(|&m| mg.names[m].clone()).collect(),
                evidence: Evidence::Chain { edges },
            }
        })
        .collect())
}

/// Whether `u` can be appended after `end` while keeping `path` induced.
fn extends_at(mg: &MutualGraph<'_>, path: &[usize], end: usize, u: usize) -> bool {
    !path.contains(&u)
        && path.iter().all(|&m| {
            if m == end {
                mg.mutual(m, u)
            } else {
                !mg.mutual(m, u)
            }
        })
}

fn grow_chains(
    mg: &MutualGraph<'_>,
    path: &mut Vec<usize>,
    min_len: usize,
    max_len: usize,
    found: &mut Vec<Vec<usize>>,
) {
    let last = *path.last().unwrap();
    let edges = path.len() - 1;
    if edges >= min_len && path[0] < last {
        let maximal = edges == max_len
            || [path[0], last]
                .iter()
                .all(|&end| !mg.adj[end].iter().any(|&u| extends_at(mg, path, end, u)));
        if maximal {
            found.push(path.clone());
        }
    }
    if edges == max_len {
        return;
    }
    let candidates: Vec<usize> = mg.adj[last]
        .iter()
        .copied()
        .filter(|&u| extends_at(mg, path, last, u))
        .collect();
    for u in candidates {
        path.push(u);
        grow_chains(mg, path, min_len, max_len, found);
        path.pop();
    }
}

/// Targets receiving surviving edges from at least `min_donors` journals
/// that the target cites back at most `back_weight_max` times (unpruned).
pub fn find_cartels(
    graph: &JournalGraph,
    unpruned: &JournalGraph,
    min_donors: usize,
    back_weight_max: u64,
) -> Result<Vec<PatternInstance>> {
    check_min_donors(min_donors)?;
    let mut incoming: BTreeMap<&JournalId, Vec<(&JournalId, u64)>> = BTreeMap::new();
    for (s, d, e) in graph.edges() {
        if s != d {
            incoming.entry(d).or_default().push((s, e.weight()));
        }
    }
    let mut out = Vec::new();
    for (target, sources) in incoming {
        let donors: Vec<DonorEvidence> = sources
            .into_iter()
            .filter_map(|(d, weight)| {
                let back_weight = unpruned.weight(target, d);
                (back_weight <= back_weight_max).then(|| DonorEvidence {
                    journal: d.clone(),
                    weight,
                    back_weight,
                })
            })
            .collect();
        if donors.len() >= min_donors {
            let mut members: Vec<JournalId> = donors.iter().map(|d| d.journal.clone()).collect();
            members.push(target.clone());
            out.push(PatternInstance {
                kind: PatternKind::Cartel,
                members,
                evidence: Evidence::Cartel {
                    target: target.clone(),
                    donors,
                },
            });
        }
    }
    Ok(out)
}

/// Output of every extractor on one graph.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    pub self_loops: Vec<PatternInstance>,
    pub mutual_pairs: Vec<MutualPair>,
    pub chains: Vec<PatternInstance>,
    pub triangles: Vec<PatternInstance>,
    pub meshes: Vec<PatternInstance>,
    pub cartels: Vec<PatternInstance>,
    /// Self-loop edges present in the analysed graph, excessive or not.
    pub self_loop_edges: usize,
}

impl PatternSet {
    /// All instances in kind order.
    pub fn instances(&self) -> Vec<PatternInstance> {
        let mut out = self.self_loops.clone();
        out.extend(
            self.mutual_pairs
                .iter()
                .cloned()
                .map(MutualPair::into_instance),
        );
        out.extend(self.chains.iter().cloned());
        out.extend(self.triangles.iter().cloned());
        out.extend(self.meshes.iter().cloned());
        out.extend(self.cartels.iter().cloned());
        out
    }

    pub fn census(&self) -> Census {
        let counts = [
            (PatternKind::SelfLoop, self.self_loops.len()),
            (PatternKind::MutualCitation, self.mutual_pairs.len()),
            (PatternKind::Chain, self.chains.len()),
            (PatternKind::Triangle, self.triangles.len()),
            (PatternKind::Mesh, self.meshes.len()),
            (PatternKind::Cartel, self.cartels.len()),
        ];
        Census {
            counts: counts.into_iter().collect(),
            self_loop_edges: self.self_loop_edges,
        }
    }
}

/// Instance count per pattern kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub counts: BTreeMap<PatternKind, usize>,
    pub self_loop_edges: usize,
}

impl Census {
    pub fn get(&self, kind: PatternKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn multi_journal_total(&self) -> usize {
        self.counts
            .iter()
            .filter(|(k, _)| k.is_multi_journal())
            .map(|(_, &n)| n)
            .sum()
    }
}

/// Runs every extractor. `graph` is the resultant graph, `unpruned` the
/// graph built straight from the corpus.
pub fn extract_patterns(
    graph: &JournalGraph,
    unpruned: &JournalGraph,
    config: &PatternConfig,
) -> Result<PatternSet> {
    config.validate()?;
    Ok(PatternSet {
        self_loops: find_self_loops(graph, unpruned, config.self_loop_ratio)?,
        mutual_pairs: find_mutual_pairs(graph, config.buckets),
        chains: find_chains(
            graph,
            config.buckets,
            config.chain_min_len,
            config.chain_max_len,
        )?,
        triangles: find_triangles(graph, config.buckets),
        meshes: find_meshes(graph, config.buckets),
        cartels: find_cartels(
            graph,
            unpruned,
            config.cartel_min_donors,
            config.cartel_back_weight_max,
        )?,
        self_loop_edges: graph.edges().filter(|(s, d, _)| s == d).count(),
    })
}

pub fn pattern_census(
    graph: &JournalGraph,
    unpruned: &JournalGraph,
    config: &PatternConfig,
) -> Result<Census> {
    Ok(extract_patterns(graph, unpruned, config)?.census())
}
