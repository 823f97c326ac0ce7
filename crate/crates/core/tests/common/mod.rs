//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use citenet::graph::JournalGraph;
use citenet::patterns::{
    coupling_weight, extract_patterns, PatternConfig, PatternInstance, PatternKind,
};
use citenet::JournalId;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vid(i: usize) -> JournalId {
    JournalId::from(format!("V{i:02}"))
}

/// Random weighted digraph on `n` vertices. Each ordered pair (self pairs
/// included) gets an edge with probability `p`, its weight spread over a
/// few random years.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64, max_weight: u64) -> JournalGraph {
    let mut g = JournalGraph::new();
    for i in 0..n {
        g.add_vertex(vid(i));
    }
    for s in 0..n {
        for d in 0..n {
            if r.gen_bool(p) {
                let w = r.gen_range(1..=max_weight);
                let mut left = w;
                while left > 0 {
                    let chunk = r.gen_range(1..=left);
                    g.add_citations(&vid(s), &vid(d), r.gen_range(1995..=2010), chunk);
                    left -= chunk;
                }
            }
        }
    }
    g
}

/// Copy of `g` keeping each edge with probability `keep`.
pub fn random_edge_subset(r: &mut ChaCha8Rng, g: &JournalGraph, keep: f64) -> JournalGraph {
    let mut out = JournalGraph::new();
    for v in g.vertices() {
        out.add_vertex(v.clone());
    }
    for (s, d, e) in g.edges() {
        if r.gen_bool(keep) {
            for &(y, c) in e.years() {
                out.add_citations(s, d, y, c);
            }
        }
    }
    out
}

/// Dense view of a graph for subset enumeration.
struct Dense {
    names: Vec<JournalId>,
    mutual: Vec<u64>,
}

impl Dense {
    fn new(g: &JournalGraph) -> Self {
        let names: Vec<JournalId> = g.vertices().iter().cloned().collect();
        assert!(names.len() <= 64);
        let mut mutual = vec![0u64; names.len()];
        for (a, x) in names.iter().enumerate() {
            for (b, y) in names.iter().enumerate() {
                if a != b && g.weight(x, y) > 0 && g.weight(y, x) > 0 {
                    mutual[a] |= 1 << b;
                }
            }
        }
        Dense { names, mutual }
    }

    fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| self.mutual[a] >> b & 1 == 1))
    }

    fn induced_degree(&self, v: usize, mask: u64) -> u32 {
        (self.mutual[v] & mask).count_ones()
    }

    fn ids(&self, set: &[usize]) -> Vec<JournalId> {
        set.iter().map(|&i| self.names[i].clone()).collect()
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn mask_of(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &i| m | 1 << i)
}

pub fn oracle_self_loops(
    graph: &JournalGraph,
    unpruned: &JournalGraph,
    ratio: f64,
) -> Vec<Vec<JournalId>> {
    graph
        .vertices()
        .iter()
        .filter(|v| {
            let total: u64 = unpruned
                .vertices()
                .iter()
                .map(|u| unpruned.weight(u, v))
                .sum();
            total > 0 && unpruned.weight(v, v) as f64 / total as f64 > ratio
        })
        .map(|v| vec![v.clone()])
        .collect()
}

pub fn oracle_cliques(graph: &JournalGraph, k: usize) -> Vec<Vec<JournalId>> {
    let d = Dense::new(graph);
    subsets(d.names.len(), k)
        .into_iter()
        .filter(|s| d.is_clique(s))
        .map(|s| d.ids(&s))
        .collect()
}

pub fn oracle_meshes(graph: &JournalGraph) -> Vec<Vec<JournalId>> {
    let d = Dense::new(graph);
    let n = d.names.len();
    let fives: Vec<Vec<usize>> = subsets(n, 5)
        .into_iter()
        .filter(|s| d.is_clique(s))
        .collect();
    let mut out: Vec<Vec<usize>> = subsets(n, 4)
        .into_iter()
        .filter(|s| d.is_clique(s))
        .filter(|s| !fives.iter().any(|f| s.iter().all(|v| f.contains(v))))
        .collect();
    out.extend(fives);
    out.sort();
    out.iter().map(|s| d.ids(s)).collect()
}

/// Vertex sets of size 3..=max_len+1 whose induced mutual subgraph is a
/// path, kept when at the length cap or when no outside vertex extends the
/// induced path. Reported in path order with first < last.
pub fn oracle_chains(graph: &JournalGraph, min_len: usize, max_len: usize) -> Vec<Vec<JournalId>> {
    let d = Dense::new(graph);
    let n = d.names.len();
    let mut out = Vec::new();
    for size in min_len + 1..=max_len + 1 {
        for s in subsets(n, size) {
            let mask = mask_of(&s);
            let degs: Vec<u32> = s.iter().map(|&v| d.induced_degree(v, mask)).collect();
            let edges: u32 = degs.iter().sum::<u32>() / 2;
            if edges as usize != size - 1 || degs.iter().any(|&x| x == 0 || x > 2) {
                continue;
            }
            // Walk from the smaller endpoint; a disconnected set stops short.
            let start = s[degs.iter().position(|&x| x == 1).unwrap()];
            let mut path = vec![start];
            let mut prev_mask = 1u64 << start;
            while let Some(next) = {
                let nb = d.mutual[*path.last().unwrap()] & mask & !prev_mask;
                (nb != 0).then(|| nb.trailing_zeros() as usize)
            } {
                path.push(next);
                prev_mask |= 1 << next;
            }
            if path.len() != size {
                continue;
            }
            let maximal = size - 1 == max_len
                || !(0..n).any(|v| {
                    mask >> v & 1 == 0 && {
                        let touch = d.mutual[v] & mask;
                        touch.count_ones() == 1
                            && (touch == 1 << path[0] || touch == 1 << path[size - 1])
                    }
                });
            if maximal {
                out.push(d.ids(&path));
            }
        }
    }
    out.sort();
    out
}

pub fn oracle_cartels(
    graph: &JournalGraph,
    unpruned: &JournalGraph,
    min_donors: usize,
    back_max: u64,
) -> Vec<Vec<JournalId>> {
    let mut out = Vec::new();
    for t in graph.vertices() {
        let mut members: Vec<JournalId> = graph
            .vertices()
            .iter()
            .filter(|d| *d != t && graph.weight(d, t) > 0 && unpruned.weight(t, d) <= back_max)
            .cloned()
            .collect();
        if members.len() >= min_donors {
            members.push(t.clone());
            out.push(members);
        }
    }
    out
}

fn members_of(instances: &[PatternInstance]) -> Vec<Vec<JournalId>> {
    instances.iter().map(|i| i.members.clone()).collect()
}

fn sorted(mut v: Vec<Vec<JournalId>>) -> Vec<Vec<JournalId>> {
    v.sort();
    v
}

/// Runs every extractor and its oracle; returns one line per disagreement.
pub fn extractor_mismatches(
    graph: &JournalGraph,
    unpruned: &JournalGraph,
    cfg: &PatternConfig,
) -> Vec<String> {
    let set = extract_patterns(graph, unpruned, cfg).expect("valid config");
    let mut bad = Vec::new();
    let mut check = |kind: PatternKind, got: Vec<Vec<JournalId>>, want: Vec<Vec<JournalId>>| {
        if got != want {
            bad.push(format!(
                "{}: got {} want {}",
                kind.as_str(),
                got.len(),
                want.len()
            ));
        }
    };
    check(
        PatternKind::SelfLoop,
        members_of(&set.self_loops),
        oracle_self_loops(graph, unpruned, cfg.self_loop_ratio),
    );
    let pairs: Vec<Vec<JournalId>> = set
        .mutual_pairs
        .iter()
        .map(|p| vec![p.i.clone(), p.k.clone()])
        .collect();
    check(PatternKind::MutualCitation, pairs, oracle_cliques(graph, 2));
    check(
        PatternKind::Triangle,
        sorted(members_of(&set.triangles)),
        oracle_cliques(graph, 3),
    );
    check(
        PatternKind::Mesh,
        members_of(&set.meshes),
        oracle_meshes(graph),
    );
    check(
        PatternKind::Chain,
        members_of(&set.chains),
        oracle_chains(graph, cfg.chain_min_len, cfg.chain_max_len),
    );
    check(
        PatternKind::Cartel,
        members_of(&set.cartels),
        oracle_cartels(
            graph,
            unpruned,
            cfg.cartel_min_donors,
            cfg.cartel_back_weight_max,
        ),
    );
    for p in &set.mutual_pairs {
        let (x, y) = (graph.weight(&p.i, &p.k), graph.weight(&p.k, &p.i));
        if p.x_ik != x || p.y_ki != y || p.w != coupling_weight(x, y).unwrap() {
            bad.push(format!("pair {}-{} evidence", p.i, p.k));
        }
    }
    bad
}

/// Direct floating-point evaluation of the coupling rule.
pub fn coupling_reference(x: u64, y: u64) -> f64 {
    let (xf, yf) = (x as f64, y as f64);
    let mean = (xf + yf) / 2.0;
    // Sample deviation of two values: n - 1 = 1.
    let sigma = ((xf - mean).powi(2) + (yf - mean).powi(2)).sqrt();
    if sigma > mean {
        xf.max(yf)
    } else {
        mean
    }
}

pub fn union_members(instances: &[PatternInstance]) -> BTreeSet<JournalId> {
    instances
        .iter()
        .flat_map(|i| i.members.iter().cloned())
        .collect()
}

use citenet::corpus::{parse_corpus, Corpus};
use citenet::report::Analysis;
use citenet::synth::{Background, Plant, PlantKind, PlantManifest};
use citenet::YearRange;

/// Default-size background with one plant of `kind` on random members.
pub fn planted_manifest(kind: Option<PlantKind>, seed: u64) -> PlantManifest {
    let mut r = rng(seed ^ 0x5eed);
    let background = Background {
        seed,
        ..Background::default()
    };
    let mut ids: Vec<usize> = (0..background.journals).collect();
    rand::seq::SliceRandom::shuffle(ids.as_mut_slice(), &mut r);
    let members =
        |n: usize| -> Vec<String> { ids[..n].iter().map(|i| format!("J{i:03}")).collect() };
    let start = r.gen_range(1995..=2008);
    let burst = YearRange::new(start, start + 2).unwrap();
    let plant = kind.map(|kind| {
        let n = match kind {
            PlantKind::SelfLoop | PlantKind::PaperSurge => 1,
            PlantKind::Mutual => 2,
            PlantKind::Triangle => 3,
            PlantKind::Chain => r.gen_range(3..=5),
            PlantKind::Mesh => r.gen_range(4..=5),
            PlantKind::Cartel => r.gen_range(3..=5),
        };
        let names = members(n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let years = match kind {
            PlantKind::SelfLoop => YearRange::new(2000, 2011).unwrap(),
            _ => burst,
        };
        let mut p = Plant::new(kind, &refs, years);
        if kind == PlantKind::SelfLoop {
            p.citations = 3000;
        }
        p
    });
    PlantManifest {
        background,
        plants: plant.into_iter().collect(),
    }
}

/// Expected instances missing from the analysis, and found instances not
/// explained by any plant. Members compare as sets.
pub fn recall(analysis: &Analysis, manifest: &PlantManifest) -> (Vec<String>, Vec<String>) {
    let found: BTreeSet<(PatternKind, Vec<JournalId>)> = analysis
        .instances()
        .into_iter()
        .map(|i| {
            let mut m = i.members;
            m.sort();
            (i.kind, m)
        })
        .collect();
    let expected: BTreeSet<(PatternKind, Vec<JournalId>)> = manifest
        .plants
        .iter()
        .flat_map(|p| p.expected_instances())
        .collect();
    let show = |(k, m): &(PatternKind, Vec<JournalId>)| {
        format!(
            "{}[{}]",
            k.as_str(),
            m.iter().map(|j| j.as_str()).collect::<Vec<_>>().join(",")
        )
    };
    (
        expected.difference(&found).map(show).collect(),
        found.difference(&expected).map(show).collect(),
    )
}

fn record(id: &str, year: i32, journal: &str, authors: &[&str], refs: &[&str]) -> String {
    serde_json::json!({
        "paper_id": id, "year": year, "journal_id": journal,
        "journal_name": format!("Journal {journal}"),
        "author_ids": authors, "references": refs,
    })
    .to_string()
}

/// Three journals, hand-countable citations.
///
/// A publishes a1, a2 (2008), a3 (2009), a4 (2010); B publishes b1, b2
/// (2010), b3 (2011); C publishes c0 (2009), c1 (2010).
pub fn metrics_fixture() -> Corpus {
    let lines = [
        record("a1", 2008, "A", &["x"], &[]),
        record("a2", 2008, "A", &["y"], &[]),
        record("a3", 2009, "A", &["x"], &[]),
        record("c0", 2009, "C", &["z"], &["a1"]),
        record("a4", 2010, "A", &["y"], &["a3"]),
        record("b1", 2010, "B", &["u"], &["a1", "a3"]),
        record("b2", 2010, "B", &["v"], &["a2"]),
        record("c1", 2010, "C", &["z"], &["a1", "a2", "a3"]),
        record("b3", 2011, "B", &["u"], &["b1", "c1", "a4"]),
    ];
    parse_corpus(
        lines.join("\n").as_bytes(),
        YearRange::new(2005, 2012).unwrap(),
    )
    .unwrap()
}
