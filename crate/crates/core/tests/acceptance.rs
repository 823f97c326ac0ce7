//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use citenet::attribution::paper_count_surge;
use citenet::config::RunConfig;
use citenet::corpus::{load_snapshot, read_corpus_file, save_snapshot};
use citenet::graph::{prune, JournalGraph};
use citenet::metrics::{
    impact_factor, revised_impact_factor, CitationFilter, CiteYearMode, ImpactWindow,
};
use citenet::patterns::{coupling_weight, PatternConfig};
use citenet::report::analyze;
use citenet::synth::{generate, generate_corpus, Background, Plant, PlantKind, PlantManifest};
use citenet::{Error, JournalId, WindowLen, YearRange};
use rand::Rng;

use common::{
    coupling_reference, extractor_mismatches, metrics_fixture, planted_manifest,
    random_edge_subset, random_graph, recall, rng,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let cfg = PatternConfig::default();
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let n = r.gen_range(2..=30);
        let p = r.gen_range(0.05..0.8);
        let unpruned = random_graph(&mut r, n, p, 500);
        let graph = random_edge_subset(&mut r, &unpruned, 0.85);
        for m in extractor_mismatches(&graph, &unpruned, &cfg) {
            mismatches.push(format!("seed {seed}: {m}"));
        }
    }
    let took = start.elapsed();
    let pass = mismatches.is_empty() && took < Duration::from_secs(60);
    let mut detail = format!(
        "200 graphs (<=30 vertices), {} mismatches, {:.1}s",
        mismatches.len(),
        took.as_secs_f64()
    );
    if let Some(first) = mismatches.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    outcome(pass, detail)
}

fn coupling() -> Outcome {
    let mut r = rng(42);
    let mut bad = 0;
    for i in 0..10_000 {
        let hi = if i % 2 == 0 { 60 } else { 2_000_000 };
        let (x, y): (u64, u64) = (r.gen_range(0..hi), r.gen_range(0..hi));
        if x == 0 && y == 0 {
            bad += usize::from(!matches!(coupling_weight(x, y), Err(Error::NoCouplingEdge)));
            continue;
        }
        let w = coupling_weight(x, y).unwrap();
        let ok = w == coupling_reference(x, y)
            && w == coupling_weight(y, x).unwrap()
            && w >= x.min(y) as f64
            && w <= x.max(y) as f64;
        bad += usize::from(!ok);
    }
    outcome(
        bad == 0,
        format!("10000 random pairs, {bad} violations of rule/symmetry/bounds"),
    )
}

fn metrics() -> Outcome {
    let c = metrics_fixture();
    let j = |s: &str| JournalId::from(s);
    let two = ImpactWindow::from(WindowLen::Two);
    let mut errs = Vec::new();
    let mut close = |label: &str, got: Option<f64>, want: Option<f64>| {
        let ok = match (got, want) {
            (Some(g), Some(w)) => (g - w).abs() <= 1e-12,
            (None, None) => true,
            _ => false,
        };
        if !ok {
            errs.push(format!("{label}: {got:?} vs {want:?}"));
        }
    };
    close(
        "IF A 2010",
        impact_factor(&c, &j("A"), 2010, two).unwrap(),
        Some(7.0 / 3.0),
    );
    close(
        "IF A 2009",
        impact_factor(&c, &j("A"), 2009, two).unwrap(),
        Some(0.5),
    );
    close(
        "IF B 2010",
        impact_factor(&c, &j("B"), 2010, two).unwrap(),
        None,
    );
    close(
        "IF B 2011",
        impact_factor(&c, &j("B"), 2011, two).unwrap(),
        Some(0.5),
    );
    close(
        "IF C 2010",
        impact_factor(&c, &j("C"), 2010, two).unwrap(),
        Some(0.0),
    );
    close(
        "IF A 2010 window-mode",
        impact_factor(
            &c,
            &j("A"),
            2010,
            ImpactWindow::new(WindowLen::Two, CiteYearMode::Window),
        )
        .unwrap(),
        Some(1.0 / 3.0),
    );
    let rif = |f: CitationFilter| revised_impact_factor(&c, &j("A"), 2010, two, &f).unwrap();
    close(
        "RIF A 2010 -self",
        rif(CitationFilter::self_citations()),
        Some(2.0),
    );
    close(
        "RIF A 2010 -B",
        rif(CitationFilter::sources([j("B")])),
        Some(4.0 / 3.0),
    );
    close(
        "RIF A 2010 -B-C",
        rif(CitationFilter::sources([j("B"), j("C")])),
        Some(1.0 / 3.0),
    );

    // Randomized corpora and filters.
    let (mut filters, mut violations, mut inexact) = (0, 0, 0);
    for seed in 0..10u64 {
        let m = PlantManifest {
            background: Background {
                journals: 8,
                papers_per_year: 5,
                refs_per_paper: 4,
                period: YearRange::new(2000, 2010).unwrap(),
                seed,
                ..Background::default()
            },
            plants: Vec::new(),
        };
        let corpus = generate_corpus(&m).unwrap();
        let ids = m.journal_ids();
        let mut r = rng(1000 + seed);
        for _ in 0..100 {
            filters += 1;
            let filter = CitationFilter {
                exclude_self: r.gen_bool(0.5),
                exclude_sources: ids.iter().filter(|_| r.gen_bool(0.3)).cloned().collect(),
            };
            let window = ImpactWindow::new(
                if r.gen_bool(0.5) {
                    WindowLen::Two
                } else {
                    WindowLen::Five
                },
                if r.gen_bool(0.5) {
                    CiteYearMode::Current
                } else {
                    CiteYearMode::Window
                },
            );
            let jn = &ids[r.gen_range(0..ids.len())];
            for y in 2001..=2010 {
                let i = impact_factor(&corpus, jn, y, window).unwrap();
                let rv = revised_impact_factor(&corpus, jn, y, window, &filter).unwrap();
                let plain =
                    revised_impact_factor(&corpus, jn, y, window, &CitationFilter::none()).unwrap();
                match (i, rv) {
                    (Some(i), Some(rv)) if rv <= i => {}
                    (None, None) => {}
                    _ => violations += 1,
                }
                if i.map(f64::to_bits) != plain.map(f64::to_bits) {
                    inexact += 1;
                }
            }
        }
    }
    let pass = errs.is_empty() && violations == 0 && inexact == 0;
    let mut detail = format!(
        "fixture {} mismatches at 1e-12; {filters} random filters: {violations} RIF>IF, {inexact} empty-filter bit differences",
        errs.len()
    );
    if let Some(e) = errs.first() {
        detail.push_str(&format!("; first: {e}"));
    }
    outcome(pass, detail)
}

const PATTERN_PLANTS: [PlantKind; 6] = [
    PlantKind::SelfLoop,
    PlantKind::Mutual,
    PlantKind::Chain,
    PlantKind::Triangle,
    PlantKind::Mesh,
    PlantKind::Cartel,
];

fn planted_recall() -> Outcome {
    let cfg = RunConfig::default();
    let mut per_kind = Vec::new();
    let mut all_recovered = true;
    let mut extras = 0;
    for kind in PATTERN_PLANTS {
        let mut hits = 0;
        for seed in 0..20 {
            let m = planted_manifest(Some(kind), seed);
            let a = analyze(&generate_corpus(&m).unwrap(), &cfg).unwrap();
            let (missing, extra) = recall(&a, &m);
            hits += usize::from(missing.is_empty());
            extras += extra.len();
        }
        all_recovered &= hits == 20;
        per_kind.push(format!("{kind} {hits}/20"));
    }
    let mut false_pos = Vec::new();
    for seed in 0..20 {
        let m = planted_manifest(None, 500 + seed);
        let a = analyze(&generate_corpus(&m).unwrap(), &cfg).unwrap();
        let census = a.census();
        if census.multi_journal_total() > 0 {
            false_pos.push(format!(
                "seed {}: {}",
                500 + seed,
                census.multi_journal_total()
            ));
        }
    }
    let fp: usize = false_pos.len();
    let pass = all_recovered && fp <= 1;
    outcome(
        pass,
        format!(
            "{}; unplanted instances beside plants: {extras}; zero-plant false positives: {fp} {:?}",
            per_kind.join(", "),
            false_pos
        ),
    )
}

fn peaks_and_surges() -> Outcome {
    let cfg = RunConfig::default();
    let mut peak_hits = 0;
    for seed in 0..20 {
        let m = planted_manifest(Some(PlantKind::Mutual), 2000 + seed);
        let burst = m.plants[0].years;
        let a = analyze(&generate_corpus(&m).unwrap(), &cfg).unwrap();
        let members: BTreeSet<&JournalId> = m.plants[0].members.iter().collect();
        let ok = a
            .signals
            .iter()
            .filter(|s| members.contains(&s.journal_id))
            .all(|s| s.if_peaks.iter().any(|y| burst.contains(*y)))
            && a.signals.len() == members.len();
        peak_hits += usize::from(ok);
    }
    let mut surge_exact = 0;
    for seed in 0..20 {
        let m = planted_manifest(Some(PlantKind::PaperSurge), 3000 + seed);
        let plant = &m.plants[0];
        let corpus = generate_corpus(&m).unwrap();
        let got = paper_count_surge(
            &corpus,
            &plant.members[0],
            corpus.period(),
            cfg.thresholds.surge_factor,
        )
        .unwrap();
        surge_exact += usize::from(got == plant.years.years().collect::<Vec<_>>());
    }
    outcome(
        peak_hits >= 19 && surge_exact == 20,
        format!("IF peak inside burst window in {peak_hits}/20 seeds; surge years exact in {surge_exact}/20 seeds"),
    )
}

fn strengths(g: &JournalGraph) -> (BTreeMap<JournalId, u64>, BTreeMap<JournalId, u64>) {
    let (mut i, mut o) = (BTreeMap::new(), BTreeMap::new());
    for v in g.vertices() {
        i.insert(v.clone(), 0);
        o.insert(v.clone(), 0);
    }
    for (s, d, e) in g.edges() {
        *o.get_mut(s).unwrap() += e.weight();
        *i.get_mut(d).unwrap() += e.weight();
    }
    (i, o)
}

fn pruning_invariants() -> Outcome {
    let mut failures = Vec::new();
    let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
    for seed in 0..100u64 {
        let mut r = rng(7000 + seed);
        let n = r.gen_range(1..=60);
        let density = r.gen_range(0.05..0.6);
        let g = random_graph(&mut r, n, density, 400);
        let (tin, tout) = (r.gen_range(1..600), r.gen_range(1..600));
        let p = prune(&g, tin, tout).unwrap();
        let mut fail = |m: String| failures.push(format!("seed {seed}: {m}"));

        // Independent recomputation of per-journal means.
        let mut years_in: BTreeMap<&JournalId, BTreeSet<i32>> = BTreeMap::new();
        let mut years_out: BTreeMap<&JournalId, BTreeSet<i32>> = BTreeMap::new();
        for (s, d, e) in g.edges() {
            for &(y, _) in e.years() {
                years_out.entry(s).or_default().insert(y);
                years_in.entry(d).or_default().insert(y);
            }
        }
        let (sin, sout) = strengths(&g);
        let mean =
            |s: &BTreeMap<JournalId, u64>,
             ys: &BTreeMap<&JournalId, BTreeSet<i32>>,
             v: &JournalId| { ys.get(v).map_or(0.0, |y| s[v] as f64 / y.len() as f64) };
        for v in g.vertices() {
            if !near(
                p.report.edges.per_journal_mean_in[v],
                mean(&sin, &years_in, v),
            ) || !near(
                p.report.edges.per_journal_mean_out[v],
                mean(&sout, &years_out, v),
            ) {
                fail(format!("mean of {v}"));
            }
        }
        for (s, d, e) in g.edges() {
            let w = e.weight() as f64;
            let keep = w > mean(&sout, &years_out, s) || w > mean(&sin, &years_in, d);
            if keep != p.edge_pruned.edge(s, d).is_some() {
                fail(format!("edge {s}->{d} survival"));
            }
        }
        for (s, d, e) in p.edge_pruned.edges() {
            if g.weight(s, d) != e.weight() {
                fail(format!("edge {s}->{d} weight changed"));
            }
        }

        let (pin, pout) = strengths(&p.edge_pruned);
        let stats = |m: &BTreeMap<JournalId, u64>| {
            let k = m.len().max(1) as f64;
            let mu = m.values().map(|&x| x as f64).sum::<f64>() / k;
            let var = m.values().map(|&x| (x as f64 - mu).powi(2)).sum::<f64>() / k;
            (mu, var.sqrt())
        };
        let ((mi, si), (mo, so)) = (stats(&pin), stats(&pout));
        let vs = &p.report.vertices;
        if !(near(vs.global_mean_in, mi)
            && near(vs.sigma_in, si)
            && near(vs.global_mean_out, mo)
            && near(vs.sigma_out, so))
        {
            fail("global mean/sigma".into());
        }
        let kin: BTreeSet<JournalId> = pin
            .iter()
            .filter(|(_, &w)| w > tin as u64)
            .map(|(v, _)| v.clone())
            .collect();
        let kout: BTreeSet<JournalId> = pout
            .iter()
            .filter(|(_, &w)| w > tout as u64)
            .map(|(v, _)| v.clone())
            .collect();
        if *p.in_view.vertices() != kin || *p.out_view.vertices() != kout {
            fail("view vertex sets".into());
        }
        let union: BTreeSet<JournalId> = kin.union(&kout).cloned().collect();
        if *p.resultant.vertices() != union || p.resultant != p.edge_pruned.induced(&union) {
            fail("resultant graph".into());
        }
        let subset = |x: &JournalGraph| {
            x.vertices().is_subset(g.vertices())
                && x.edges().all(|(s, d, e)| g.weight(s, d) == e.weight())
        };
        if ![&p.edge_pruned, &p.in_view, &p.out_view, &p.resultant]
            .into_iter()
            .all(subset)
        {
            fail("not a subgraph".into());
        }
        if p.report.resultant_edges != p.resultant.edge_count()
            || p.report.edges.edges_before != g.edge_count()
        {
            fail("report counts".into());
        }
    }
    let mut detail = format!(
        "100 random graphs, {} invariant failures (1e-9 tolerance)",
        failures.len()
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(failures.is_empty(), detail)
}

fn determinism() -> Outcome {
    let mut m = planted_manifest(None, 77);
    let burst = YearRange::new(2004, 2006).unwrap();
    m.plants = vec![
        Plant::new(PlantKind::Mesh, &["J000", "J001", "J002", "J003"], burst),
        Plant::new(PlantKind::Cartel, &["J010", "J011", "J012"], burst),
        Plant::new(PlantKind::Chain, &["J020", "J021", "J022"], burst),
    ];
    let tmp = tempfile::tempdir().unwrap();
    let snap = tmp.path().join("snapshot");
    save_snapshot(&generate_corpus(&m).unwrap(), &snap).unwrap();
    let cfg = RunConfig::default();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        analyze(&load_snapshot(&snap).unwrap(), &cfg)
            .unwrap()
            .write_bundle(&out)
            .unwrap()
    };
    let (a, b) = (run("r1"), run("r2"));
    let differing: Vec<String> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| fs::read(x).unwrap() != fs::read(y).unwrap())
        .map(|(x, _)| x.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let gen_same = generate(&m).unwrap() == generate(&m).unwrap();
    outcome(
        differing.is_empty() && a.len() == b.len() && gen_same,
        format!(
            "{} report files compared, {} differ {:?}; generator repeatable: {gen_same}",
            a.len(),
            differing.len(),
            differing
        ),
    )
}

fn scale() -> Outcome {
    let m = PlantManifest {
        background: Background {
            journals: 500,
            papers_per_year: 44,
            refs_per_paper: 7,
            seed: 99,
            ..Background::default()
        },
        plants: planted_manifest(Some(PlantKind::Triangle), 5).plants,
    };
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("corpus.jsonl");
    let gen_start = Instant::now();
    {
        let records = generate(&m).unwrap();
        let mut w = std::io::BufWriter::new(fs::File::create(&path).unwrap());
        for r in &records {
            serde_json::to_writer(&mut w, r).unwrap();
            std::io::Write::write_all(&mut w, b"\n").unwrap();
        }
    }
    let gen_took = gen_start.elapsed();

    let start = Instant::now();
    let corpus = read_corpus_file(&path, YearRange::default()).unwrap();
    let a = analyze(&corpus, &RunConfig::default()).unwrap();
    a.write_bundle(&tmp.path().join("report")).unwrap();
    let took = start.elapsed();
    let (papers, refs) = (a.stats.papers, a.stats.citations);
    let big_enough = papers >= 500_000 && refs >= 3_000_000 && corpus.journals().len() == 500;
    outcome(
        big_enough && took < Duration::from_secs(300),
        format!(
            "500 journals, {papers} papers, {refs} references: ingest+analyze+write {:.1}s (generation {:.1}s, untimed)",
            took.as_secs_f64(),
            gen_took.as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("brute-force oracle equivalence", oracle_equivalence),
        ("coupling weight rule", coupling),
        ("impact factor fixtures and RIF <= IF", metrics),
        ("planted-anomaly recall", planted_recall),
        ("peak and surge detection", peaks_and_surges),
        ("pruning invariants", pruning_invariants),
        ("report determinism", determinism),
        ("scale check", scale),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
