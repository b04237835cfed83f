//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false` so the summary prints even when every
//! criterion passes. Exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use dfs_certify::exact::greedy_cover;
use dfs_certify::{
    check_by_conflicts, check_by_simulation, check_fin, degree_reduce, distinguisher_game,
    farness_certificate, fix_edge, fix_vertex, gen_bad, gen_good, gen_path, gen_random_valid,
    perturb, repair, sweepline_conflicts, test_combined, test_simple, ConflictType, GraphOracle,
    Label, LabeledGraph, Oracle, TesterKind, TesterParams, VertexId,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e <= limit, format!("{:.1}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn c1_characterization() -> Outcome {
    let t = Instant::now();
    let mut disagree = 0u64;
    let mut brute_disagree = 0u64;
    for mask in 0..1024u64 {
        let g = graph_from_mask(5, mask);
        let a = check_by_conflicts(&g).is_accept();
        disagree += u64::from(a != check_by_simulation(&g).is_accept());
        let runs = all_dfs_runs(&g);
        brute_disagree += u64::from(a != runs.discovery.contains(g.labels()));
    }
    let mut r = rng(1);
    let mut accepts = 0;
    for i in 0..10_000u64 {
        let n = r.gen_range(1..=100);
        let d = r.gen_range(2..=5);
        let g = if i % 4 == 0 {
            gen_random_valid(n, d, i).unwrap().graph
        } else {
            let attempts = r.gen_range(0..=n as usize * d / 2);
            random_graph(&mut r, n, d, attempts, false)
        };
        let a = check_by_conflicts(&g).is_accept();
        accepts += u64::from(a);
        disagree += u64::from(a != check_by_simulation(&g).is_accept());
    }
    let (fast, time) = within(t, Duration::from_secs(10));
    outcome(
        disagree == 0 && brute_disagree == 0 && fast,
        format!("{disagree} disagreements over 11024 graphs ({brute_disagree} vs DFS enumeration, {accepts} random accepts), {time}"),
    )
}

const ALL_TESTERS: [TesterKind; 6] = TesterKind::ALL;

fn c2_one_sided() -> Outcome {
    let eps = 0.2;
    let sizes = [64u32, 700, 4096, 1 << 14];
    let ds = [3usize, 5, 8];
    let mut rejects = Vec::new();
    let mut runs = 0u64;
    let mut run_all = |g: &LabeledGraph, seed: u64, rejects: &mut Vec<String>| {
        let p = TesterParams::new(eps).with_seed(seed);
        for k in ALL_TESTERS {
            let mut o = GraphOracle::new(g, seed ^ 0x5eed);
            match k.run(&mut o, &p) {
                Ok(v) if !v.is_accept() => rejects.push(format!("{} n={} seed={seed}: {v}", k.name(), g.n())),
                _ => {}
            }
            runs += 1;
        }
    };
    for i in 0..1000u64 {
        let n = sizes[i as usize % sizes.len()];
        let d = ds[(i as usize / sizes.len()) % ds.len()];
        let g = gen_random_valid(n, d, 1000 + i).unwrap().graph;
        run_all(&g, i, &mut rejects);
    }
    for i in 0..200u64 {
        let n = [512u32, 4096, 1 << 14][i as usize % 3];
        let seg = (n as f64).cbrt().floor() as u32;
        let g = gen_good(n, seg, i).unwrap().graph;
        run_all(&g, i, &mut rejects);
    }
    outcome(
        rejects.is_empty(),
        format!("{} rejections in {runs} tester runs on 1200 valid instances{}", rejects.len(), rejects.first().map(|r| format!(" (first: {r})")).unwrap_or_default()),
    )
}

fn c3_rejection() -> Outcome {
    let t = Instant::now();
    let p = TesterParams::new(1.0 / 33.0);
    let mut rejected = 0;
    let mut invalid_witness = 0;
    for i in 0..200u64 {
        let inst = gen_bad(32768, 32, i).unwrap();
        let mut o = GraphOracle::new(&inst.graph, i);
        let v = test_combined(&mut o, &p).unwrap();
        if let Some(w) = v.witness() {
            rejected += 1;
            invalid_witness += u64::from(!w.validate(&inst.graph));
        }
    }
    let (fast, time) = within(t, Duration::from_secs(120));
    outcome(
        rejected >= 120 && invalid_witness == 0 && fast,
        format!("rejected {rejected}/200 (need >= 120), {invalid_witness} invalid witnesses, {time}"),
    )
}

fn median_queries(kind: TesterKind, n: u32, eps: f64, trials: u64, seed: u64) -> u64 {
    let p = TesterParams::new(eps);
    let mut qs: Vec<u64> = (0..trials)
        .map(|i| {
            let g = gen_random_valid(n, 3, seed + i).unwrap().graph;
            let mut o = GraphOracle::new(&g, seed + i);
            assert!(kind.run(&mut o, &p).unwrap().is_accept());
            o.query_count().total()
        })
        .collect();
    median(&mut qs)
}

fn ratios(m: &[u64]) -> Vec<f64> {
    m.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect()
}

fn c4_query_scaling() -> Outcome {
    let t = Instant::now();
    let m: Vec<u64> = [1u32 << 15, 1 << 18, 1 << 21]
        .iter()
        .map(|&n| median_queries(TesterKind::Combined, n, 0.1, 50, 40_000))
        .collect();
    let r = ratios(&m);
    let (fast, time) = within(t, Duration::from_secs(600));
    outcome(
        r.iter().all(|x| (1.3..=3.1).contains(x)) && fast,
        format!("medians {m:?}, ratios {:.3?} (need [1.3, 3.1]), {time}", r),
    )
}

fn c5_simple_scaling() -> Outcome {
    let m: Vec<u64> = [1u32 << 12, 1 << 14, 1 << 16]
        .iter()
        .map(|&n| median_queries(TesterKind::Simple, n, 0.1, 50, 50_000))
        .collect();
    let r = ratios(&m);
    let n = 1u32 << 14;
    let base = gen_path(n, 3).unwrap();
    let mut rejected = 0;
    let mut eps_seen = f64::MAX;
    for i in 0..200u64 {
        let inst = perturb(&base, n as usize / 200, ConflictType::G, i).unwrap();
        // At least `cert` edits are needed, so the instance is ε-far for ε < cert/n.
        let eps = farness_certificate(&inst) as f64 / (n as f64 + 1.0);
        eps_seen = eps_seen.min(eps);
        let mut o = GraphOracle::new(&inst.graph, i);
        let v = test_simple(&mut o, &TesterParams::new(eps)).unwrap();
        rejected += u64::from(v.witness().is_some_and(|w| w.validate(&inst.graph)));
    }
    outcome(
        r.iter().all(|x| (1.6..=2.5).contains(x)) && rejected >= 120,
        format!("medians {m:?}, ratios {r:.3?} (need [1.6, 2.5]); planted rejection {rejected}/200 at eps >= {eps_seen:.5}"),
    )
}

fn c6_sweep() -> Outcome {
    let t = Instant::now();
    let mut r = rng(6);
    let mut mismatches = 0;
    let mut found = 0;
    for i in 0..10_000u64 {
        let n = r.gen_range(2..=200);
        let g = match i % 3 {
            0 => random_graph(&mut r, n, 3, n as usize, false),
            1 => gen_random_valid(n, 4, i).unwrap().graph,
            _ => {
                let base = gen_path(n.max(60), 3).unwrap();
                perturb(&base, r.gen_range(1..=base.graph.n() as usize / 30), ConflictType::L2, i)
                    .map(|p| p.graph)
                    .unwrap_or(base.graph)
            }
        };
        let keep_v = r.gen_range(0.0..=1.0);
        let keep_e = r.gen_range(0.0..=1.0);
        let verts: Vec<(Label, Label)> = (1..=g.n())
            .filter(|_| r.gen_bool(keep_v))
            .map(|v| (g.parent_label(Label(v)), Label(v)))
            .collect();
        let edges: Vec<(Label, Label)> = g.label_edges().into_iter().filter(|_| r.gen_bool(keep_e)).collect();
        let brute = brute_interval_conflict(&verts, &edges);
        let all_edges = edges_with_tree_edges(&verts, &edges);
        match sweepline_conflicts(&verts, &edges) {
            None => mismatches += u64::from(brute),
            Some(c) => {
                found += 1;
                let ok = verts.contains(&(g.parent_label(c.v), c.v))
                    && all_edges.contains(&(c.u, c.w))
                    && g.parent_label(c.v) < c.u
                    && c.u < c.v
                    && c.v < c.w;
                mismatches += u64::from(!ok);
            }
        }
    }
    let (fast, time) = within(t, Duration::from_secs(5));
    outcome(mismatches == 0 && fast, format!("{mismatches} mismatches over 10^4 subsets ({found} conflicts found), {time}"))
}

fn c7_fix() -> Outcome {
    let mut r = rng(7);
    let (mut done, mut bad_vertex, mut bad_edge, mut bad_repair) = (0, 0, 0, 0);
    let mut worst_ratio = 0.0f64;
    while done < 500 {
        let n = r.gen_range(4..=60);
        let d = r.gen_range(3..=5);
        let g = random_graph(&mut r, n, d, n as usize * d / 2, false);
        let conflicts = g.enumerate_conflicts();
        let Some(&c) = conflicts.choose(&mut r) else { continue };
        done += 1;
        let before = conflicts.len();
        let h = g.apply_edits(&fix_vertex(&g, c.v).unwrap(), None).unwrap();
        let hc = h.enumerate_conflicts();
        if hc.len() > before || hc.iter().any(|x| x.v == c.v) {
            bad_vertex += 1;
        }
        let h = g.apply_edits(&fix_edge(&g, (c.u, c.w)).unwrap(), None).unwrap();
        let hc = h.enumerate_conflicts();
        if hc.len() > before || hc.iter().any(|x| (x.u, x.w) == (c.u, c.w)) {
            bad_edge += 1;
        }
        let rep = repair(&g).unwrap();
        let cover = greedy_cover(&g).len();
        worst_ratio = worst_ratio.max(rep.edits.len() as f64 / cover as f64);
        let applied = g.apply_edits(&rep.edits, Some(d)).map(|x| x == rep.graph).unwrap_or(false);
        if !check_by_conflicts(&rep.graph).is_accept()
            || rep.graph.max_degree() > d
            || rep.edits.len() > 5 * cover
            || !applied
        {
            bad_repair += 1;
        }
    }
    outcome(
        bad_vertex + bad_edge + bad_repair == 0,
        format!("500 invalid instances: {bad_vertex} fix_vertex, {bad_edge} fix_edge, {bad_repair} repair failures; worst edits/cover {worst_ratio:.2}"),
    )
}

fn c8_degree_reduction() -> Outcome {
    let mut failures = 0;
    let mut total_vd = 0;
    for i in 0..500u64 {
        let d = 3 + (i as usize % 6);
        let n = 20 + (i as u32 * 37) % 280;
        let g = gen_random_valid(n, d, 800 + i).unwrap().graph;
        let vd = (1..=n).filter(|&x| g.degree(VertexId(x)) == d).count();
        total_vd += vd;
        let (h, edits) = degree_reduce(&g).unwrap();
        let ok = check_by_conflicts(&h).is_accept()
            && h.max_degree() < d
            && edits.len() <= 3 * vd
            && g.apply_edits(&edits, Some(d)).map(|x| x.with_bound(d - 1).ok() == Some(h.clone())).unwrap_or(false);
        failures += u64::from(!ok);
    }
    outcome(failures == 0, format!("{failures} failures over 500 instances ({total_vd} degree-d vertices in total)"))
}

fn c9_fin() -> Outcome {
    let mut disagree = 0;
    let mut graphs = 0;
    for n in 1..=5u32 {
        for mask in 0..1u64 << (n * (n - 1) / 2) {
            let g = graph_from_mask(n, mask);
            let runs = all_dfs_runs(&g);
            disagree += u64::from(check_fin(&g).unwrap().is_accept() != runs.finish.contains(g.labels()));
            graphs += 1;
        }
    }
    let mut r = rng(9);
    let mut positives = 0;
    for _ in 0..1000 {
        let n = r.gen_range(1..=7);
        let attempts = r.gen_range(0..=2 * n as usize);
        let g = random_graph(&mut r, n, (n as usize).max(2) - 1, attempts, false);
        let runs = all_dfs_runs(&g);
        let g = if r.gen_bool(0.5) {
            let mut fins: Vec<&Vec<u32>> = runs.finish.iter().collect();
            fins.sort();
            g.relabeled(fins.choose(&mut r).unwrap()).unwrap()
        } else {
            g
        };
        let truth = runs.finish.contains(g.labels());
        positives += u64::from(truth);
        disagree += u64::from(check_fin(&g).unwrap().is_accept() != truth);
        graphs += 1;
    }
    outcome(disagree == 0, format!("{disagree} disagreements over {graphs} graphs ({positives} random FIN numberings)"))
}

fn c10_farness() -> Outcome {
    let n = 1u32 << 15;
    let count = |seg: u32| (0..100u64).filter(|&s| farness_certificate(&gen_bad(n, seg, s).unwrap()) as f64 / n as f64 >= 1.0 / 33.0).count();
    let small = count(5);
    let big = count(32);
    outcome(small >= 99, format!("N=5: {small}/100 seeds reach 1/33 (need >= 99); info: N=32 reaches it in {big}/100"))
}

fn c11_game() -> Outcome {
    let t = Instant::now();
    let n = 1u32 << 18;
    let seg = 64;
    let p = TesterParams::new(0.1);
    let low = (n as f64).powf(0.25).floor() as u64;
    let full = p.combined_budget(n, 3);
    let a = distinguisher_game(TesterKind::Combined, &p, n, seg, low, 1000, 11).unwrap();
    let b = distinguisher_game(TesterKind::Combined, &p, n, seg, full, 1000, 12).unwrap();
    outcome(
        a.rate <= 0.6 && b.rate >= 0.75,
        format!(
            "budget {low}: success {:.3} [{:.3}, {:.3}] (need <= 0.6); budget {full}: success {:.3} [{:.3}, {:.3}] (need >= 0.75); {:.0}s",
            a.rate, a.wilson.0, a.wilson.1, b.rate, b.wilson.0, b.wilson.1, t.elapsed().as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("characterization equivalence", c1_characterization),
        ("one-sided error", c2_one_sided),
        ("rejection probability", c3_rejection),
        ("combined query scaling", c4_query_scaling),
        ("simple tester scaling and rejection", c5_simple_scaling),
        ("sweep-line correctness", c6_sweep),
        ("fix operations and repair", c7_fix),
        ("degree reduction", c8_degree_reduction),
        ("FIN correspondence", c9_fin),
        ("farness certificate", c10_farness),
        ("lower-bound demonstration", c11_game),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if res.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {} ({:.1}s)", i + 1, res.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!res.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
