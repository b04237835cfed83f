//! Benchmark trials and their CSV rows.

use std::io::Write;
use std::time::Instant;

use dfs_certify::gadgets::GameTrial;
use dfs_certify::{gen_bad, gen_good, gen_random_valid, Oracle, TesterKind, TesterParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::{cube_root_floor, BenchFamily};

/// One tester run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub n: u32,
    pub d: usize,
    pub epsilon: f64,
    pub ell: u32,
    pub tester: String,
    pub seed: u64,
    pub verdict: String,
    pub neighbor_queries: u64,
    pub label_queries: u64,
    pub wall_time_ms: f64,
    pub witness: Option<String>,
}

pub fn emit_csv<W: Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record([
            "n",
            "d",
            "epsilon",
            "ell",
            "tester",
            "seed",
            "verdict",
            "neighbor_queries",
            "label_queries",
            "wall_time_ms",
            "witness",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GameRow {
    trial: u64,
    seed: u64,
    budget: u64,
    bad: bool,
    rejected: bool,
    queries: u64,
}

pub fn emit_game_csv<W: Write>(rows: &[GameTrial], seed: u64, budget: u64, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, t) in rows.iter().enumerate() {
        w.serialize(GameRow {
            trial: i as u64,
            seed,
            budget,
            bad: t.bad,
            rejected: t.rejected,
            queries: t.queries,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the tester once on the instance of family `family` for `(n, seed)`.
pub fn bench_one(
    tester: TesterKind,
    n: u32,
    eps: f64,
    seed: u64,
    d: usize,
    family: BenchFamily,
    seg: Option<u32>,
) -> anyhow::Result<BenchRecord> {
    let seg = seg.unwrap_or_else(|| cube_root_floor(n).max(1));
    let inst = match family {
        BenchFamily::Random => gen_random_valid(n, d, seed)?,
        BenchFamily::Good => gen_good(n, seg, seed)?,
        BenchFamily::Bad => gen_bad(n, seg, seed)?,
    };
    let g = &inst.graph;
    let params = TesterParams::new(eps).with_seed(seed);
    let start = Instant::now();
    let mut o = dfs_certify::GraphOracle::new(g, seed);
    let verdict = tester.run(&mut o, &params)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let q = o.query_count();
    Ok(BenchRecord {
        n,
        d: g.d(),
        epsilon: eps,
        ell: params.ell_for(n),
        tester: tester.name().to_string(),
        seed,
        verdict: if verdict.is_accept() { "accept" } else { "reject" }.to_string(),
        neighbor_queries: q.neighbor_queries,
        label_queries: q.label_queries,
        wall_time_ms,
        witness: verdict.witness().map(|w| w.to_string()),
    })
}

/// `trials` runs per size with seeds `seed, seed + 1, ...`, sorted by
/// `(n, seed)`.
#[allow(clippy::too_many_arguments)]
pub fn run_bench(
    tester: TesterKind,
    sizes: &[u32],
    trials: u64,
    eps: f64,
    seed: u64,
    d: usize,
    family: BenchFamily,
    seg: Option<u32>,
) -> anyhow::Result<Vec<BenchRecord>> {
    let jobs: Vec<(u32, u64)> =
        sizes.iter().flat_map(|&n| (0..trials).map(move |t| (n, seed.wrapping_add(t)))).collect();
    let mut recs = jobs
        .into_par_iter()
        .map(|(n, s)| bench_one(tester, n, eps, s, d, family, seg))
        .collect::<anyhow::Result<Vec<_>>>()?;
    recs.sort_by_key(|r| (r.n, r.seed));
    Ok(recs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_and_row_count() {
        let mut buf = Vec::new();
        emit_csv(&[], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "n,d,epsilon,ell,tester,seed,verdict,neighbor_queries,label_queries,wall_time_ms,witness\n");
        let recs = run_bench(TesterKind::L1, &[500], 3, 0.2, 1, 3, BenchFamily::Random, None).unwrap();
        let mut buf = Vec::new();
        emit_csv(&recs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn counts_replay() {
        let r = bench_one(TesterKind::Combined, 2000, 0.2, 5, 3, BenchFamily::Random, None).unwrap();
        let again = bench_one(TesterKind::Combined, 2000, 0.2, 5, 3, BenchFamily::Random, None).unwrap();
        assert_eq!((r.neighbor_queries, r.label_queries), (again.neighbor_queries, again.label_queries));
        assert_eq!(r.verdict, "accept");
    }
}
