//! Command-line harness: graph files, generators, checkers, testers,
//! benchmarks and the distinguisher game.

pub mod bench;
pub mod format;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use dfs_certify::gadgets::{game_trial, GameTrial};
use dfs_certify::{
    check_by_conflicts, check_by_simulation, gen_bad, gen_good, gen_path, gen_random_valid,
    gen_random_valid_directed, perturb, reverse_numbering, ConflictType, GraphOracle, Instance,
    LabeledGraph, Oracle, ReversedOracle, TesterKind, TesterParams, Verdict,
};
use rayon::prelude::*;

pub use bench::{emit_csv, BenchRecord};
pub use format::{parse_graph, write_graph, FormatError};

#[derive(Parser, Debug)]
#[command(name = "dfs-certify", version, about = "Check and test DFS numberings of bounded-degree graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenFamily {
    Good,
    Bad,
    Random,
    Perturbed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Conflicts,
    Simulation,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    L1,
    L2,
    L3,
    G,
}

impl From<Kind> for ConflictType {
    fn from(k: Kind) -> Self {
        match k {
            Kind::L1 => ConflictType::L1,
            Kind::L2 => ConflictType::L2,
            Kind::L3 => ConflictType::L3,
            Kind::G => ConflictType::G,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BenchFamily {
    Random,
    Good,
    Bad,
}

fn tester_arg(s: &str) -> Result<TesterKind, String> {
    TesterKind::parse(s).ok_or_else(|| format!("unknown tester `{s}`"))
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an instance and write it as a graph file.
    Gen {
        family: GenFamily,
        #[arg(long)]
        n: u32,
        /// Segment length of the arm families.
        #[arg(long = "N")]
        seg: Option<u32>,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random family only: generate a directed graph.
        #[arg(long)]
        directed: bool,
        /// Perturbed family: number of conflicts planted on a path (default n/1000).
        #[arg(long)]
        k: Option<usize>,
        /// Perturbed family: type of planted conflicts.
        #[arg(long, value_enum, default_value_t = Kind::G)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide validity exactly.
    Check {
        file: PathBuf,
        #[arg(long)]
        fin: bool,
        #[arg(long, value_enum, default_value_t = Mode::Conflicts)]
        mode: Mode,
    },
    /// Run a sublinear tester through a query-counting oracle.
    Test {
        file: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_parser = tester_arg, default_value = "combined")]
        tester: TesterKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long)]
        fin: bool,
    },
    /// Run a tester over generated instances and emit one CSV row per trial.
    Bench {
        #[arg(long, value_parser = tester_arg, default_value = "combined")]
        tester: TesterKind,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_enum, default_value_t = BenchFamily::Random)]
        family: BenchFamily,
        /// Segment length for the arm families (default ⌊n^{1/3}⌋).
        #[arg(long = "N")]
        seg: Option<u32>,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Play the good-versus-bad distinguishing game under a query budget.
    Game {
        #[arg(long)]
        n: u32,
        #[arg(long = "N")]
        seg: Option<u32>,
        /// Query budget, or `full` for the combined tester's nominal budget.
        #[arg(long, default_value = "full")]
        budget: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = tester_arg, default_value = "combined")]
        tester: TesterKind,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// `⌊n^{1/3}⌋`, exactly.
pub fn cube_root_floor(n: u32) -> u32 {
    let mut r = (n as f64).cbrt() as u32;
    while (r as u64 + 1).pow(3) <= n as u64 {
        r += 1;
    }
    while r as u64 * r as u64 * r as u64 > n as u64 {
        r -= 1;
    }
    r
}

pub fn read_graph_file(path: &Path) -> anyhow::Result<LabeledGraph> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_graph(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

pub fn write_graph_file(g: &LabeledGraph, path: &Path) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_graph(g, BufWriter::new(f))?;
    Ok(())
}

/// Sizes the global worker pool from `DFS_CERTIFY_THREADS`.
pub fn init_threads() {
    if let Some(k) = std::env::var("DFS_CERTIFY_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // A second initialization (as in tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
}

#[allow(clippy::too_many_arguments)]
pub fn generate(
    family: GenFamily,
    n: u32,
    seg: Option<u32>,
    d: usize,
    seed: u64,
    directed: bool,
    k: Option<usize>,
    kind: Kind,
) -> anyhow::Result<Instance> {
    let seg = seg.unwrap_or_else(|| cube_root_floor(n).max(1));
    Ok(match family {
        GenFamily::Good => gen_good(n, seg, seed)?,
        GenFamily::Bad => gen_bad(n, seg, seed)?,
        GenFamily::Random if directed => gen_random_valid_directed(n, d, seed)?,
        GenFamily::Random => gen_random_valid(n, d, seed)?,
        GenFamily::Perturbed => {
            // Planting needs long stretches without descendant edges.
            let base = gen_path(n, d)?;
            let k = k.unwrap_or((n as usize / 1000).max(1));
            perturb(&base, k, kind.into(), seed)?
        }
    })
}

fn print_verdict(out: &mut impl Write, v: &Verdict) -> anyhow::Result<i32> {
    writeln!(out, "{v}")?;
    Ok(if v.is_accept() { 0 } else { 1 })
}

/// Runs one tester on `g` exactly as `test` does.
pub fn run_tester(
    g: &LabeledGraph,
    tester: TesterKind,
    params: &TesterParams,
    fin: bool,
) -> anyhow::Result<(Verdict, dfs_certify::QueryCounter)> {
    let mut o = GraphOracle::new(g, params.seed);
    let v = if fin {
        if g.is_directed() {
            bail!("FIN testing is defined for undirected graphs only");
        }
        let mut r = ReversedOracle::new(&mut o);
        tester.run(&mut r, params)?
    } else {
        tester.run(&mut o, params)?
    };
    Ok((v, o.query_count()))
}

fn execute(cmd: Command, out: &mut impl Write) -> anyhow::Result<i32> {
    match cmd {
        Command::Gen { family, n, seg, d, seed, directed, k, kind, out: path } => {
            let inst = generate(family, n, seg, d, seed, directed, k, kind)?;
            write_graph_file(&inst.graph, &path)?;
            writeln!(out, "wrote {} (n={}, edges={})", path.display(), n, inst.graph.edge_count())?;
            Ok(0)
        }
        Command::Check { file, fin, mode } => {
            let g = read_graph_file(&file)?;
            let g = if fin { reverse_numbering(&g)? } else { g };
            let v = match mode {
                Mode::Conflicts => check_by_conflicts(&g),
                Mode::Simulation => check_by_simulation(&g),
                Mode::Both => {
                    let a = check_by_conflicts(&g);
                    let b = check_by_simulation(&g);
                    if a.is_accept() != b.is_accept() {
                        bail!("checkers disagree: conflicts says `{a}`, simulation says `{b}`");
                    }
                    a
                }
            };
            print_verdict(out, &v)
        }
        Command::Test { file, eps, tester, seed, ell, fin } => {
            let g = read_graph_file(&file)?;
            let mut p = TesterParams::new(eps).with_seed(seed);
            p.ell = ell;
            let (v, q) = run_tester(&g, tester, &p, fin)?;
            writeln!(out, "queries neighbor={} label={}", q.neighbor_queries, q.label_queries)?;
            print_verdict(out, &v)
        }
        Command::Bench { tester, sizes, trials, eps, seed, d, family, seg, csv } => {
            let recs = bench::run_bench(tester, &sizes, trials, eps, seed, d, family, seg)?;
            let f = File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
            emit_csv(&recs, BufWriter::new(f))?;
            for n in &sizes {
                let mut q: Vec<u64> = recs
                    .iter()
                    .filter(|r| r.n == *n)
                    .map(|r| r.neighbor_queries + r.label_queries)
                    .collect();
                q.sort_unstable();
                let rejects = recs.iter().filter(|r| r.n == *n && r.verdict == "reject").count();
                if !q.is_empty() {
                    writeln!(out, "n={n} median_queries={} rejects={rejects}/{}", q[q.len() / 2], q.len())?;
                }
            }
            Ok(0)
        }
        Command::Game { n, seg, budget, trials, seed, tester, eps, csv } => {
            let seg = seg.unwrap_or_else(|| cube_root_floor(n));
            let p = TesterParams::new(eps);
            p.validate()?;
            let budget = match budget.as_str() {
                "full" => p.combined_budget(n, 3),
                s => s.parse().with_context(|| format!("bad budget `{s}`"))?,
            };
            let rows: Vec<GameTrial> = (0..trials)
                .into_par_iter()
                .map(|i| game_trial(tester, &p, n, seg, budget, seed, i))
                .collect::<Result<_, _>>()?;
            let wins = rows.iter().filter(|t| t.bad == t.rejected).count() as u64;
            let (lo, hi) = dfs_certify::wilson_interval(wins, trials);
            if let Some(path) = csv {
                bench::emit_game_csv(&rows, seed, budget, File::create(&path)?)?;
            }
            writeln!(
                out,
                "budget={budget} trials={trials} success={:.4} wilson95=[{lo:.4}, {hi:.4}]",
                if trials == 0 { 0.0 } else { wins as f64 / trials as f64 }
            )?;
            Ok(0)
        }
    }
}

/// Parses `argv` (including the program name) and runs it. Returns the exit
/// code: 0 accept or success, 1 reject, 2 usage or input error.
pub fn run_cli<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}
