//! Instance generators: the good/bad arm families, random valid graphs,
//! planted conflicts, farness certificates and the distinguisher game.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{
    conflict_matching, conflict_types, ConflictType, ConflictingPair, GraphError, Label,
    LabeledGraph, VertexId,
};
use crate::navigator::default_ell;
use crate::oracle::GraphOracle;
use crate::tester::{TesterKind, TesterParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("n = {n} is below the minimum {min} for segment length {seg}")]
    TooSmall { n: u32, seg: u32, min: u64 },
    #[error("segment length must be positive")]
    ZeroSegment,
    #[error("degree bound {0} is below 2")]
    DegreeTooSmall(usize),
    #[error("planted {planted} of {requested} conflicts")]
    CannotPlant { planted: usize, requested: usize },
    #[error("k = {k} exceeds n / 10")]
    TooManyEdits { k: usize },
    #[error("perturb needs a valid undirected input")]
    InvalidInput,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Good,
    Bad,
    RandomValid,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArmType {
    G1,
    G2,
    B1,
    B2,
}

/// One of the eight `N`-vertex segments of an arm.
///
/// Segment `i` holds relative labels `iN+1 ..= (i+1)N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// Ascending path whose first vertex hangs off relative label `attach`
    /// (0 for the arm root's segment).
    Path { attach: u32 },
    /// Teeth matched in reverse to segment `base`: `base·N+k ~ (i+1)N-k+1`.
    Teeth { base: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmSpec {
    pub segments: [Segment; 8],
}

impl ArmSpec {
    pub fn of(t: ArmType, seg: u32) -> Self {
        let path = |i: u32| Segment::Path { attach: i * seg };
        let (s6, s7) = match t {
            ArmType::G1 => (Segment::Teeth { base: 2 }, Segment::Path { attach: seg }),
            ArmType::G2 => (path(6), Segment::Teeth { base: 4 }),
            ArmType::B1 => (path(6), Segment::Path { attach: seg }),
            ArmType::B2 => (Segment::Teeth { base: 2 }, Segment::Teeth { base: 4 }),
        };
        Self { segments: [path(0), path(1), path(2), path(3), path(4), path(5), s6, s7] }
    }

    /// Edges over relative labels `1..=8N`.
    pub fn edges(&self, seg: u32) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(8 * seg as usize);
        for (i, s) in self.segments.iter().enumerate() {
            let lo = i as u32 * seg + 1;
            let hi = (i as u32 + 1) * seg;
            match *s {
                Segment::Path { attach } => {
                    if attach != 0 {
                        out.push((attach, lo));
                    }
                    out.extend((lo..hi).map(|a| (a, a + 1)));
                }
                Segment::Teeth { base } => {
                    out.extend((1..=seg).map(|k| (base * seg + k, hi - k + 1)));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: LabeledGraph,
    pub family: Family,
    pub seed: u64,
    /// Segment length `N` (0 outside the arm families).
    pub seg: u32,
    pub arms: Vec<ArmType>,
    /// Label of each arm root minus one.
    pub arm_offsets: Vec<u32>,
    /// Whether the last arm lost its final vertex to fit `n`.
    pub truncated: bool,
    pub planted: Vec<ConflictingPair>,
}

impl Instance {
    fn plain(graph: LabeledGraph, family: Family, seed: u64) -> Self {
        Self {
            graph,
            family,
            seed,
            seg: 0,
            arms: Vec::new(),
            arm_offsets: Vec::new(),
            truncated: false,
            planted: Vec::new(),
        }
    }

    fn arm_len(&self, i: usize) -> u32 {
        if self.truncated && i + 1 == self.arms.len() {
            8 * self.seg - 1
        } else {
            8 * self.seg
        }
    }

    /// The disjoint quadruples `⟨p1, c1, p2, c2⟩` of every B2 arm.
    pub fn quadruples(&self) -> Vec<[Label; 4]> {
        let n = self.seg;
        let mut out = Vec::new();
        for (i, (&t, &off)) in self.arms.iter().zip(&self.arm_offsets).enumerate() {
            if t != ArmType::B2 {
                continue;
            }
            for k in 1..=n {
                let q = [2 * n + k, 7 * n - k + 1, 4 * n + k, 8 * n - k + 1];
                if q[3] <= self.arm_len(i) {
                    out.push(q.map(|x| Label(off + x)));
                }
            }
        }
        out
    }
}

/// Arm count, leftover path length and truncation for `n` and `N`.
fn layout(n: u32, seg: u32) -> Result<(u32, u32, bool), GadgetError> {
    if seg == 0 {
        return Err(GadgetError::ZeroSegment);
    }
    let min = 16 * seg as u64;
    if (n as u64) < min {
        return Err(GadgetError::TooSmall { n, seg, min });
    }
    let unit = 8 * seg as u64 + 1;
    let arms = (((n as u64 + 1) / unit) as u32).max(2);
    let total = unit * arms as u64 - 1;
    if total > n as u64 {
        Ok((arms, 0, true))
    } else {
        Ok((arms, (n as u64 - total) as u32, false))
    }
}

/// Builds the arm family with the given arm types (one per arm, in label
/// order). The arm count must match the layout of `n` and `seg`.
pub fn gen_with_arms(
    n: u32,
    seg: u32,
    arms: &[ArmType],
    seed: u64,
) -> Result<Instance, GadgetError> {
    let (count, leftover, truncated) = layout(n, seg)?;
    assert_eq!(arms.len(), count as usize, "arm count for n={n}, N={seg}");
    let arm_size = 8 * seg;
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(n as usize + arms.len() * seg as usize);
    let mut offsets = Vec::with_capacity(arms.len());
    let mut next = 1u32;
    // Pre-order over a balanced binary tree whose leaves are the arm roots.
    let mut stack: Vec<(u32, u32, u32)> = vec![(0, count, 0)];
    while let Some((first, len, parent)) = stack.pop() {
        if parent != 0 {
            edges.push((parent, next));
        }
        if len == 1 {
            let i = first as usize;
            let off = next - 1;
            let size = if truncated && i + 1 == arms.len() { arm_size - 1 } else { arm_size };
            for (a, b) in ArmSpec::of(arms[i], seg).edges(seg) {
                if a <= size && b <= size {
                    edges.push((off + a, off + b));
                }
            }
            offsets.push(off);
            next += size;
        } else {
            let me = next;
            next += 1;
            let left = len.div_ceil(2);
            stack.push((first + left, len - left, me));
            stack.push((first, left, me));
        }
    }
    if leftover > 0 {
        edges.push((1, next));
        edges.extend((next..n).map(|a| (a, a + 1)));
    }
    let graph = LabeledGraph::identity(n, 3, &edges)?;
    let family = if arms.iter().all(|t| matches!(t, ArmType::G1 | ArmType::G2)) {
        Family::Good
    } else {
        Family::Bad
    };
    Ok(Instance {
        graph,
        family,
        seed,
        seg,
        arms: arms.to_vec(),
        arm_offsets: offsets,
        truncated,
        planted: Vec::new(),
    })
}

fn coin_arms(n: u32, seg: u32, seed: u64, a: ArmType, b: ArmType) -> Result<Vec<ArmType>, GadgetError> {
    let (count, _, _) = layout(n, seg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| if rng.gen_bool(0.5) { a } else { b }).collect())
}

/// Valid member of the good family: each arm is G1 or G2 by a fair coin.
pub fn gen_good(n: u32, seg: u32, seed: u64) -> Result<Instance, GadgetError> {
    let arms = coin_arms(n, seg, seed, ArmType::G1, ArmType::G2)?;
    gen_with_arms(n, seg, &arms, seed)
}

/// Member of the bad family: each arm is B1 or B2 by a fair coin.
pub fn gen_bad(n: u32, seg: u32, seed: u64) -> Result<Instance, GadgetError> {
    let arms = coin_arms(n, seg, seed, ArmType::B1, ArmType::B2)?;
    gen_with_arms(n, seg, &arms, seed)
}

/// Random edges under degree bound `d`, one attempt per slot pair.
fn random_edges(n: u32, d: usize, rng: &mut ChaCha8Rng, directed: bool) -> Vec<(u32, u32)> {
    let mut out_deg = vec![0u8; n as usize + 1];
    let mut in_deg = vec![0u8; n as usize + 1];
    let mut adj = vec![0u32; (n as usize + 1) * d];
    let mut edges = Vec::new();
    if n < 2 {
        return edges;
    }
    let attempts = n as usize * d / 2;
    for _ in 0..attempts {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a == b || out_deg[a as usize] as usize >= d {
            continue;
        }
        let (ins, ins_b) = if directed { (&in_deg, b) } else { (&out_deg, b) };
        if ins[ins_b as usize] as usize >= d {
            continue;
        }
        let row = &adj[a as usize * d..a as usize * d + out_deg[a as usize] as usize];
        if row.contains(&b) {
            continue;
        }
        if directed {
            adj[a as usize * d + out_deg[a as usize] as usize] = b;
            out_deg[a as usize] += 1;
            in_deg[b as usize] += 1;
        } else {
            let rb = &adj[b as usize * d..b as usize * d + out_deg[b as usize] as usize];
            if rb.contains(&a) {
                continue;
            }
            adj[a as usize * d + out_deg[a as usize] as usize] = b;
            adj[b as usize * d + out_deg[b as usize] as usize] = a;
            out_deg[a as usize] += 1;
            out_deg[b as usize] += 1;
        }
        edges.push((a, b));
    }
    edges
}

/// Labels from one seeded DFS run: random root order, random neighbor order.
fn dfs_labels(g: &LabeledGraph, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = g.n() as usize;
    let mut label = vec![0u32; n];
    let mut roots: Vec<u32> = (1..=n as u32).collect();
    roots.shuffle(rng);
    let mut next = 1u32;
    let mut stack: Vec<(VertexId, Vec<VertexId>)> = Vec::new();
    for r in roots {
        let r = VertexId(r);
        if label[r.index()] != 0 {
            continue;
        }
        label[r.index()] = next;
        next += 1;
        let mut nb = g.neighbors(r).to_vec();
        nb.shuffle(rng);
        stack.push((r, nb));
        while let Some((_, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(y) if label[y.index()] == 0 => {
                    label[y.index()] = next;
                    next += 1;
                    let mut nb = g.neighbors(y).to_vec();
                    nb.shuffle(rng);
                    stack.push((y, nb));
                }
                Some(_) => {}
                None => {
                    stack.pop();
                }
            }
        }
    }
    label
}

fn random_valid(n: u32, d: usize, seed: u64, directed: bool) -> Result<Instance, GadgetError> {
    if d < 2 {
        return Err(GadgetError::DegreeTooSmall(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = random_edges(n, d, &mut rng, directed);
    let ids: Vec<u32> = (1..=n).collect();
    let g = LabeledGraph::build(n, d, &edges, &ids, directed)?;
    let labels = dfs_labels(&g, &mut rng);
    Ok(Instance::plain(g.relabeled(&labels)?, Family::RandomValid, seed))
}

/// Random graph of maximum degree `d` labeled by an actual DFS run.
pub fn gen_random_valid(n: u32, d: usize, seed: u64) -> Result<Instance, GadgetError> {
    random_valid(n, d, seed, false)
}

/// Directed variant: in- and out-degree at most `d`, labeled by a DFS run
/// following out-arcs.
pub fn gen_random_valid_directed(n: u32, d: usize, seed: u64) -> Result<Instance, GadgetError> {
    random_valid(n, d, seed, true)
}

/// Path `1 - 2 - ... - n` with identity labels and degree bound `d`.
pub fn gen_path(n: u32, d: usize) -> Result<Instance, GadgetError> {
    let edges: Vec<(u32, u32)> = (1..n).map(|a| (a, a + 1)).collect();
    Ok(Instance::plain(LabeledGraph::identity(n, d, &edges)?, Family::RandomValid, 0))
}

/// Point-update range-query tree over labels `1..=n`.
struct SegTree {
    size: usize,
    data: Vec<u32>,
    identity: u32,
    op: fn(u32, u32) -> u32,
}

impl SegTree {
    fn new(values: &[u32], identity: u32, op: fn(u32, u32) -> u32) -> Self {
        let size = values.len().next_power_of_two();
        let mut data = vec![identity; 2 * size];
        data[size..size + values.len()].copy_from_slice(values);
        for i in (1..size).rev() {
            data[i] = op(data[2 * i], data[2 * i + 1]);
        }
        Self { size, data, identity, op }
    }

    fn set(&mut self, i: usize, v: u32) {
        let mut i = i + self.size;
        self.data[i] = v;
        while i > 1 {
            i /= 2;
            self.data[i] = (self.op)(self.data[2 * i], self.data[2 * i + 1]);
        }
    }

    /// Fold over `lo..hi`.
    fn query(&self, lo: usize, hi: usize) -> u32 {
        let (mut l, mut r) = (lo + self.size, hi + self.size);
        let mut acc = self.identity;
        while l < r {
            if l & 1 == 1 {
                acc = (self.op)(acc, self.data[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                acc = (self.op)(acc, self.data[r]);
            }
            l /= 2;
            r /= 2;
        }
        acc
    }
}

/// Plants `k` pairwise disjoint conflicts of the given type.
///
/// Each plant picks labels `x < u < v < w` where `v` has a single lower
/// neighbor `q`, then replaces `{q, v}` by `{x, v}` and adds `{u, w}`. The
/// range checks guarantee that exactly one new conflict, `(v, {u, w})`,
/// appears. Gaps are drawn at most `ℓ` for the requested local type and
/// in `(ℓ, 3ℓ]` otherwise, with `ℓ = ⌈n^{1/3}⌉`.
pub fn perturb(
    inst: &Instance,
    k: usize,
    kind: ConflictType,
    seed: u64,
) -> Result<Instance, GadgetError> {
    let g = &inst.graph;
    let n = g.n();
    if k as u64 * 10 > n as u64 {
        return Err(GadgetError::TooManyEdits { k });
    }
    if g.is_directed() || g.has_conflict() {
        return Err(GadgetError::InvalidInput);
    }
    let nn = n as usize;
    let d = g.d();
    let ell = default_ell(n);
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nn + 1];
    for (a, b) in g.label_edges() {
        adj[a.0 as usize].push(b.0);
        adj[b.0 as usize].push(a.0);
    }
    let p_of = |adj: &Vec<Vec<u32>>, v: u32| adj[v as usize].iter().copied().filter(|&y| y < v).max().unwrap_or(0);
    let max_of = |adj: &Vec<Vec<u32>>, v: u32| adj[v as usize].iter().copied().max().unwrap_or(0);
    let mut ps: Vec<u32> = (0..=n).map(|v| if v == 0 { u32::MAX } else { p_of(&adj, v) }).collect();
    let mut mx: Vec<u32> = (0..=n).map(|v| if v == 0 { 0 } else { max_of(&adj, v) }).collect();
    let mut min_p = SegTree::new(&ps, u32::MAX, |a, b| a.min(b));
    let mut max_nb = SegTree::new(&mx, 0, |a, b| a.max(b));
    let mut used = vec![false; nn + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = Vec::with_capacity(k);
    let gap = |rng: &mut ChaCha8Rng, small: bool| {
        if small {
            rng.gen_range(1..=ell)
        } else {
            rng.gen_range(ell + 1..=3 * ell)
        }
    };
    let budget = 200 * k + 10_000;
    for _ in 0..budget {
        if planted.len() == k {
            break;
        }
        let small = match kind {
            ConflictType::L1 => [true, false, false],
            ConflictType::L2 => [false, true, false],
            ConflictType::L3 => [false, false, true],
            ConflictType::G => [false, false, false],
        };
        let (g1, g2, g3) = (gap(&mut rng, small[0]), gap(&mut rng, small[1]), gap(&mut rng, small[2]));
        let v = rng.gen_range(1..=n);
        let (Some(u), Some(w)) = (v.checked_sub(g2), v.checked_add(g3)) else { continue };
        let Some(x) = u.checked_sub(g1) else { continue };
        if x == 0 || w > n {
            continue;
        }
        let q = ps[v as usize];
        let lower = adj[v as usize].iter().filter(|&&y| y < v).count();
        if lower != 1 || q == x || [x, u, v, w, q].iter().any(|&a| used[a as usize]) {
            continue;
        }
        if [x, u, w].iter().any(|&a| adj[a as usize].len() >= d) || adj[u as usize].contains(&w) {
            continue;
        }
        if ps[w as usize] <= u {
            continue;
        }
        let (xs, us, vs, ws) = (x as usize, u as usize, v as usize, w as usize);
        let ok_a = max_nb.query(xs + 1, vs) <= v;
        let ok_b = min_p.query(xs + 1, vs) >= x;
        let ok_c = min_p.query(us + 1, vs) >= u && min_p.query(vs + 1, ws) >= u;
        if !(ok_a && ok_b && ok_c) {
            continue;
        }
        adj[vs].retain(|&y| y != q);
        adj[q as usize].retain(|&y| y != v);
        adj[vs].push(x);
        adj[xs].push(v);
        adj[us].push(w);
        adj[ws].push(u);
        for a in [x, u, v, w, q] {
            used[a as usize] = true;
            ps[a as usize] = p_of(&adj, a);
            mx[a as usize] = max_of(&adj, a);
            min_p.set(a as usize, ps[a as usize]);
            max_nb.set(a as usize, mx[a as usize]);
        }
        planted.push(ConflictingPair { v: Label(v), u: Label(u), w: Label(w) });
    }
    if planted.len() < k {
        return Err(GadgetError::CannotPlant { planted: planted.len(), requested: k });
    }
    let edges: Vec<(u32, u32)> = adj
        .iter()
        .enumerate()
        .flat_map(|(a, row)| row.iter().filter(move |&&b| b > a as u32).map(move |&b| (a as u32, b)))
        .collect();
    let graph = LabeledGraph::from_label_edges(n, d, &edges, g.labels(), false)?;
    planted.sort();
    let mut out = inst.clone();
    out.graph = graph;
    out.family = Family::Perturbed;
    out.seed = seed;
    out.planted = planted;
    Ok(out)
}

/// Classifies a conflict with `ℓ = ⌈n^{1/3}⌉` on the instance's graph.
pub fn classify(g: &LabeledGraph, c: &ConflictingPair) -> Vec<ConflictType> {
    conflict_types(c, g.parent_label(c.v), default_ell(g.n()))
}

/// Certified lower bound on the edits needed to reach a valid numbering.
///
/// A maximum conflict matching of size `M` needs `⌈M/3⌉` edits; each B2
/// arm with `q` disjoint quadruples needs `⌈q/2⌉` more.
pub fn farness_certificate(inst: &Instance) -> u64 {
    let m = conflict_matching(&inst.graph).len() as u64;
    let mut per_arm = std::collections::BTreeMap::<usize, u64>::new();
    let quads = inst.quadruples();
    // Quadruples of one arm share its offset.
    for q in &quads {
        let arm = inst.arm_offsets.partition_point(|&o| o < q[0].0) - 1;
        *per_arm.entry(arm).or_default() += 1;
    }
    let quad: u64 = per_arm.values().map(|&q| q.div_ceil(2)).sum();
    m.div_ceil(3).max(quad)
}

/// Empirical success of a tester at telling the two families apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameReport {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    /// 95% Wilson score interval.
    pub wilson: (f64, f64),
}

/// 95% Wilson score interval for `s` successes out of `m`.
pub fn wilson_interval(s: u64, m: u64) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let (m, p) = (m as f64, s as f64 / m as f64);
    let denom = 1.0 + z * z / m;
    let center = (p + z * z / (2.0 * m)) / denom;
    let half = z * (p * (1.0 - p) / m + z * z / (4.0 * m * m)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One game trial: the hidden bit, the guess, and the queries spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameTrial {
    pub bad: bool,
    pub rejected: bool,
    pub queries: u64,
}

/// Trial `i` of the game: draw the bit, build the instance, hide ids behind
/// a uniform permutation and run the tester under a hard budget.
pub fn game_trial(
    tester: TesterKind,
    params: &TesterParams,
    n: u32,
    seg: u32,
    budget: u64,
    seed: u64,
    i: u64,
) -> Result<GameTrial, GadgetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let bad = rng.gen_bool(0.5);
    let inst_seed = rng.next_u64();
    let inst = if bad { gen_bad(n, seg, inst_seed)? } else { gen_good(n, seg, inst_seed)? };
    let mut perm: Vec<u32> = (1..=n).collect();
    perm.shuffle(&mut rng);
    let mut o = GraphOracle::new(&inst.graph, rng.next_u64())
        .with_budget(budget)
        .with_id_permutation(perm);
    let rejected = !tester.run(&mut o, params).map(|v| v.is_accept()).unwrap_or(true);
    let queries = crate::oracle::Oracle::query_count(&o).total();
    Ok(GameTrial { bad, rejected, queries })
}

/// Runs `trials` independent game trials in parallel. The guess is "bad"
/// iff the tester rejects.
pub fn distinguisher_game(
    tester: TesterKind,
    params: &TesterParams,
    n: u32,
    seg: u32,
    budget: u64,
    trials: u64,
    seed: u64,
) -> Result<GameReport, GadgetError> {
    layout(n, seg)?;
    let results: Result<Vec<GameTrial>, GadgetError> = (0..trials)
        .into_par_iter()
        .map(|i| game_trial(tester, params, n, seg, budget, seed, i))
        .collect();
    let successes = results?.iter().filter(|t| t.bad == t.rejected).count() as u64;
    Ok(GameReport {
        trials,
        successes,
        rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        wilson: wilson_interval(successes, trials),
    })
}
