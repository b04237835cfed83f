//! Brute-force oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use dfs_certify::{ConflictingPair, Label, LabeledGraph};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random graph on `n` vertices with up to `attempts` random edges under
/// degree bound `d` and a uniformly random labeling.
pub fn random_graph<R: Rng>(rng: &mut R, n: u32, d: usize, attempts: usize, directed: bool) -> LabeledGraph {
    let mut out_deg = vec![0usize; n as usize + 1];
    let mut in_deg = vec![0usize; n as usize + 1];
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for _ in 0..attempts {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        let key = if directed { (a, b) } else { (a.min(b), a.max(b)) };
        if a == b || seen.contains(&key) {
            continue;
        }
        let ok = if directed {
            out_deg[a as usize] < d && in_deg[b as usize] < d
        } else {
            out_deg[a as usize] < d && out_deg[b as usize] < d
        };
        if !ok {
            continue;
        }
        seen.insert(key);
        out_deg[a as usize] += 1;
        if directed {
            in_deg[b as usize] += 1;
        } else {
            out_deg[b as usize] += 1;
        }
        edges.push((a, b));
    }
    let mut labels: Vec<u32> = (1..=n).collect();
    labels.shuffle(rng);
    LabeledGraph::build(n, d, &edges, &labels, directed).unwrap()
}

/// Undirected graph on `1..=n` with identity labels from an edge bitmask
/// over the pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn graph_from_mask(n: u32, mask: u64) -> LabeledGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 1..=n {
        for j in i + 1..=n {
            if mask >> bit & 1 == 1 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    LabeledGraph::identity(n, (n as usize - 1).max(1), &edges).unwrap()
}

/// Label adjacency computed straight from the vertex adjacency.
fn label_adjacency(g: &LabeledGraph) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let n = g.n() as usize;
    let mut out = vec![Vec::new(); n + 1];
    let mut inn = vec![Vec::new(); n + 1];
    for (a, b) in g.edges() {
        let (la, lb) = (g.label(a).0, g.label(b).0);
        out[la as usize].push(lb);
        inn[lb as usize].push(la);
        if !g.is_directed() {
            out[lb as usize].push(la);
            inn[la as usize].push(lb);
        }
    }
    (out, inn)
}

/// Every `(v, {u, w})` with `p(v) < u < v < w`, by exhaustive search.
pub fn brute_conflicts(g: &LabeledGraph) -> BTreeSet<ConflictingPair> {
    let (out, inn) = label_adjacency(g);
    let n = g.n();
    let mut res = BTreeSet::new();
    for v in 1..=n {
        let p = inn[v as usize].iter().copied().filter(|&x| x < v).max().unwrap_or(0);
        for u in p + 1..v {
            for &w in &out[u as usize] {
                if w > v {
                    res.insert(ConflictingPair { v: Label(v), u: Label(u), w: Label(w) });
                }
            }
        }
    }
    res
}

/// Edge intervals plus the tree edge `{p(v), v}` of every sampled vertex
/// with a real parent.
pub fn edges_with_tree_edges(verts: &[(Label, Label)], edges: &[(Label, Label)]) -> Vec<(Label, Label)> {
    let tree = verts.iter().copied().filter(|&(p, _)| p.0 != 0);
    edges.iter().copied().chain(tree).collect()
}

/// Pairwise conflict test over explicit interval sets.
pub fn brute_interval_conflict(verts: &[(Label, Label)], edges: &[(Label, Label)]) -> bool {
    let all = edges_with_tree_edges(verts, edges);
    verts.iter().any(|&(p, v)| all.iter().any(|&(u, w)| p < u && u < v && v < w))
}

/// Discovery and finishing orders of every DFS run (any root order, any
/// neighbor order), as label vectors indexed by vertex id.
pub struct DfsRuns {
    pub discovery: HashSet<Vec<u32>>,
    pub finish: HashSet<Vec<u32>>,
}

pub fn all_dfs_runs(g: &LabeledGraph) -> DfsRuns {
    let n = g.n() as usize;
    let adj: Vec<Vec<usize>> = (1..=n as u32)
        .map(|x| g.neighbors(dfs_certify::VertexId(x)).iter().map(|y| y.index()).collect())
        .collect();
    let mut runs = DfsRuns { discovery: HashSet::new(), finish: HashSet::new() };
    let mut st = State { disc: vec![0; n], fin: vec![0; n], nd: 0, nf: 0, stack: Vec::new() };
    explore(&adj, &mut st, &mut runs);
    runs
}

struct State {
    disc: Vec<u32>,
    fin: Vec<u32>,
    nd: u32,
    nf: u32,
    stack: Vec<usize>,
}

fn explore(adj: &[Vec<usize>], st: &mut State, runs: &mut DfsRuns) {
    let n = adj.len();
    let Some(&top) = st.stack.last() else {
        if st.nd as usize == n {
            runs.discovery.insert(st.disc.clone());
            runs.finish.insert(st.fin.clone());
            return;
        }
        for r in 0..n {
            if st.disc[r] == 0 {
                visit(adj, st, runs, r);
            }
        }
        return;
    };
    let fresh: Vec<usize> = adj[top].iter().copied().filter(|&y| st.disc[y] == 0).collect();
    if fresh.is_empty() {
        st.stack.pop();
        st.nf += 1;
        st.fin[top] = st.nf;
        explore(adj, st, runs);
        st.fin[top] = 0;
        st.nf -= 1;
        st.stack.push(top);
        return;
    }
    for y in fresh {
        visit(adj, st, runs, y);
    }
}

fn visit(adj: &[Vec<usize>], st: &mut State, runs: &mut DfsRuns, y: usize) {
    st.nd += 1;
    st.disc[y] = st.nd;
    st.stack.push(y);
    explore(adj, st, runs);
    st.stack.pop();
    st.disc[y] = 0;
    st.nd -= 1;
}

/// Median of a non-empty sample.
pub fn median(xs: &mut [u64]) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}
