//! Degree reduction of valid instances and FIN numbering via reversal.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::exact::{check_by_conflicts, Verdict};
use crate::graph::{Edit, EditList, GraphError, Label, LabeledGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("input numbering is not a valid DFS numbering")]
    InvalidInput,
    #[error("degree bound {0} is below 3")]
    DegreeBoundTooSmall(usize),
    #[error("operation is defined for undirected graphs only")]
    DirectedUnsupported,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Adjacency by label, mutated in place.
struct Work {
    adj: Vec<BTreeSet<u32>>,
    edits: EditList,
}

impl Work {
    fn new(g: &LabeledGraph) -> Self {
        let mut adj = vec![BTreeSet::new(); g.n() as usize + 1];
        for (a, b) in g.label_edges() {
            adj[a.0 as usize].insert(b.0);
            adj[b.0 as usize].insert(a.0);
        }
        Self { adj, edits: EditList::new() }
    }

    fn remove(&mut self, a: u32, b: u32) {
        self.adj[a as usize].remove(&b);
        self.adj[b as usize].remove(&a);
        self.edits.push(Edit::Delete(Label(a.min(b)), Label(a.max(b))));
    }

    fn insert(&mut self, a: u32, b: u32) {
        self.adj[a as usize].insert(b);
        self.adj[b as usize].insert(a);
        self.edits.push(Edit::Insert(Label(a.min(b)), Label(a.max(b))));
    }

    /// Brings every vertex of degree `k` down to `k - 1`, ascending by
    /// label. Needs `k >= 3` and a valid numbering.
    fn reduce_level(&mut self, k: usize) {
        for v in 1..self.adj.len() as u32 {
            if self.adj[v as usize].len() < k {
                continue;
            }
            let row = &self.adj[v as usize];
            let lower: Vec<u32> = row.range(..v).copied().collect();
            if lower.len() >= 2 {
                // Drop a back edge; the parent edge is the largest lower one.
                self.remove(lower[0], v);
                continue;
            }
            let uk = *row.iter().next_back().expect("degree >= 3");
            let p_uk = *self.adj[uk as usize].range(..uk).next_back().expect("v is below uk");
            if p_uk != v {
                // A back edge from a descendant: `v < p(uk) < uk`.
                self.remove(v, uk);
                continue;
            }
            let w = uk - 1;
            let w_deg = self.adj[w as usize].len();
            let w_min = self.adj[w as usize].iter().next().copied();
            // Deletions first, so no intermediate state exceeds the bound.
            self.remove(v, uk);
            if w_deg >= 2 {
                self.remove(w, w_min.expect("w has neighbors"));
            }
            self.insert(w, uk);
        }
    }

    fn finish(self, g: &LabeledGraph, bound: usize) -> Result<(LabeledGraph, EditList), GraphError> {
        let edges: Vec<(u32, u32)> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.range(a as u32 + 1..).map(move |&b| (a as u32, b)))
            .collect();
        let out = LabeledGraph::from_label_edges(g.n(), bound, &edges, g.labels(), false)?;
        Ok((out, self.edits))
    }
}

fn degree_profile(g: &LabeledGraph) -> Vec<usize> {
    let mut counts = vec![0usize; g.max_degree() + 1];
    for i in 1..=g.n() {
        counts[g.degree(crate::VertexId(i))] += 1;
    }
    counts
}

/// Reduces an undirected valid graph to maximum degree `bound >= 2`
/// regardless of its declared bound. Used by repair on transitional graphs.
pub(crate) fn reduce_to_bound(
    g: &LabeledGraph,
    bound: usize,
) -> Result<(LabeledGraph, EditList), GraphError> {
    let mut w = Work::new(g);
    for k in (bound + 1..=g.max_degree()).rev() {
        w.reduce_level(k);
    }
    w.finish(g, bound)
}

fn precheck(g: &LabeledGraph, bound: usize) -> Result<(), TransformError> {
    if g.is_directed() {
        return Err(TransformError::DirectedUnsupported);
    }
    if bound < 3 {
        return Err(TransformError::DegreeBoundTooSmall(bound));
    }
    if !check_by_conflicts(g).is_accept() {
        return Err(TransformError::InvalidInput);
    }
    Ok(())
}

/// Output has maximum degree at most `d - 1` and at most `3·|V_d|` edits.
pub fn degree_reduce(g: &LabeledGraph) -> Result<(LabeledGraph, EditList), TransformError> {
    precheck(g, g.d())?;
    let mut w = Work::new(g);
    w.reduce_level(g.d());
    Ok(w.finish(g, g.d() - 1)?)
}

/// Iterates [`degree_reduce`] down to `d_star`.
pub fn degree_reduce_to(
    g: &LabeledGraph,
    d_star: usize,
) -> Result<(LabeledGraph, EditList), TransformError> {
    precheck(g, d_star)?;
    if g.max_degree() <= d_star {
        return Ok((g.with_bound(d_star)?, EditList::new()));
    }
    Ok(reduce_to_bound(g, d_star)?)
}

/// `Σ_{k=d*+1}^{d} 3·(k - d*)·|V_k|` over the degrees of `g`.
pub fn reduction_edit_bound(g: &LabeledGraph, d_star: usize) -> usize {
    degree_profile(g)
        .iter()
        .enumerate()
        .skip(d_star + 1)
        .map(|(k, &c)| 3 * (k - d_star) * c)
        .sum()
}

/// Labels replaced by `n + 1 - label`.
pub fn reverse_numbering(g: &LabeledGraph) -> Result<LabeledGraph, TransformError> {
    if g.is_directed() {
        return Err(TransformError::DirectedUnsupported);
    }
    let n = g.n();
    let labels: Vec<u32> = g.labels().iter().map(|&l| n + 1 - l).collect();
    Ok(g.relabeled(&labels)?)
}

/// Exact FIN check. Witness labels refer to the reversed numbering.
pub fn check_fin(g: &LabeledGraph) -> Result<Verdict, TransformError> {
    Ok(check_by_conflicts(&reverse_numbering(g)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FinParent {
    Label(Label),
    Infinity,
}

/// Smallest neighbor label above `v`.
pub fn fin_parent(g: &LabeledGraph, v: Label) -> Result<FinParent, TransformError> {
    if g.is_directed() {
        return Err(TransformError::DirectedUnsupported);
    }
    let x = g.vertex_of(v);
    Ok(g.neighbors(x)
        .iter()
        .map(|&y| g.label(y))
        .filter(|&l| l > v)
        .min()
        .map_or(FinParent::Infinity, FinParent::Label))
}
