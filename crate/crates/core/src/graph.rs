//! Labeled bounded-degree graphs and the exact conflict primitives.
//!
//! Vertices are identified by [`VertexId`] in `1..=n`; every vertex carries a
//! [`Label`] and the labels form a bijection onto `1..=n`. Label `0` is
//! reserved for the virtual parent of component roots.

use std::fmt;

use thiserror::Error;

/// Vertex identifier in `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

/// Vertex label in `0..=n`; `0` only ever denotes the virtual parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Label(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl Label {
    pub const VIRTUAL: Label = Label(0);

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_virtual(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("labels are not a bijection onto 1..={n}")]
    NonBijectiveLabels { n: u32 },
    #[error("vertex {vertex} exceeds degree bound {bound}")]
    DegreeBoundExceeded { vertex: u32, bound: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u32, u32),
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: u32, n: u32 },
    #[error("edge {{{0},{1}}} is not present")]
    EdgeNotPresent(u32, u32),
}

/// A vertex/edge pair `(v, {u, w})` with `p(v) < u < v < w`, in label space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConflictingPair {
    pub v: Label,
    pub u: Label,
    pub w: Label,
}

impl fmt::Display for ConflictingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conflict v={} edge={{{},{}}}", self.v, self.u, self.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edit {
    Insert(Label, Label),
    Delete(Label, Label),
}

impl Edit {
    /// Endpoints with the smaller label first.
    pub fn endpoints(self) -> (Label, Label) {
        let (a, b) = match self {
            Edit::Insert(a, b) | Edit::Delete(a, b) => (a, b),
        };
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

/// Edge insertions and deletions over unordered label pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EditList {
    pub edits: Vec<Edit>,
}

impl EditList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn push(&mut self, e: Edit) {
        self.edits.push(e);
    }

    pub fn extend(&mut self, other: EditList) {
        self.edits.extend(other.edits);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edit> {
        self.edits.iter()
    }
}

/// Immutable labeled graph with adjacency in compressed rows sorted by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    n: u32,
    d: usize,
    directed: bool,
    labels: Vec<u32>,
    by_label: Vec<u32>,
    out_off: Vec<u32>,
    out_adj: Vec<VertexId>,
    in_off: Vec<u32>,
    in_adj: Vec<VertexId>,
}

fn compress(n: u32, rows: &mut [Vec<VertexId>]) -> (Vec<u32>, Vec<VertexId>) {
    let mut off = Vec::with_capacity(n as usize + 1);
    let mut adj = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    off.push(0);
    for row in rows.iter_mut() {
        row.sort_unstable();
        adj.extend_from_slice(row);
        off.push(adj.len() as u32);
    }
    (off, adj)
}

impl LabeledGraph {
    /// Validates and builds a graph. `edges` are vertex-id pairs (`u -> v` for
    /// directed graphs); `labels[i]` is the label of vertex `i + 1`.
    pub fn build(
        n: u32,
        d: usize,
        edges: &[(u32, u32)],
        labels: &[u32],
        directed: bool,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if labels.len() != n as usize {
            return Err(GraphError::NonBijectiveLabels { n });
        }
        let mut by_label = vec![0u32; n as usize + 1];
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 || l > n || by_label[l as usize] != 0 {
                return Err(GraphError::NonBijectiveLabels { n });
            }
            by_label[l as usize] = i as u32 + 1;
        }
        let mut out_rows = vec![Vec::new(); n as usize];
        let mut in_rows = vec![Vec::new(); if directed { n as usize } else { 0 }];
        for &(a, b) in edges {
            for x in [a, b] {
                if x == 0 || x > n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            out_rows[a as usize - 1].push(VertexId(b));
            if directed {
                in_rows[b as usize - 1].push(VertexId(a));
            } else {
                out_rows[b as usize - 1].push(VertexId(a));
            }
        }
        for rows in [&mut out_rows, &mut in_rows] {
            for (i, row) in rows.iter_mut().enumerate() {
                row.sort_unstable();
                if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                    let (x, y) = (i as u32 + 1, w[0].0);
                    return Err(GraphError::DuplicateEdge(x.min(y), x.max(y)));
                }
                if row.len() > d {
                    return Err(GraphError::DegreeBoundExceeded {
                        vertex: i as u32 + 1,
                        bound: d,
                    });
                }
            }
        }
        let (out_off, out_adj) = compress(n, &mut out_rows);
        let (in_off, in_adj) = if directed {
            compress(n, &mut in_rows)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self {
            n,
            d,
            directed,
            labels: labels.to_vec(),
            by_label,
            out_off,
            out_adj,
            in_off,
            in_adj,
        })
    }

    /// Builds from edges given as label pairs.
    pub fn from_label_edges(
        n: u32,
        d: usize,
        edges: &[(u32, u32)],
        labels: &[u32],
        directed: bool,
    ) -> Result<Self, GraphError> {
        let mut by_label = vec![0u32; n as usize + 1];
        for (i, &l) in labels.iter().enumerate() {
            if (l as usize) < by_label.len() {
                by_label[l as usize] = i as u32 + 1;
            }
        }
        let map = |l: u32| by_label.get(l as usize).copied().unwrap_or(0);
        let id_edges: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (map(a), map(b));
                // Out-of-range labels surface as out-of-range ids.
                (if x == 0 { a.max(n + 1) } else { x }, if y == 0 { b.max(n + 1) } else { y })
            })
            .collect();
        Self::build(n, d, &id_edges, labels, directed)
    }

    /// Identity-labeled undirected graph.
    pub fn identity(n: u32, d: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let labels: Vec<u32> = (1..=n).collect();
        Self::build(n, d, edges, &labels, false)
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn label(&self, v: VertexId) -> Label {
        Label(self.labels[v.index()])
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Inverse labeling. Exact code only; the oracle never exposes this.
    #[inline]
    pub fn vertex_of(&self, l: Label) -> VertexId {
        VertexId(self.by_label[l.0 as usize])
    }

    /// Out-neighbors (all neighbors when undirected), sorted by id.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let i = v.index();
        &self.out_adj[self.out_off[i] as usize..self.out_off[i + 1] as usize]
    }

    /// In-neighbors (all neighbors when undirected), sorted by id.
    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        if !self.directed {
            return self.neighbors(v);
        }
        let i = v.index();
        &self.in_adj[self.in_off[i] as usize..self.in_off[i + 1] as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn max_degree(&self) -> usize {
        let out = (0..self.n as usize)
            .map(|i| (self.out_off[i + 1] - self.out_off[i]) as usize)
            .max()
            .unwrap_or(0);
        if self.directed {
            let inn = (0..self.n as usize)
                .map(|i| (self.in_off[i + 1] - self.in_off[i]) as usize)
                .max()
                .unwrap_or(0);
            out.max(inn)
        } else {
            out
        }
    }

    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.out_adj.len()
        } else {
            self.out_adj.len() / 2
        }
    }

    /// Edges as id pairs: `u < v` for undirected, `(tail, head)` for directed.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 1..=self.n {
            let u = VertexId(u);
            for &v in self.neighbors(u) {
                if self.directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Edges as label pairs: `(min, max)` for undirected, `(tail, head)` for directed.
    pub fn label_edges(&self) -> Vec<(Label, Label)> {
        self.edges()
            .into_iter()
            .map(|(a, b)| {
                let (x, y) = (self.label(a), self.label(b));
                if self.directed || x < y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect()
    }

    /// Whether the edge between labels `a` and `b` exists (`a -> b` when directed).
    pub fn has_label_edge(&self, a: Label, b: Label) -> bool {
        if a.0 == 0 || b.0 == 0 || a.0 > self.n || b.0 > self.n {
            return false;
        }
        let (x, y) = (self.vertex_of(a), self.vertex_of(b));
        self.neighbors(x).binary_search(&y).is_ok()
    }

    /// `p(v)`: the largest (in-)neighbor label below `v`, or `0`.
    pub fn parent_label(&self, v: Label) -> Label {
        let x = self.vertex_of(v);
        self.in_neighbors(x)
            .iter()
            .map(|&w| self.labels[w.index()])
            .filter(|&l| l < v.0)
            .max()
            .map_or(Label::VIRTUAL, Label)
    }

    /// Largest out-neighbor label of `v` (0 if none).
    pub fn max_neighbor_label(&self, v: Label) -> Label {
        let x = self.vertex_of(v);
        self.neighbors(x)
            .iter()
            .map(|&w| self.labels[w.index()])
            .max()
            .map_or(Label::VIRTUAL, Label)
    }

    /// `p(l)` for every label, indexed by label (`out[0]` unused).
    pub fn parent_table(&self) -> Vec<u32> {
        let mut p = vec![0u32; self.n as usize + 1];
        for l in 1..=self.n {
            p[l as usize] = self.parent_label(Label(l)).0;
        }
        p
    }

    /// Whether `(v, {u, w})` is a conflicting pair; `e` must be an edge.
    pub fn is_conflicting_pair(&self, v: Label, e: (Label, Label)) -> Result<bool, GraphError> {
        let (u, w) = if self.directed || e.0 <= e.1 { e } else { (e.1, e.0) };
        if !self.has_label_edge(u, w) {
            return Err(GraphError::EdgeNotPresent(e.0 .0, e.1 .0));
        }
        if u >= w || v.0 == 0 || v.0 > self.n {
            return Ok(false);
        }
        let p = self.parent_label(v);
        Ok(p < u && u < v && v < w)
    }

    /// All conflicting pairs in lexicographic `(v, u, w)` order.
    pub fn enumerate_conflicts(&self) -> Vec<ConflictingPair> {
        let p = self.parent_table();
        let mut edges: Vec<(u32, u32)> = self
            .label_edges()
            .into_iter()
            .filter(|(a, b)| a < b)
            .map(|(a, b)| (a.0, b.0))
            .collect();
        edges.sort_unstable();
        let mut out = Vec::new();
        for v in 1..=self.n {
            let pv = p[v as usize];
            // Edges with u in (p(v), v), sorted by u then w.
            let lo = edges.partition_point(|&(u, _)| u <= pv);
            let hi = edges.partition_point(|&(u, _)| u < v);
            for &(u, w) in &edges[lo..hi] {
                if w > v {
                    out.push(ConflictingPair {
                        v: Label(v),
                        u: Label(u),
                        w: Label(w),
                    });
                }
            }
        }
        out
    }

    /// Whether any conflicting pair exists.
    pub fn has_conflict(&self) -> bool {
        first_conflict(self).is_some()
    }

    /// Applies edits. With `bound = None` the result may exceed `d` and its
    /// bound is raised to the resulting maximum degree (transitional state).
    pub fn apply_edits(&self, edits: &EditList, bound: Option<usize>) -> Result<Self, GraphError> {
        let mut set: std::collections::BTreeSet<(u32, u32)> = self
            .label_edges()
            .into_iter()
            .map(|(a, b)| (a.0, b.0))
            .collect();
        let key = |a: Label, b: Label| {
            if self.directed || a <= b {
                (a.0, b.0)
            } else {
                (b.0, a.0)
            }
        };
        for &e in &edits.edits {
            match e {
                Edit::Insert(a, b) => {
                    if !set.insert(key(a, b)) {
                        return Err(GraphError::DuplicateEdge(a.0, b.0));
                    }
                }
                Edit::Delete(a, b) => {
                    if !set.remove(&key(a, b)) {
                        return Err(GraphError::EdgeNotPresent(a.0, b.0));
                    }
                }
            }
        }
        let edges: Vec<(u32, u32)> = set.into_iter().collect();
        let d = match bound {
            Some(b) => b,
            None => {
                let mut deg = vec![0usize; self.n as usize + 1];
                for &(a, b) in &edges {
                    deg[a as usize] += 1;
                    deg[b as usize] += 1;
                }
                deg.into_iter().max().unwrap_or(0).max(self.d)
            }
        };
        Self::from_label_edges(self.n, d, &edges, &self.labels, self.directed)
    }

    /// Same graph with a different degree bound.
    pub fn with_bound(&self, d: usize) -> Result<Self, GraphError> {
        let edges: Vec<(u32, u32)> = self.edges().into_iter().map(|(a, b)| (a.0, b.0)).collect();
        Self::build(self.n, d, &edges, &self.labels, self.directed)
    }

    /// Same edges with new labels.
    pub fn relabeled(&self, labels: &[u32]) -> Result<Self, GraphError> {
        let edges: Vec<(u32, u32)> = self.edges().into_iter().map(|(a, b)| (a.0, b.0)).collect();
        Self::build(self.n, self.d, &edges, labels, self.directed)
    }

    /// Connected component index per vertex id (weak connectivity when directed).
    pub fn components(&self) -> Vec<u32> {
        let n = self.n as usize;
        let mut comp = vec![u32::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if comp[s] != u32::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(VertexId(s as u32 + 1));
            while let Some(x) = stack.pop() {
                let nb = self.neighbors(x).iter().chain(if self.directed {
                    self.in_neighbors(x).iter()
                } else {
                    [].iter()
                });
                for &y in nb {
                    if comp[y.index()] == u32::MAX {
                        comp[y.index()] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// First conflicting pair in `(v, u, w)` order, without materializing all pairs.
pub fn first_conflict(g: &LabeledGraph) -> Option<ConflictingPair> {
    let p = g.parent_table();
    let mut edges: Vec<(u32, u32)> = g
        .label_edges()
        .into_iter()
        .filter(|(a, b)| a < b)
        .map(|(a, b)| (a.0, b.0))
        .collect();
    edges.sort_unstable();
    // Sparse table over w for range-max queries on edges sorted by u.
    let m = edges.len();
    if m == 0 {
        return None;
    }
    let mut table = vec![edges.iter().map(|e| e.1).collect::<Vec<u32>>()];
    let mut k = 1;
    while (1 << k) <= m {
        let prev = &table[k - 1];
        let half = 1 << (k - 1);
        let row: Vec<u32> = (0..=m - (1 << k)).map(|i| prev[i].max(prev[i + half])).collect();
        table.push(row);
        k += 1;
    }
    let range_max = |lo: usize, hi: usize| -> u32 {
        let len = hi - lo;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        table[k][lo].max(table[k][hi - (1 << k)])
    };
    for v in 1..=g.n() {
        let pv = p[v as usize];
        let lo = edges.partition_point(|&(u, _)| u <= pv);
        let hi = edges.partition_point(|&(u, _)| u < v);
        if lo < hi && range_max(lo, hi) > v {
            let &(u, w) = edges[lo..hi].iter().find(|&&(_, w)| w > v).unwrap();
            return Some(ConflictingPair {
                v: Label(v),
                u: Label(u),
                w: Label(w),
            });
        }
    }
    None
}

/// Maximum matching in the bipartite conflict graph (vertices vs edges),
/// found with simple augmenting paths.
pub fn conflict_matching(g: &LabeledGraph) -> Vec<ConflictingPair> {
    let conflicts = g.enumerate_conflicts();
    matching_of(&conflicts)
}

/// Maximum matching over an explicit conflict list.
pub fn matching_of(conflicts: &[ConflictingPair]) -> Vec<ConflictingPair> {
    use std::collections::HashMap;
    let mut vid: HashMap<u32, usize> = HashMap::new();
    let mut eid: HashMap<(u32, u32), usize> = HashMap::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut vlab = Vec::new();
    let mut elab = Vec::new();
    for c in conflicts {
        let vi = *vid.entry(c.v.0).or_insert_with(|| {
            adj.push(Vec::new());
            vlab.push(c.v);
            adj.len() - 1
        });
        let ei = *eid.entry((c.u.0, c.w.0)).or_insert_with(|| {
            elab.push((c.u, c.w));
            elab.len() - 1
        });
        adj[vi].push(ei);
    }
    let mut match_e: Vec<usize> = vec![usize::MAX; elab.len()];
    let mut match_v: Vec<usize> = vec![usize::MAX; adj.len()];
    // Greedy initialization, then augmenting paths from each free vertex.
    for v in 0..adj.len() {
        if let Some(&e) = adj[v].iter().find(|&&e| match_e[e] == usize::MAX) {
            match_e[e] = v;
            match_v[v] = e;
        }
    }
    let mut seen = vec![0u32; elab.len()];
    let mut stamp = 0u32;
    for v in 0..adj.len() {
        if match_v[v] != usize::MAX {
            continue;
        }
        stamp += 1;
        augment(v, &adj, &mut match_e, &mut match_v, &mut seen, stamp);
    }
    let mut out: Vec<ConflictingPair> = (0..adj.len())
        .filter(|&v| match_v[v] != usize::MAX)
        .map(|v| {
            let (u, w) = elab[match_v[v]];
            ConflictingPair { v: vlab[v], u, w }
        })
        .collect();
    out.sort();
    out
}

fn augment(
    root: usize,
    adj: &[Vec<usize>],
    match_e: &mut [usize],
    match_v: &mut [usize],
    seen: &mut [u32],
    stamp: u32,
) -> bool {
    // Iterative DFS over alternating paths.
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    let mut via: Vec<usize> = Vec::new();
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        if *i >= adj[v].len() {
            stack.pop();
            via.pop();
            continue;
        }
        let e = adj[v][*i];
        *i += 1;
        if seen[e] == stamp {
            continue;
        }
        seen[e] = stamp;
        via.push(e);
        let owner = match_e[e];
        if owner == usize::MAX {
            // Flip the path.
            for (k, &(x, _)) in stack.iter().enumerate() {
                let ek = via[k];
                match_e[ek] = x;
                match_v[x] = ek;
            }
            return true;
        }
        stack.push((owner, 0));
    }
    false
}

/// Conflict type relative to a locality parameter `ell`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConflictType {
    L1,
    L2,
    L3,
    G,
}

/// Local types a conflict satisfies (possibly several), or `[G]`.
pub fn conflict_types(c: &ConflictingPair, p_v: Label, ell: u32) -> Vec<ConflictType> {
    let mut t = Vec::new();
    if p_v.0 != 0 && c.u.0 - p_v.0 <= ell {
        t.push(ConflictType::L1);
    }
    if c.v.0 - c.u.0 <= ell {
        t.push(ConflictType::L2);
    }
    if c.w.0 - c.v.0 <= ell {
        t.push(ConflictType::L3);
    }
    if t.is_empty() {
        t.push(ConflictType::G);
    }
    t
}

/// The small named graphs used throughout the docs and tests.
pub mod fixtures {
    use super::LabeledGraph;

    /// Path 1-2-3 with identity labels.
    pub fn p3() -> LabeledGraph {
        LabeledGraph::identity(3, 2, &[(1, 2), (2, 3)]).unwrap()
    }

    /// Edges {1,2},{1,3},{2,4}, identity labels.
    pub fn ga() -> LabeledGraph {
        LabeledGraph::identity(4, 3, &[(1, 2), (1, 3), (2, 4)]).unwrap()
    }

    /// Star with center labeled 1 and leaves 2..5.
    pub fn star5() -> LabeledGraph {
        LabeledGraph::identity(5, 4, &[(1, 2), (1, 3), (1, 4), (1, 5)]).unwrap()
    }

    /// Path v1-v2-v3 labeled 3,2,1 along the chain.
    pub fn r3() -> LabeledGraph {
        LabeledGraph::build(3, 2, &[(1, 2), (2, 3)], &[3, 2, 1], false).unwrap()
    }
}
