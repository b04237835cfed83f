//! Exact validity decisions, the sweep-line decider, and conflict repair.

use std::fmt;

use thiserror::Error;

use crate::graph::{
    first_conflict, matching_of, ConflictingPair, Edit, EditList, GraphError, Label, LabeledGraph,
};

/// Which way a walk over label order was going.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkDirection {
    Forward,
    Backward,
}

/// The tree neighbor of `at` in walk direction is not `at ± 1`.
///
/// `found` is the observed tree successor (or predecessor); `None` means the
/// walk hit the end of the component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderViolation {
    pub at: Label,
    pub found: Option<Label>,
    pub direction: WalkDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Witness {
    Conflict(ConflictingPair),
    Order(OrderViolation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject(Witness),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject(w) => Some(w),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Conflict(c) => c.fmt(f),
            Witness::Order(o) => {
                let dir = match o.direction {
                    WalkDirection::Forward => "next",
                    WalkDirection::Backward => "prev",
                };
                match o.found {
                    Some(l) => write!(f, "order {dir}({}) = {l}", o.at),
                    None => write!(f, "order {dir}({}) = end", o.at),
                }
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => write!(f, "accept"),
            Verdict::Reject(w) => write!(f, "reject {w}"),
        }
    }
}

/// Pre-order of the parent forest `T`, computed exactly.
struct TreeOrder {
    /// Position of each label in the pre-order, and the root of its tree.
    pos: Vec<u32>,
    root: Vec<u32>,
    order: Vec<u32>,
}

impl TreeOrder {
    fn new(g: &LabeledGraph) -> Self {
        let n = g.n() as usize;
        let p = g.parent_table();
        let mut kids: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        for v in 1..=n {
            kids[p[v] as usize].push(v as u32);
        }
        let mut order = Vec::with_capacity(n);
        let mut root = vec![0u32; n + 1];
        let mut stack = Vec::new();
        for &r in &kids[0] {
            stack.push(r);
            while let Some(x) = stack.pop() {
                order.push(x);
                root[x as usize] = r;
                stack.extend(kids[x as usize].iter().rev());
            }
        }
        let mut pos = vec![0u32; n + 1];
        for (i, &x) in order.iter().enumerate() {
            pos[x as usize] = i as u32;
        }
        Self { pos, root, order }
    }

    fn step(&self, at: u32, dir: WalkDirection) -> Option<u32> {
        let i = self.pos[at as usize] as usize;
        let j = match dir {
            WalkDirection::Forward => i.checked_add(1)?,
            WalkDirection::Backward => i.checked_sub(1)?,
        };
        let x = *self.order.get(j)?;
        (self.root[x as usize] == self.root[at as usize]).then_some(x)
    }
}

impl Witness {
    /// Re-checks the witness against `g` without trusting the tester.
    pub fn validate(&self, g: &LabeledGraph) -> bool {
        match *self {
            Witness::Conflict(c) => g.is_conflicting_pair(c.v, (c.u, c.w)).unwrap_or(false),
            Witness::Order(o) => {
                if o.at.0 == 0 || o.at.0 > g.n() {
                    return false;
                }
                let t = TreeOrder::new(g);
                let got = t.step(o.at.0, o.direction);
                if got.map(Label) != o.found {
                    return false;
                }
                let want = match o.direction {
                    WalkDirection::Forward => o.at.0 + 1,
                    WalkDirection::Backward => o.at.0 - 1,
                };
                match got {
                    Some(x) => x != want,
                    None => {
                        // Valid components carry contiguous labels.
                        if want == 0 || want > g.n() {
                            return false;
                        }
                        let comp = g.components();
                        let id = |l: u32| comp[g.vertex_of(Label(l)).index()];
                        let c = id(o.at.0);
                        match o.direction {
                            WalkDirection::Forward => (o.at.0 + 1..=g.n()).any(|l| id(l) == c),
                            WalkDirection::Backward => (1..o.at.0).any(|l| id(l) == c),
                        }
                    }
                }
            }
        }
    }
}

/// Accepts iff no conflicting pair exists; rejects with the first one.
pub fn check_by_conflicts(g: &LabeledGraph) -> Verdict {
    match first_conflict(g) {
        None => Verdict::Accept,
        Some(c) => Verdict::Reject(Witness::Conflict(c)),
    }
}

/// Replays a DFS that discovers labels `1..n` in order.
///
/// The active path is a stack; before discovering `k` every vertex above
/// `p(k)` is finished, which requires it to have no undiscovered neighbor.
pub fn check_by_simulation(g: &LabeledGraph) -> Verdict {
    let n = g.n();
    let lab = |x: crate::VertexId| g.label(x).0;
    let mut stack: Vec<u32> = Vec::new();
    for k in 1..=n {
        let vk = g.vertex_of(Label(k));
        let pk = g.in_neighbors(vk).iter().map(|&x| lab(x)).filter(|&l| l < k).max().unwrap_or(0);
        while let Some(&top) = stack.last() {
            if top == pk {
                break;
            }
            let x = g.vertex_of(Label(top));
            if let Some(y) = g.neighbors(x).iter().map(|&y| lab(y)).filter(|&l| l >= k).max() {
                return Verdict::Reject(Witness::Conflict(ConflictingPair {
                    v: Label(k),
                    u: Label(top),
                    w: Label(y),
                }));
            }
            stack.pop();
        }
        stack.push(k);
    }
    Verdict::Accept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    IntervalEnd,
    IntervalStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntervalKind {
    Vertex,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SweepEvent {
    pub position: Label,
    pub kind: EventKind,
    pub interval: IntervalKind,
    pub sibling: Label,
}

impl SweepEvent {
    /// Position, then ends before starts, then decreasing sibling.
    fn key(&self) -> (u32, EventKind, std::cmp::Reverse<u32>) {
        (self.position.0, self.kind, std::cmp::Reverse(self.sibling.0))
    }
}

/// Decides whether the vertex intervals `[p(v), v]` and edge intervals
/// `[u, w]` contain a conflicting pair, returning one if so.
///
/// Vertex-vertex conflicts `(v1, {p(v2), v2})` use the tree edge of `v2`.
pub fn sweepline_conflicts(
    vertex_intervals: &[(Label, Label)],
    edge_intervals: &[(Label, Label)],
) -> Option<ConflictingPair> {
    let mut events = Vec::with_capacity(2 * vertex_intervals.len() + edge_intervals.len());
    let mut verts = vertex_intervals.to_vec();
    verts.sort_unstable();
    verts.dedup();
    for &(p, v) in &verts {
        events.push(SweepEvent {
            position: p,
            kind: EventKind::IntervalStart,
            interval: IntervalKind::Vertex,
            sibling: v,
        });
        events.push(SweepEvent {
            position: v,
            kind: EventKind::IntervalEnd,
            interval: IntervalKind::Vertex,
            sibling: p,
        });
    }
    // Edge ends never change the active set, so only starts are queued.
    for &(a, b) in edge_intervals {
        let (u, w) = if a <= b { (a, b) } else { (b, a) };
        events.push(SweepEvent {
            position: u,
            kind: EventKind::IntervalStart,
            interval: IntervalKind::Edge,
            sibling: w,
        });
    }
    events.sort_unstable_by_key(SweepEvent::key);

    // Right ends of open vertex intervals; nested, so the minimum is on top.
    let mut active: Vec<(Label, Label)> = Vec::new();
    for ev in events {
        match (ev.kind, ev.interval) {
            (EventKind::IntervalEnd, _) => {
                if active.last().map(|a| a.0) == Some(ev.position) {
                    active.pop();
                }
            }
            (EventKind::IntervalStart, IntervalKind::Vertex) => match active.last() {
                Some(&(min, _)) if ev.sibling > min => {
                    return Some(ConflictingPair { v: min, u: ev.position, w: ev.sibling });
                }
                _ => active.push((ev.sibling, ev.position)),
            },
            (EventKind::IntervalStart, IntervalKind::Edge) => {
                if let Some(&(min, _)) = active.last() {
                    if ev.sibling > min {
                        return Some(ConflictingPair { v: min, u: ev.position, w: ev.sibling });
                    }
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixError {
    #[error("vertex 1 has no predecessor")]
    VertexIsOne,
    #[error("label {0} out of range")]
    OutOfRange(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("degree bound {0} is below 2; degree reduction cannot reach it")]
    DegreeBoundTooSmall(usize),
}

/// Adds `{v-1, v}` if absent, making `v` a child of `v-1`.
pub fn fix_vertex(g: &LabeledGraph, v: Label) -> Result<EditList, FixError> {
    if v.0 == 1 {
        return Err(FixError::VertexIsOne);
    }
    if v.0 == 0 || v.0 > g.n() {
        return Err(FixError::OutOfRange(v.0));
    }
    let mut out = EditList::new();
    if !g.has_label_edge(Label(v.0 - 1), v) {
        out.push(Edit::Insert(Label(v.0 - 1), v));
    }
    Ok(out)
}

/// Removes `{u, w}` and adds `{w-1, w}` if absent. The edge `{w-1, w}` is
/// never in a conflict and yields an empty list.
pub fn fix_edge(g: &LabeledGraph, e: (Label, Label)) -> Result<EditList, FixError> {
    let (u, w) = if g.is_directed() || e.0 <= e.1 { e } else { (e.1, e.0) };
    if !g.has_label_edge(u, w) {
        return Err(GraphError::EdgeNotPresent(e.0 .0, e.1 .0).into());
    }
    let mut out = EditList::new();
    if u.0 + 1 == w.0 || u > w {
        return Ok(out);
    }
    out.push(Edit::Delete(u, w));
    if !g.has_label_edge(Label(w.0 - 1), w) {
        out.push(Edit::Insert(Label(w.0 - 1), w));
    }
    Ok(out)
}

/// One element of a vertex cover of the conflict graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoverItem {
    Vertex(Label),
    Edge(Label, Label),
}

/// Both sides of every pair of a maximum matching: covers all conflicts.
pub fn greedy_cover(g: &LabeledGraph) -> Vec<CoverItem> {
    let m = matching_of(&g.enumerate_conflicts());
    let mut out = Vec::with_capacity(2 * m.len());
    for c in m {
        out.push(CoverItem::Vertex(c.v));
        out.push(CoverItem::Edge(c.u, c.w));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub graph: LabeledGraph,
    pub edits: EditList,
    pub cover_size: usize,
}

/// Fixes every cover element that is still in a conflict, then restores
/// the degree bound. Undirected graphs only need `d >= 2`.
pub fn repair(g: &LabeledGraph) -> Result<Repair, FixError> {
    let cover = greedy_cover(g);
    if cover.is_empty() {
        return Ok(Repair { graph: g.clone(), edits: EditList::new(), cover_size: 0 });
    }
    if g.d() < 2 {
        return Err(FixError::DegreeBoundTooSmall(g.d()));
    }
    let mut cur = g.clone();
    let mut edits = EditList::new();
    for item in &cover {
        let live = cur.enumerate_conflicts();
        let fix = match *item {
            CoverItem::Vertex(v) if live.iter().any(|c| c.v == v) => fix_vertex(&cur, v)?,
            CoverItem::Edge(u, w) if live.iter().any(|c| c.u == u && c.w == w) => {
                fix_edge(&cur, (u, w))?
            }
            _ => continue,
        };
        cur = cur.apply_edits(&fix, None)?;
        edits.extend(fix);
    }
    let (reduced, more) = crate::transforms::reduce_to_bound(&cur, g.d())?;
    edits.extend(more);
    Ok(Repair { graph: reduced, edits, cover_size: cover.len() })
}
